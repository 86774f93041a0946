// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>

namespace sfde {

/// Neumaier-compensated running sum. Deterministic for a fixed input order.
class CompensatedSum {
public:
    void add(double v) noexcept;
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Monte Carlo mean with its standard error.
struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t n = 0;

    double lower(double z) const noexcept { return mean - z * std_error; }
    double upper(double z) const noexcept { return mean + z * std_error; }
};

/// Mean and standard error of per-path values, summed in index order.
McEstimate summarize(std::span<const double> values);

/// Quantile of the standard normal distribution.
double normal_quantile(double p);

/// z such that P(|N(0,1)| <= z) = confidence.
double two_sided_z(double confidence);

double normal_cdf(double x) noexcept;

/// Asymptotic Kolmogorov tail probability P(K > lambda).
double kolmogorov_tail(double lambda) noexcept;

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// One-sample KS test against N(mean, sd^2).
KsResult ks_test_normal(std::span<const double> sample, double mean, double sd);

/// Two-sample KS test.
KsResult ks_test_two_sample(std::span<const double> a, std::span<const double> b);

/// Ordinary least squares fit y = intercept + slope * x.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_std_error = 0.0;
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace sfde
