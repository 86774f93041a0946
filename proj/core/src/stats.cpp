// SPDX-License-Identifier: Apache-2.0
#include "sfde/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "sfde/errors.hpp"

namespace sfde {

void CompensatedSum::add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
        comp_ += (sum_ - t) + v;
    else
        comp_ += (v - t) + sum_;
    sum_ = t;
}

McEstimate summarize(std::span<const double> values) {
    McEstimate est;
    est.n = values.size();
    if (values.empty()) return est;
    CompensatedSum s;
    for (double v : values) s.add(v);
    est.mean = s.value() / static_cast<double>(values.size());
    if (values.size() < 2) return est;
    CompensatedSum sq;
    for (double v : values) {
        const double dv = v - est.mean;
        sq.add(dv * dv);
    }
    const double n = static_cast<double>(values.size());
    const double var = sq.value() / (n - 1.0);
    est.std_error = std::sqrt(std::max(var, 0.0) / n);
    return est;
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double two_sided_z(double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("confidence must lie in (0, 1)");
    return normal_quantile(0.5 + 0.5 * confidence);
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double kolmogorov_tail(double lambda) noexcept {
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

// Stephens' small-sample correction of the asymptotic distribution.
double ks_p(double d, double n_eff) {
    const double rn = std::sqrt(n_eff);
    return kolmogorov_tail((rn + 0.12 + 0.11 / rn) * d);
}

}  // namespace

KsResult ks_test_normal(std::span<const double> sample, double mean, double sd) {
    if (sample.empty()) throw DomainError("ks_test_normal: empty sample");
    if (!(sd > 0.0)) throw DomainError("ks_test_normal: sd must be > 0");
    std::vector<double> s(sample.begin(), sample.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = normal_cdf((s[i] - mean) / sd);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return {d, ks_p(d, n)};
}

KsResult ks_test_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DomainError("ks_test_two_sample: empty sample");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double na = static_cast<double>(x.size());
    const double nb = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return {d, ks_p(d, na * nb / (na + nb))};
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_line: need at least two paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw DomainError("fit_line: degenerate abscissae");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (x.size() > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double e = y[i] - fit.intercept - fit.slope * x[i];
            rss += e * e;
        }
        fit.slope_std_error = std::sqrt(rss / (n - 2.0) / sxx);
    }
    return fit;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("loglog_slope: non-positive value");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return fit_line(lx, ly).slope;
}

}  // namespace sfde
