// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sfde/coupling.hpp"
#include "sfde/functionals.hpp"
#include "sfde/solver.hpp"
#include "sfde/stats.hpp"

namespace sfde {

/// Relative slack of the Harnack verdict: pass iff LHS upper <= RHS lower * (1 + slack).
inline constexpr double kHarnackSlack = 0.02;

/// Cost objective of the Harnack exponent at deadline s:
/// gap0^2 / (s - r) + s L^2 gap_sup^2.
double rho_objective(double s, double gap0, double gap_sup, double lipschitz, double r);

/// inf over s in (r, T] of rho_objective, by golden-section search.
/// With gap0 == 0 the infimum r L^2 gap_sup^2 is returned although it is not attained.
double rho_sq_variational(double gap0, double gap_sup, double lipschitz, double r, double T);

/// The s in (r, T] at which the infimum is attained (r itself when gap0 == 0).
double rho_sq_minimizer(double gap0, double gap_sup, double lipschitz, double r, double T);

/// Two-case closed form of the same infimum, split at T = r + gap0 / (L gap_sup).
double rho_sq_closed_form(double gap0, double gap_sup, double lipschitz, double r, double T);

/// sqrt(exp(2 (gap0^2 / ((T-r)(1-eps^2)) + T L^2 gap_sup^2)) - 1), the bound on
/// |P_T f(x) - P_T f(y)| / ||f||_inf.
double tv_bound(double gap0, double gap_sup, double lipschitz, double r, double T, double epsilon);

/// Same bound with gap0 entering to the first power, kept for side-by-side reporting.
double tv_bound_unsquared_gap(double gap0, double gap_sup, double lipschitz, double r, double T, double epsilon);

/// Deadline s on the grid minimizing the s-dependent exponent, in (r, T].
double default_deadline(const SolverConfig& config, SegmentView x0, SegmentView y0);

/// E[D f(X_T)] over coupled paths started at (x0, y0). Since the coupling
/// closes by the deadline s <= T, f(X_T) = f(Y~_T).
McEstimate estimate_pTf_weighted(const SolverConfig& config, const Segment& x0, const Segment& y0,
                                 const CouplingConfig& coupling, const SegmentFunctional& f, const McOptions& mc);

/// Per-path D * f_j(X_T) for several functionals, indexed [functional][path].
std::vector<std::vector<double>> weighted_terminal_values(const SolverConfig& config, const Segment& x0,
                                                          const Segment& y0, const CouplingConfig& coupling,
                                                          std::span<const SegmentFunctional> functionals,
                                                          const McOptions& mc);

struct Interval {
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct HarnackParams {
    double p = 2.0;
    SolverConfig config;
    Functional f;
    Segment x0;
    Segment y0;
};

struct HarnackReport {
    double p = 0.0;
    std::string functional;
    double confidence = 0.99;
    Interval lhs;  ///< (P_T f(y))^p
    Interval rhs;  ///< P_T(f^p)(x) exp(p/(p-1) rho^2)
    double rho_sq = 0.0;
    double rho_sq_closed = 0.0;
    double s = 0.0;
    double epsilon = 0.0;
    /// p/(p-1) * (gap0^2/((s-r)(1-eps^2)) + s L^2 gap_sup^2) for the chosen s.
    double sharp_exponent = 0.0;
    Interval rhs_sharp;
    McEstimate direct_y;
    McEstimate direct_x_power;
    McEstimate weighted_y;
    bool cross_check_ok = false;
    bool pass = false;
};

/// Harnack check for every (p, f) pair from one set of runs: direct paths from
/// y0 and x0 and one set of coupled paths, all with the same master seed.
std::vector<HarnackReport> harnack_sweep(const SolverConfig& config, const Segment& x0, const Segment& y0,
                                         std::span<const double> ps, std::span<const Functional> functionals,
                                         const CouplingConfig& coupling, const McOptions& mc,
                                         double confidence = 0.99);

HarnackReport harnack_check(const HarnackParams& params, const CouplingConfig& coupling, const McOptions& mc,
                            double confidence = 0.99);

struct FellerRow {
    double delta = 0.0;
    std::string functional;
    McEstimate at_x;
    McEstimate at_y;
    double gap = 0.0;           ///< |P_T f(x) - P_T f(y)|
    double gap_std_error = 0.0;  ///< from common-random-number differences
    double bound = 0.0;          ///< ||f||_inf * tv_bound
    double bound_unsquared = 0.0;
    bool within_bound = false;   ///< gap <= bound + 3 * gap_std_error
};

/// For y = x0 + delta * direction, compares |P_T f(x0) - P_T f(y)| with the
/// total-variation bound. direction should have unit sup-norm.
std::vector<FellerRow> strong_feller_probe(const SolverConfig& config, const Segment& x0, const Segment& direction,
                                           std::span<const double> deltas, std::span<const Functional> functionals,
                                           const McOptions& mc, double epsilon);

}  // namespace sfde
