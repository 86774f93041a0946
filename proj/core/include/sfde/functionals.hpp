// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "sfde/solver.hpp"

namespace sfde {

/// Bounded segment functional with a known sup bound.
struct Functional {
    std::string name;
    SegmentFunctional eval;
    double sup_bound = 1.0;  ///< ||f||_inf
    bool nonnegative = true;
};

/// f == c
Functional constant_functional(double c);

/// f(x) = (1 + tanh(scale * (x_1(0) - center))) / 2, values in (0, 1).
Functional sigmoid_functional(double scale = 1.0, double center = 0.0);

/// f(x) = 1{||x|| <= radius}; discontinuous.
Functional ball_indicator(double radius);

/// f(x) = clamp((1/r) int_{-r}^0 x_1(u) du, lower, upper) - lower, values in [0, upper - lower].
Functional clipped_integral(double lower, double upper);

/// f(x)^p for a nonnegative functional.
Functional power(const Functional& f, double p);

/// Smooth, discontinuous and path-integral functionals used by the experiments.
std::vector<Functional> default_functional_catalog();

}  // namespace sfde
