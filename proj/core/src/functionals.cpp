// SPDX-License-Identifier: Apache-2.0
#include "sfde/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sfde/errors.hpp"

namespace sfde {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

Functional constant_functional(double c) {
    return {"constant(" + fmt(c) + ")", [c](SegmentView) { return c; }, std::abs(c), c >= 0.0};
}

Functional sigmoid_functional(double scale, double center) {
    return {"sigmoid(" + fmt(scale) + "," + fmt(center) + ")",
            [scale, center](SegmentView x) { return 0.5 * (1.0 + std::tanh(scale * (x.now()[0] - center))); }, 1.0,
            true};
}

Functional ball_indicator(double radius) {
    if (!(radius >= 0.0)) throw DomainError("ball_indicator: radius must be >= 0");
    return {"ball(" + fmt(radius) + ")", [radius](SegmentView x) { return sup_norm(x) <= radius ? 1.0 : 0.0; }, 1.0,
            true};
}

Functional clipped_integral(double lower, double upper) {
    if (!(upper > lower)) throw DomainError("clipped_integral: upper must exceed lower");
    return {"clipped_integral(" + fmt(lower) + "," + fmt(upper) + ")",
            [lower, upper](SegmentView x) {
                const auto& g = x.grid();
                const auto n = g.n_memory();
                const auto d = g.dimension();
                const auto data = x.data();
                double acc = 0.5 * (data[0] + data[n * d]);
                for (std::size_t k = 1; k < n; ++k) acc += data[k * d];
                return std::clamp(acc / static_cast<double>(n), lower, upper) - lower;
            },
            upper - lower, true};
}

Functional power(const Functional& f, double p) {
    if (!f.nonnegative) throw ContractError("power: functional must be nonnegative");
    return {f.name + "^" + fmt(p), [g = f.eval, p](SegmentView x) { return std::pow(g(x), p); },
            std::pow(f.sup_bound, p), true};
}

std::vector<Functional> default_functional_catalog() {
    return {sigmoid_functional(1.0, 0.0), ball_indicator(1.0), clipped_integral(-1.0, 1.0)};
}

}  // namespace sfde
