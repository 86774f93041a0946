// SPDX-License-Identifier: Apache-2.0
#include "sfde/drift.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sfde/errors.hpp"

namespace sfde {

namespace {

double apply_map(ScalarMap m, double u) noexcept {
    switch (m) {
        case ScalarMap::Identity: return u;
        case ScalarMap::Sin: return std::sin(u);
        case ScalarMap::Tanh: return std::tanh(u);
    }
    return u;
}

std::vector<double> random_in_ball(std::mt19937_64& rng, std::size_t d, double radius) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> v(d);
    double n = 0.0;
    do {
        for (auto& c : v) c = normal(rng);
        n = euclidean_norm(v);
    } while (n == 0.0);
    const double rad = radius * std::pow(unif(rng), 1.0 / static_cast<double>(d));
    for (auto& c : v) c *= rad / n;
    return v;
}

}  // namespace

DissipativeField DissipativeField::linear(double lambda0) {
    if (!(lambda0 >= 0.0) || !std::isfinite(lambda0)) throw DomainError("linear field: lambda0 must be >= 0");
    return {DissipativeKind::Linear, lambda0};
}

void DissipativeField::eval(std::span<const double> z, std::span<double> out) const noexcept {
    switch (kind_) {
        case DissipativeKind::Zero:
            std::fill(out.begin(), out.end(), 0.0);
            return;
        case DissipativeKind::Linear:
            for (std::size_t i = 0; i < z.size(); ++i) out[i] = -lambda0_ * z[i];
            return;
        case DissipativeKind::CubicDecay: {
            const double n2 = dot(z, z);
            for (std::size_t i = 0; i < z.size(); ++i) out[i] = -z[i] * n2;
            return;
        }
    }
}

MemoryFunctional MemoryFunctional::point_delay(ScalarMap map, double amplitude, double slope) {
    if (!std::isfinite(amplitude) || !std::isfinite(slope)) throw DomainError("point delay: non-finite parameter");
    return {MemoryKind::PointDelay, map, amplitude, slope};
}

MemoryFunctional MemoryFunctional::integral_delay(ScalarMap map, double amplitude, double slope) {
    if (!std::isfinite(amplitude) || !std::isfinite(slope)) throw DomainError("integral delay: non-finite parameter");
    return {MemoryKind::IntegralDelay, map, amplitude, slope};
}

MemoryFunctional MemoryFunctional::bounded(ScalarMap map, double bound, double slope) {
    if (map == ScalarMap::Identity) throw DomainError("bounded memory functional needs sin or tanh");
    if (!(bound >= 0.0) || !std::isfinite(bound)) throw DomainError("bounded memory functional: bound must be >= 0");
    if (!std::isfinite(slope)) throw DomainError("bounded memory functional: non-finite slope");
    return {MemoryKind::Bounded, map, bound, slope};
}

double MemoryFunctional::declared_lipschitz() const noexcept {
    if (kind_ == MemoryKind::Zero) return 0.0;
    return std::abs(amplitude_) * std::abs(slope_);
}

std::optional<double> MemoryFunctional::declared_bound() const noexcept {
    if (kind_ == MemoryKind::Zero) return 0.0;
    if (kind_ == MemoryKind::Bounded) return amplitude_;
    return std::nullopt;
}

void MemoryFunctional::eval(SegmentView x, std::span<double> out) const noexcept {
    const auto d = x.grid().dimension();
    switch (kind_) {
        case MemoryKind::Zero:
            std::fill(out.begin(), out.end(), 0.0);
            return;
        case MemoryKind::PointDelay: {
            const auto old = x.oldest();
            for (std::size_t i = 0; i < d; ++i) out[i] = amplitude_ * apply_map(map_, slope_ * old[i]);
            return;
        }
        case MemoryKind::IntegralDelay: {
            // (1/r) * trapezoid = (1/n) * (x_0/2 + x_1 + ... + x_{n-1} + x_n/2)
            const auto n = x.grid().n_memory();
            const auto data = x.data();
            for (std::size_t i = 0; i < d; ++i) {
                double acc = 0.5 * (data[i] + data[n * d + i]);
                for (std::size_t k = 1; k < n; ++k) acc += data[k * d + i];
                const double mean = acc / static_cast<double>(n);
                out[i] = amplitude_ * apply_map(map_, slope_ * mean);
            }
            return;
        }
        case MemoryKind::Bounded: {
            const auto old = x.oldest();
            const double rho = euclidean_norm(old);
            if (rho == 0.0) {
                std::fill(out.begin(), out.end(), 0.0);
                return;
            }
            const double scale = amplitude_ * apply_map(map_, slope_ * rho) / rho;
            for (std::size_t i = 0; i < d; ++i) out[i] = scale * old[i];
            return;
        }
    }
}

void eval_drift(const DriftSpec& spec, SegmentView x, std::span<double> out) {
    const auto d = x.grid().dimension();
    if (out.size() != d) throw IncompatibleGridError("eval_drift: output dimension differs from segment dimension");
    double z_buf[8];
    std::vector<double> z_heap;
    std::span<double> z;
    if (d <= 8) {
        z = std::span<double>(z_buf, d);
    } else {
        z_heap.resize(d);
        z = z_heap;
    }
    spec.dissipative.eval(x.now(), out);
    spec.memory.eval(x, z);
    for (std::size_t i = 0; i < d; ++i) out[i] += z[i];
}

std::vector<double> eval_drift(const DriftSpec& spec, SegmentView x) {
    std::vector<double> out(x.grid().dimension());
    eval_drift(spec, x, out);
    return out;
}

DissipativityVerdict check_dissipative(const VectorField& v, std::uint64_t samples, double radius,
                                       std::size_t dimension, std::uint64_t seed) {
    if (samples < 1) throw DomainError("check_dissipative: samples must be >= 1");
    std::mt19937_64 rng(seed);
    DissipativityVerdict verdict;
    verdict.worst_ratio = -std::numeric_limits<double>::infinity();
    std::vector<double> va(dimension), vb(dimension), diff(dimension), vdiff(dimension);
    for (std::uint64_t i = 0; i < samples; ++i) {
        auto a = random_in_ball(rng, dimension, radius);
        auto b = random_in_ball(rng, dimension, radius);
        v(a, va);
        v(b, vb);
        for (std::size_t j = 0; j < dimension; ++j) {
            diff[j] = a[j] - b[j];
            vdiff[j] = va[j] - vb[j];
        }
        const double scale = 1.0 + dot(diff, diff);
        const double ratio = dot(vdiff, diff) / scale;
        verdict.worst_ratio = std::max(verdict.worst_ratio, ratio);
        if (ratio > kDissipativityTolerance && verdict.pass) {
            verdict.pass = false;
            verdict.witness.emplace(std::move(a), std::move(b));
        }
    }
    return verdict;
}

DissipativityVerdict check_dissipative(const DissipativeField& v, std::uint64_t samples, double radius,
                                       std::size_t dimension, std::uint64_t seed) {
    return check_dissipative(VectorField([&v](std::span<const double> z, std::span<double> out) { v.eval(z, out); }),
                             samples, radius, dimension, seed);
}

double estimate_lipschitz(const MemoryFunctional& z, std::uint64_t samples, const TimeGrid& grid,
                          std::uint64_t seed) {
    if (samples < 2) throw DomainError("estimate_lipschitz: samples must be >= 2");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::uniform_real_distribution<double> log_scale(-6.0, 0.0);
    std::uniform_int_distribution<int> mode_pick(0, 2);

    const auto n = grid.points() * grid.dimension();
    const auto d = grid.dimension();
    std::vector<double> xv(n), yv(n), zx(d), zy(d), diff(d);
    double best = 0.0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        const double spread = 2.0 * std::pow(10.0, log_scale(rng) / 3.0);
        for (auto& c : xv) c = spread * unif(rng);
        const double h = std::pow(10.0, log_scale(rng));
        switch (mode_pick(rng)) {
            case 0:  // independent segment
                for (auto& c : yv) c = spread * unif(rng);
                break;
            case 1: {  // uniform shift
                std::vector<double> shift(d);
                for (auto& c : shift) c = h * unif(rng);
                for (std::size_t k = 0; k < n; ++k) yv[k] = xv[k] + shift[k % d];
                break;
            }
            default:  // local perturbation
                for (std::size_t k = 0; k < n; ++k) yv[k] = xv[k] + h * unif(rng);
                break;
        }
        const SegmentView xs(grid, xv);
        const SegmentView ys(grid, yv);
        const double denom = segment_distance(xs, ys).gap_sup;
        if (denom == 0.0) continue;
        z.eval(xs, zx);
        z.eval(ys, zy);
        for (std::size_t j = 0; j < d; ++j) diff[j] = zx[j] - zy[j];
        best = std::max(best, euclidean_norm(diff) / denom);
    }
    return best;
}

std::vector<CatalogEntry> drift_catalog() {
    return {
        {"ou", {DissipativeField::linear(1.0), MemoryFunctional::zero()}},
        {"linear-point-delay", {DissipativeField::linear(1.0), MemoryFunctional::point_delay(ScalarMap::Identity, 0.5)}},
        {"sin-point-delay", {DissipativeField::linear(1.0), MemoryFunctional::point_delay(ScalarMap::Sin, 0.5)}},
        {"tanh-integral-delay", {DissipativeField::linear(1.0), MemoryFunctional::integral_delay(ScalarMap::Tanh, 0.5)}},
        {"cubic-sin-delay", {DissipativeField::cubic_decay(), MemoryFunctional::point_delay(ScalarMap::Sin, 0.5)}},
        {"bounded-tanh", {DissipativeField::linear(5.0), MemoryFunctional::bounded(ScalarMap::Tanh, 1.0, 0.25)}},
        {"pure-delay", {DissipativeField::zero(), MemoryFunctional::point_delay(ScalarMap::Sin, 1.0)}},
    };
}

std::string_view to_string(DissipativeKind k) noexcept {
    switch (k) {
        case DissipativeKind::Zero: return "zero";
        case DissipativeKind::Linear: return "linear";
        case DissipativeKind::CubicDecay: return "cubic";
    }
    return "?";
}

std::string_view to_string(MemoryKind k) noexcept {
    switch (k) {
        case MemoryKind::Zero: return "zero";
        case MemoryKind::PointDelay: return "point_delay";
        case MemoryKind::IntegralDelay: return "integral_delay";
        case MemoryKind::Bounded: return "bounded";
    }
    return "?";
}

std::string_view to_string(ScalarMap m) noexcept {
    switch (m) {
        case ScalarMap::Identity: return "identity";
        case ScalarMap::Sin: return "sin";
        case ScalarMap::Tanh: return "tanh";
    }
    return "?";
}

std::optional<DissipativeKind> parse_dissipative_kind(std::string_view s) noexcept {
    for (auto k : {DissipativeKind::Zero, DissipativeKind::Linear, DissipativeKind::CubicDecay})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

std::optional<MemoryKind> parse_memory_kind(std::string_view s) noexcept {
    for (auto k : {MemoryKind::Zero, MemoryKind::PointDelay, MemoryKind::IntegralDelay, MemoryKind::Bounded})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

std::optional<ScalarMap> parse_scalar_map(std::string_view s) noexcept {
    for (auto m : {ScalarMap::Identity, ScalarMap::Sin, ScalarMap::Tanh})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

}  // namespace sfde
