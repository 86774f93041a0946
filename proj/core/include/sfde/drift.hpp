// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sfde/segment.hpp"

namespace sfde {

enum class DissipativeKind { Zero, Linear, CubicDecay };

/// The instantaneous part v of the drift, acting on x(0).
///
/// Every shipped kind satisfies <v(a) - v(b), a - b> <= 0 and is locally
/// Lipschitz, which the explicit integrator relies on.
class DissipativeField {
public:
    static DissipativeField zero() { return DissipativeField(DissipativeKind::Zero, 0.0); }
    /// v(z) = -lambda0 z
    static DissipativeField linear(double lambda0);
    /// v(z) = -z |z|^2
    static DissipativeField cubic_decay() { return DissipativeField(DissipativeKind::CubicDecay, 0.0); }

    DissipativeKind kind() const noexcept { return kind_; }
    double lambda0() const noexcept { return lambda0_; }

    void eval(std::span<const double> z, std::span<double> out) const noexcept;

    friend bool operator==(const DissipativeField&, const DissipativeField&) = default;

private:
    DissipativeField(DissipativeKind kind, double lambda0) : kind_(kind), lambda0_(lambda0) {}

private:
    DissipativeKind kind_;
    double lambda0_;
};

/// Scalar nonlinearity used by memory functionals. All have Lipschitz constant 1.
enum class ScalarMap { Identity, Sin, Tanh };

enum class MemoryKind { Zero, PointDelay, IntegralDelay, Bounded };

/// The path-dependent part Z of the drift, globally Lipschitz in sup-norm.
///
///  - PointDelay:    Z(x) = A g(a x(-r))                 componentwise
///  - IntegralDelay: Z(x) = A g(a (1/r) int x(u) du)     componentwise, trapezoidal weights
///  - Bounded:       Z(x) = M g(a |x(-r)|) x(-r)/|x(-r)| radial, |Z| <= M
///
/// The declared Lipschitz constant is |A| * |a| (M * |a| for Bounded).
class MemoryFunctional {
public:
    static MemoryFunctional zero() { return MemoryFunctional(MemoryKind::Zero, ScalarMap::Identity, 0.0, 0.0); }
    static MemoryFunctional point_delay(ScalarMap map, double amplitude, double slope = 1.0);
    static MemoryFunctional integral_delay(ScalarMap map, double amplitude, double slope = 1.0);
    /// Requires a bounded map (Sin or Tanh) and bound >= 0.
    static MemoryFunctional bounded(ScalarMap map, double bound, double slope = 1.0);

    MemoryKind kind() const noexcept { return kind_; }
    ScalarMap map() const noexcept { return map_; }
    double amplitude() const noexcept { return amplitude_; }
    double slope() const noexcept { return slope_; }

    double declared_lipschitz() const noexcept;
    std::optional<double> declared_bound() const noexcept;

    void eval(SegmentView x, std::span<double> out) const noexcept;

    friend bool operator==(const MemoryFunctional&, const MemoryFunctional&) = default;

private:
    MemoryFunctional(MemoryKind kind, ScalarMap map, double amplitude, double slope)
        : kind_(kind), map_(map), amplitude_(amplitude), slope_(slope) {}

    MemoryKind kind_;
    ScalarMap map_;
    double amplitude_;
    double slope_;
};

/// V(x) = v(x(0)) + Z(x).
struct DriftSpec {
    DissipativeField dissipative = DissipativeField::zero();
    MemoryFunctional memory = MemoryFunctional::zero();

    double lipschitz() const noexcept { return memory.declared_lipschitz(); }

    friend bool operator==(const DriftSpec&, const DriftSpec&) = default;
};

/// Writes V(x) into out; out must have the segment's dimension.
void eval_drift(const DriftSpec& spec, SegmentView x, std::span<double> out);
std::vector<double> eval_drift(const DriftSpec& spec, SegmentView x);

struct DissipativityVerdict {
    bool pass = true;
    /// Largest observed <v(a)-v(b), a-b> / (1 + |a-b|^2).
    double worst_ratio = 0.0;
    std::optional<std::pair<std::vector<double>, std::vector<double>>> witness;
};

/// Tolerance on <v(a)-v(b), a-b> relative to (1 + |a-b|^2).
inline constexpr double kDissipativityTolerance = 1e-12;

/// Randomized test of <v(a) - v(b), a - b> <= 0 on pairs drawn uniformly in
/// the ball of the given radius.
DissipativityVerdict check_dissipative(const DissipativeField& v, std::uint64_t samples, double radius,
                                       std::size_t dimension = 1, std::uint64_t seed = 1);

/// Same check for an arbitrary vector field, e.g. one outside the catalog.
using VectorField = std::function<void(std::span<const double>, std::span<double>)>;
DissipativityVerdict check_dissipative(const VectorField& v, std::uint64_t samples, double radius,
                                       std::size_t dimension = 1, std::uint64_t seed = 1);

/// Largest observed |Z(x) - Z(y)| / ||x - y|| over random segment pairs.
double estimate_lipschitz(const MemoryFunctional& z, std::uint64_t samples, const TimeGrid& grid,
                          std::uint64_t seed = 1);

/// Named drifts used by the experiments and the structural checks.
struct CatalogEntry {
    std::string key;
    DriftSpec spec;
};

std::vector<CatalogEntry> drift_catalog();

std::string_view to_string(DissipativeKind k) noexcept;
std::string_view to_string(MemoryKind k) noexcept;
std::string_view to_string(ScalarMap m) noexcept;
std::optional<DissipativeKind> parse_dissipative_kind(std::string_view s) noexcept;
std::optional<MemoryKind> parse_memory_kind(std::string_view s) noexcept;
std::optional<ScalarMap> parse_scalar_map(std::string_view s) noexcept;

}  // namespace sfde
