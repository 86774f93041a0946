// SPDX-License-Identifier: Apache-2.0
#include "sfde/segment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sfde/errors.hpp"

namespace sfde {

double euclidean_norm(std::span<const double> v) noexcept {
    if (v.size() == 1) return std::abs(v[0]);
    double acc = 0.0;
    for (double c : v) acc += c * c;
    return std::sqrt(acc);
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

TimeGrid::TimeGrid(double dt, std::size_t n_memory, std::size_t dimension)
    : dt_(dt), n_memory_(n_memory), dimension_(dimension) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("time grid: dt must be finite and > 0");
    if (n_memory < 1) throw DomainError("time grid: n_memory must be >= 1");
    if (dimension < 1) throw DomainError("time grid: dimension must be >= 1");
}

bool TimeGrid::is_aligned(double t) const noexcept {
    if (!std::isfinite(t)) return false;
    const double k = std::round(t / dt_);
    return std::abs(k * dt_ - t) <= 1e-9 * dt_;
}

std::uint64_t TimeGrid::steps_for(double t) const {
    if (t < 0.0) throw DomainError("time grid: negative time");
    if (!is_aligned(t)) {
        std::ostringstream msg;
        msg << "time " << t << " is not a multiple of dt = " << dt_;
        throw GridAlignmentError(msg.str());
    }
    return static_cast<std::uint64_t>(std::llround(t / dt_));
}

Segment::Segment(TimeGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.points() * grid_.dimension())
        throw ContractError("segment: expected (n_memory + 1) * d values");
    if (!std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); }))
        throw ContractError("segment: non-finite value");
}

Segment Segment::constant(const TimeGrid& grid, std::span<const double> value) {
    if (value.size() != grid.dimension()) throw ContractError("segment: constant has wrong dimension");
    std::vector<double> v;
    v.reserve(grid.points() * grid.dimension());
    for (std::size_t k = 0; k < grid.points(); ++k) v.insert(v.end(), value.begin(), value.end());
    return {grid, std::move(v)};
}

Segment Segment::zero(const TimeGrid& grid) {
    return {grid, std::vector<double>(grid.points() * grid.dimension(), 0.0)};
}

Segment Segment::sample(const TimeGrid& grid,
                        const std::function<void(double, std::span<double>)>& fn) {
    const auto d = grid.dimension();
    std::vector<double> v(grid.points() * d);
    for (std::size_t k = 0; k < grid.points(); ++k) {
        const double s = -static_cast<double>(grid.n_memory() - k) * grid.dt();
        fn(s, std::span<double>(v).subspan(k * d, d));
    }
    return {grid, std::move(v)};
}

TrajectoryHistory::TrajectoryHistory(const Segment& initial, double start_time)
    : grid_(initial.grid()), start_time_(start_time),
      values_(initial.values().begin(), initial.values().end()) {}

void TrajectoryHistory::reserve_steps(std::uint64_t n) {
    values_.reserve(values_.size() + n * grid_.dimension());
}

void TrajectoryHistory::append(std::span<const double> point) {
    values_.insert(values_.end(), point.begin(), point.end());
}

std::span<const double> TrajectoryHistory::at_step(std::uint64_t k) const {
    if (k > steps()) throw OutOfRangeError("trajectory: step beyond stored history");
    const auto d = grid_.dimension();
    return std::span<const double>(values_).subspan((grid_.n_memory() + k) * d, d);
}

SegmentView TrajectoryHistory::window(std::uint64_t k) const {
    if (k > steps()) throw OutOfRangeError("trajectory: window beyond stored history");
    const auto d = grid_.dimension();
    return {grid_, std::span<const double>(values_).subspan(k * d, grid_.points() * d)};
}

double sup_norm(SegmentView x) noexcept {
    double m = 0.0;
    for (std::size_t k = 0; k < x.grid().points(); ++k) m = std::max(m, euclidean_norm(x.point(k)));
    return m;
}

Segment extract_segment(const TrajectoryHistory& history, double t) {
    const double rel = t - history.start_time();
    const auto& grid = history.grid();
    if (!grid.is_aligned(rel)) {
        std::ostringstream msg;
        msg << "extract_segment: t = " << t << " is not on the grid (dt = " << grid.dt() << ")";
        throw GridAlignmentError(msg.str());
    }
    if (rel < 0.0) throw OutOfRangeError("extract_segment: t precedes the initial segment");
    const auto k = static_cast<std::uint64_t>(std::llround(rel / grid.dt()));
    if (k > history.steps()) throw OutOfRangeError("extract_segment: history does not cover t");
    const auto w = history.window(k);
    return {grid, std::vector<double>(w.data().begin(), w.data().end())};
}

SegmentGap segment_distance(SegmentView x, SegmentView y) {
    if (!(x.grid() == y.grid())) throw IncompatibleGridError("segment_distance: grids differ");
    const auto d = x.grid().dimension();
    std::vector<double> diff(d);
    double sup = 0.0;
    double gap0 = 0.0;
    for (std::size_t k = 0; k < x.grid().points(); ++k) {
        const auto a = x.point(k);
        const auto b = y.point(k);
        for (std::size_t i = 0; i < d; ++i) diff[i] = a[i] - b[i];
        const double n = euclidean_norm(diff);
        sup = std::max(sup, n);
        if (k == x.grid().n_memory()) gap0 = n;
    }
    return {gap0, sup};
}

}  // namespace sfde
