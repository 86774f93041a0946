// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace sfde {

/// Euclidean norm of a point in R^d.
double euclidean_norm(std::span<const double> v) noexcept;

/// Euclidean inner product; both spans must have the same length.
double dot(std::span<const double> a, std::span<const double> b) noexcept;

/// Uniform time grid shared by the memory window and the integrator.
///
/// The memory length is never stored: r is always n_memory * dt, so delay
/// lookups are exact index offsets.
class TimeGrid {
public:
    TimeGrid(double dt, std::size_t n_memory, std::size_t dimension);

    double dt() const noexcept { return dt_; }
    std::size_t n_memory() const noexcept { return n_memory_; }
    std::size_t dimension() const noexcept { return dimension_; }
    double memory_length() const noexcept { return static_cast<double>(n_memory_) * dt_; }

    /// Number of points stored per segment, n_memory + 1.
    std::size_t points() const noexcept { return n_memory_ + 1; }

    /// Index k with k*dt == t. Throws GridAlignmentError when t is off-grid
    /// and DomainError when t is negative.
    std::uint64_t steps_for(double t) const;

    bool is_aligned(double t) const noexcept;

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    double dt_;
    std::size_t n_memory_;
    std::size_t dimension_;
};

/// Non-owning view of a segment: n_memory + 1 points in R^d, row-major, row k
/// holding the value at time -r + k*dt.
class SegmentView {
public:
    SegmentView(const TimeGrid& grid, std::span<const double> data) noexcept
        : grid_(&grid), data_(data) {}

    const TimeGrid& grid() const noexcept { return *grid_; }
    std::span<const double> data() const noexcept { return data_; }

    std::span<const double> point(std::size_t k) const noexcept {
        const auto d = grid_->dimension();
        return data_.subspan(k * d, d);
    }
    /// x(0)
    std::span<const double> now() const noexcept { return point(grid_->n_memory()); }
    /// x(-r)
    std::span<const double> oldest() const noexcept { return point(0); }

private:
    const TimeGrid* grid_;
    std::span<const double> data_;
};

/// Owning segment of C([-r, 0]; R^d) sampled on the grid.
class Segment {
public:
    /// Takes (n_memory + 1) * d row-major values; all must be finite.
    Segment(TimeGrid grid, std::vector<double> values);

    static Segment constant(const TimeGrid& grid, std::span<const double> value);
    static Segment zero(const TimeGrid& grid);

    /// Samples a function of s in [-r, 0] at every grid point.
    static Segment sample(const TimeGrid& grid,
                          const std::function<void(double s, std::span<double> out)>& fn);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    SegmentView view() const noexcept { return {grid_, values_}; }
    operator SegmentView() const noexcept { return view(); }

    std::span<const double> point(std::size_t k) const noexcept { return view().point(k); }
    std::span<const double> now() const noexcept { return view().now(); }

    friend bool operator==(const Segment& a, const Segment& b) {
        return a.grid_ == b.grid_ && a.values_ == b.values_;
    }

private:
    TimeGrid grid_;
    std::vector<double> values_;
};

/// Growing path X on the grid, starting with a full initial segment.
///
/// Entry i holds the value at time start_time - r + i*dt. Single writer.
class TrajectoryHistory {
public:
    TrajectoryHistory(const Segment& initial, double start_time = 0.0);

    const TimeGrid& grid() const noexcept { return grid_; }
    double start_time() const noexcept { return start_time_; }

    /// Number of stored points (always at least n_memory + 1).
    std::size_t size() const noexcept { return values_.size() / grid_.dimension(); }

    /// Number of integration steps taken after the initial segment.
    std::uint64_t steps() const noexcept { return size() - grid_.points(); }

    void reserve_steps(std::uint64_t n);
    void append(std::span<const double> point);

    /// X(t_k) with t_k = start_time + k*dt.
    std::span<const double> at_step(std::uint64_t k) const;

    /// The segment X_{t_k}; k must not exceed steps().
    SegmentView window(std::uint64_t k) const;

    std::span<const double> raw() const noexcept { return values_; }

private:
    TimeGrid grid_;
    double start_time_;
    std::vector<double> values_;
};

/// Sup-norm over the grid points.
double sup_norm(SegmentView x) noexcept;

/// Copy of the segment X_t stored in the history.
Segment extract_segment(const TrajectoryHistory& history, double t);

struct SegmentGap {
    double gap0;     ///< |x(0) - y(0)|
    double gap_sup;  ///< ||x - y||
};

SegmentGap segment_distance(SegmentView x, SegmentView y);

}  // namespace sfde
