#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracsim {

/// Uniform time grid with points t0 + k*dt, k = 0..n_points-1.
struct TimeGrid {
    double t0 = 0.0;
    double dt = 0.0;
    std::size_t n_points = 0;

    TimeGrid() = default;

    TimeGrid(double start, double step, std::size_t points)
        : t0(start), dt(step), n_points(points) {
        if (!(dt > 0.0))
            throw std::invalid_argument("TimeGrid: dt must be positive, got " + std::to_string(dt));
        if (n_points < 1)
            throw std::invalid_argument("TimeGrid: n_points must be >= 1");
    }

    /// Grid covering [start, end] with step dt; end must be a near-integer
    /// multiple of dt away from start.
    static TimeGrid over(double start, double end, double dt) {
        if (!(dt > 0.0))
            throw std::invalid_argument("TimeGrid::over: dt must be positive");
        const double span = end - start;
        const double steps = span / dt;
        const auto n = static_cast<std::size_t>(steps + 0.5);
        if (n < 1 || std::abs(span - static_cast<double>(n) * dt) > 1e-9 * (1.0 + std::abs(span)))
            throw std::invalid_argument("TimeGrid::over: [start,end] is not a whole number of steps");
        return TimeGrid(start, dt, n + 1);
    }

    double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
    double t_end() const { return time(n_points - 1); }

    std::vector<double> times() const {
        std::vector<double> out(n_points);
        for (std::size_t k = 0; k < n_points; ++k) out[k] = time(k);
        return out;
    }

    bool same_layout(const TimeGrid& other) const {
        return t0 == other.t0 && dt == other.dt && n_points == other.n_points;
    }

    /// Index of a time value that must sit (within tolerance) on the grid.
    std::size_t index_of(double t, double tol = 1e-9) const {
        const double pos = (t - t0) / dt;
        const auto k = static_cast<std::size_t>(pos + 0.5);
        if (k >= n_points || std::abs(t - time(k)) > tol * (1.0 + std::abs(t)))
            throw std::invalid_argument("TimeGrid::index_of: t=" + std::to_string(t) + " is not a grid point");
        return k;
    }
};

}  // namespace fracsim
