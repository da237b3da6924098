#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "fracsim/special_functions.hpp"
#include "fracsim/time_grid.hpp"

namespace fracsim {

/// Positive fractional-integration order rho of the power kernel t^{rho-1}/Gamma(rho).
struct KernelOrder {
    double rho;
    explicit KernelOrder(double r) : rho(r) {
        if (!(rho > 0.0))
            throw std::invalid_argument("KernelOrder: rho must be positive, got " + std::to_string(r));
    }
};

/// Power kernel: 0 for t <= 0, t^{rho-1}/Gamma(rho) for t > 0.
inline double rl_kernel(KernelOrder order, double t) {
    if (t <= 0.0) return 0.0;
    return std::pow(t, order.rho - 1.0) / gamma_fn(order.rho);
}

namespace detail {

inline void require_conv_grid(const TimeGrid& grid, std::size_t f_size, std::size_t g_size) {
    if (grid.t0 != 0.0)
        throw std::invalid_argument("convolve: grid must start at t0 = 0");
    if (f_size != grid.n_points || g_size != grid.n_points)
        throw std::invalid_argument("convolve: sample length does not match the grid");
}

// Exact moments of the power kernel over [b, a] with 0 <= b < a:
//   I0 = int k_rho(tau) dtau,  I1 = int tau k_rho(tau) dtau.
struct KernelMoments {
    double i0, i1;
};

inline KernelMoments kernel_moments(double rho, double b, double a, double inv_gamma_rho1,
                                    double inv_gamma_rho) {
    KernelMoments m;
    m.i0 = (std::pow(a, rho) - std::pow(b, rho)) * inv_gamma_rho1;
    m.i1 = (std::pow(a, rho + 1.0) - std::pow(b, rho + 1.0)) / (rho + 1.0) * inv_gamma_rho;
    return m;
}

}  // namespace detail

/// Per-lag weights for the product-integration convolution
///   (k_rho * g)(t_k) = sum_j [ w_left(k-j) g_j + w_right(k-j) g_{j+1} ],
/// exact for piecewise-linear g.  Index m = 1..n_lags.
struct ConvolutionWeights {
    double rho = 0.0;
    double dt = 0.0;
    std::vector<double> w_left, w_right;  // [m-1] holds lag m
};

inline ConvolutionWeights make_convolution_weights(KernelOrder order, double dt,
                                                   std::size_t n_lags) {
    ConvolutionWeights w;
    w.rho = order.rho;
    w.dt = dt;
    w.w_left.resize(n_lags);
    w.w_right.resize(n_lags);
    const double inv_g1 = 1.0 / gamma_fn(order.rho + 1.0);
    const double inv_g = 1.0 / gamma_fn(order.rho);
    for (std::size_t m = 1; m <= n_lags; ++m) {
        const double tau_b = static_cast<double>(m - 1) * dt;
        const double tau_a = static_cast<double>(m) * dt;
        const auto mm = detail::kernel_moments(order.rho, tau_b, tau_a, inv_g1, inv_g);
        // g linear on the panel: g(s) = g_j (tau - tau_b)/dt + g_{j+1} (tau_a - tau)/dt
        w.w_left[m - 1] = (mm.i1 - tau_b * mm.i0) / dt;
        w.w_right[m - 1] = (tau_a * mm.i0 - mm.i1) / dt;
    }
    return w;
}

/// Weakly-singular product integration of (k_rho * g) on the grid, g sampled,
/// g approximated piecewise-linear, kernel integrated exactly per panel.
inline std::vector<double> convolve_kernel(const TimeGrid& grid, KernelOrder order,
                                           std::span<const double> g) {
    detail::require_conv_grid(grid, grid.n_points, g.size());
    const auto w = make_convolution_weights(order, grid.dt, grid.n_points - 1);
    std::vector<double> out(grid.n_points, 0.0);
    for (std::size_t k = 1; k < grid.n_points; ++k) {
        double acc = 0.0;
        for (std::size_t m = 1; m <= k; ++m)
            acc += w.w_left[m - 1] * g[k - m] + w.w_right[m - 1] * g[k - m + 1];
        out[k] = acc;
    }
    return out;
}

/// Convolution of two sampled functions, both taken piecewise-linear; the
/// panel integrals of the product of the two linear interpolants are exact.
inline std::vector<double> convolve(const TimeGrid& grid, std::span<const double> f,
                                    std::span<const double> g) {
    detail::require_conv_grid(grid, f.size(), g.size());
    const double dt = grid.dt;
    std::vector<double> out(grid.n_points, 0.0);
    for (std::size_t k = 1; k < grid.n_points; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double ga = g[j], gb = g[j + 1];
            const double fb = f[k - j - 1], fa = f[k - j];
            // on the panel f runs fa -> fb while g runs ga -> gb
            acc += fa * ga / 3.0 + (fa * gb + fb * ga) / 6.0 + fb * gb / 3.0;
        }
        out[k] = acc * dt;
    }
    return out;
}

/// Convolution of two power kernels k_p * k_q evaluated on the grid by a
/// symmetric split at t/2: on each half the singular factor is integrated
/// exactly and the other (there smooth) factor is linearized per panel.
inline std::vector<double> convolve_kernels(const TimeGrid& grid, KernelOrder p, KernelOrder q) {
    if (grid.t0 != 0.0)
        throw std::invalid_argument("convolve_kernels: grid must start at t0 = 0");
    std::vector<double> out(grid.n_points, 0.0);
    const double inv_gp1 = 1.0 / gamma_fn(p.rho + 1.0);
    const double inv_gp = 1.0 / gamma_fn(p.rho);
    const double inv_gq1 = 1.0 / gamma_fn(q.rho + 1.0);
    const double inv_gq = 1.0 / gamma_fn(q.rho);
    for (std::size_t k = 1; k < grid.n_points; ++k) {
        const double t = grid.time(k);
        const double half = 0.5 * t;
        const std::size_t panels = std::max<std::size_t>(k, 2);
        const double h = half / static_cast<double>(panels);
        double acc = 0.0;
        for (std::size_t j = 0; j < panels; ++j) {
            const double a = static_cast<double>(j) * h;
            const double b = a + h;
            // int_a^b k_q(s) k_p(t-s) ds, k_p factor linearized
            {
                const double fa = rl_kernel(p, t - a), fb = rl_kernel(p, t - b);
                const auto m = detail::kernel_moments(q.rho, a, b, inv_gq1, inv_gq);
                acc += fa * ((b * m.i0 - m.i1) / h) + fb * ((m.i1 - a * m.i0) / h);
            }
            // int_a^b k_p(s) k_q(t-s) ds, k_q factor linearized
            {
                const double fa = rl_kernel(q, t - a), fb = rl_kernel(q, t - b);
                const auto m = detail::kernel_moments(p.rho, a, b, inv_gp1, inv_gp);
                acc += fa * ((b * m.i0 - m.i1) / h) + fb * ((m.i1 - a * m.i0) / h);
            }
        }
        out[k] = acc;
    }
    return out;
}

/// L1-scheme Caputo derivative of order rho in [0, 1), a test oracle.
/// rho = 0 returns f unchanged.
inline std::vector<double> caputo_derivative(const TimeGrid& grid, std::span<const double> f,
                                             double rho) {
    detail::require_conv_grid(grid, f.size(), f.size());
    if (rho < 0.0 || rho >= 1.0)
        throw std::invalid_argument("caputo_derivative: order must lie in [0,1)");
    if (rho == 0.0) return std::vector<double>(f.begin(), f.end());
    const double dt = grid.dt;
    const double inv_g2r = 1.0 / gamma_fn(2.0 - rho);
    // b[m-1] = int over one panel at lag m of k_{1-rho}
    std::vector<double> b(grid.n_points - 1);
    for (std::size_t m = 1; m < grid.n_points; ++m)
        b[m - 1] = (std::pow(static_cast<double>(m) * dt, 1.0 - rho) -
                    std::pow(static_cast<double>(m - 1) * dt, 1.0 - rho)) *
                   inv_g2r;
    std::vector<double> out(grid.n_points, 0.0);
    for (std::size_t k = 1; k < grid.n_points; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < k; ++j) acc += b[k - 1 - j] * (f[j + 1] - f[j]);
        out[k] = acc / dt;
    }
    return out;
}

}  // namespace fracsim
