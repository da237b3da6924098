#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "fracsim/impulse.hpp"
#include "fracsim/resolvent.hpp"
#include "fracsim/spectral_model.hpp"

namespace fracsim {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_stream(std::uint64_t seed, std::uint64_t path_index) {
    return splitmix64(splitmix64(seed) ^ (0x9e3779b97f4a7c15ull * (path_index + 1)));
}

/// Deterministic normal generator: mt19937_64 + Box-Muller, independent of
/// platform library distributions.
class NormalRng {
  public:
    explicit NormalRng(std::uint64_t stream) : eng_(stream) {}

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(th);
        have_cached_ = true;
        return r * std::cos(th);
    }

  private:
    double uniform01() {  // open interval (0,1)
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }
    std::mt19937_64 eng_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace detail

/// Gaussian increments dW[n][k] ~ N(0, variance_n dt) per noise mode and step,
/// reproducible from (seed, path_index).
struct NoisePath {
    TimeGrid grid;
    std::vector<std::vector<double>> increments;  // [mode][step], step count = n_points - 1
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
};

inline NoisePath sample_noise(const NoiseModel& noise, const TimeGrid& grid, std::uint64_t seed,
                              std::uint64_t path_index, std::size_t n_state_modes = 0) {
    noise.validate();
    const std::size_t n_modes = std::max(n_state_modes, noise.mode_variances.size());
    NoisePath path;
    path.grid = grid;
    path.seed = seed;
    path.path_index = path_index;
    path.increments.assign(n_modes, std::vector<double>(grid.n_points - 1, 0.0));
    detail::NormalRng rng(detail::mix_stream(seed, path_index));
    for (std::size_t n = 0; n < n_modes; ++n) {
        const double var = n < noise.mode_variances.size() ? noise.mode_variances[n] : 0.0;
        const double scale = std::sqrt(var * grid.dt);
        for (std::size_t k = 0; k + 1 < grid.n_points; ++k)
            path.increments[n][k] = scale * rng.normal();
    }
    return path;
}

struct IntervalSolveStats {
    IntervalRef interval;
    int picard_iterations = 0;
    double final_residual = 0.0;
    bool converged = true;
    std::vector<double> residual_history;
};

/// Sampled state path in the eigenbasis with interval tags and per-interval
/// fixed-point diagnostics.
struct Trajectory {
    TimeGrid grid;
    std::vector<std::vector<double>> coeffs;  // [mode][k]
    std::vector<IntervalRef> tags;            // [k]
    std::vector<IntervalSolveStats> stats;    // one per interval, in time order
    bool converged = true;

    double norm_sq_at(std::size_t k) const {
        double s = 0.0;
        for (const auto& row : coeffs) s += row[k] * row[k];
        return s;
    }
};

struct SolverOptions {
    double tol_picard = 1e-8;
    int max_iters = 50;
};

/// Auxiliary arrays derived from a resolvent table once per model:
/// the lower-order correction sum_i beta_i (k_{1+alpha-gamma_i} * S_n) and the
/// running integral of S_n, both on grid offsets.
struct SolverTables {
    std::vector<std::vector<double>> correction;  // [mode][offset]
    std::vector<std::vector<double>> integral_S;  // [mode][offset]
};

inline SolverTables make_solver_tables(const ResolventTable& table) {
    SolverTables st;
    const std::size_t n_modes = table.S.size();
    const auto& grid = table.grid;
    st.correction.assign(n_modes, std::vector<double>(grid.n_points, 0.0));
    st.integral_S.assign(n_modes, std::vector<double>(grid.n_points, 0.0));
    for (std::size_t n = 0; n < n_modes; ++n) {
        for (std::size_t i = 0; i < table.orders.n_terms(); ++i) {
            const double beta = table.orders.betas[i];
            const double rho = 1.0 + table.orders.alpha - table.orders.gammas[i];
            auto conv = convolve_kernel(grid, KernelOrder(rho), table.S[n]);
            for (std::size_t k = 0; k < grid.n_points; ++k)
                st.correction[n][k] += beta * conv[k];
        }
        for (std::size_t k = 1; k < grid.n_points; ++k)
            st.integral_S[n][k] = st.integral_S[n][k - 1] +
                                  0.5 * grid.dt * (table.S[n][k - 1] + table.S[n][k]);
    }
    return st;
}

/// One application of the mild-solution operator on flow interval q: all
/// convolutions are left-endpoint product sums against the tabulated J, the
/// restart terms use S, its running integral, and the lower-order correction.
class FlowSegmentSolver {
  public:
    FlowSegmentSolver(const SpectralModel& model, const ResolventTable& table,
                      const SolverTables& aux, const NoisePath& path,
                      const std::vector<std::vector<double>>& control_samples,
                      std::size_t base_idx, std::size_t last_idx,
                      std::vector<double> restart_position, std::vector<double> restart_velocity)
        : model_(model),
          table_(table),
          path_(path),
          base_idx_(base_idx),
          last_idx_(last_idx),
          c1_(std::move(restart_position)),
          c2_(std::move(restart_velocity)),
          g1_(resolve_nonlinearity(model.g1)),
          g2_(resolve_nonlinearity(model.g2)) {
        const std::size_t n_modes = static_cast<std::size_t>(model_.n_modes);
        const std::size_t len = last_idx_ - base_idx_;  // points strictly after e_q
        affine_.assign(n_modes, std::vector<double>(len, 0.0));
        for (std::size_t n = 0; n < n_modes; ++n) {
            for (std::size_t k = 1; k <= len; ++k) {
                double v = table_.S[n][k] * c1_[n] + aux.integral_S[n][k] * c2_[n] +
                           aux.correction[n][k] * c1_[n];
                if (!control_samples.empty()) {
                    double conv = 0.0;
                    for (std::size_t j = 0; j < k; ++j)
                        conv += table_.J[n][k - j] * control_samples[n][base_idx_ + j];
                    v += model_.e_gain * conv * table_.grid.dt;
                }
                affine_[n][k - 1] = v;
            }
        }
    }

    std::size_t base_index() const { return base_idx_; }
    std::size_t last_index() const { return last_idx_; }
    const std::vector<std::vector<double>>& affine() const { return affine_; }

    /// z_out[.][base+1 .. last] = (F z_in)(t); z_in supplies the nonlinearity
    /// arguments on [base, last-1] (left endpoints, the base value included).
    void apply(const std::vector<std::vector<double>>& z_in,
               std::vector<std::vector<double>>& z_out) const {
        const std::size_t n_modes = static_cast<std::size_t>(model_.n_modes);
        const std::size_t len = last_idx_ - base_idx_;
        const double dt = table_.grid.dt;
        // nonlinearity samples at the left endpoints
        std::vector<std::vector<double>> f(n_modes, std::vector<double>(len, 0.0));
        std::vector<double> state(n_modes);
        for (std::size_t j = 0; j < len; ++j) {
            const std::size_t idx = base_idx_ + j;
            const double t = table_.grid.time(idx);
            for (std::size_t n = 0; n < n_modes; ++n) state[n] = z_in[n][idx];
            const auto drift = apply_nonlinearity(g1_, t, state);
            const auto noise = apply_noise_map(g2_, t, state);
            for (std::size_t n = 0; n < n_modes; ++n)
                f[n][j] = drift[n] * dt + noise[n] * path_.increments[n][idx];
        }
        for (std::size_t n = 0; n < n_modes; ++n) {
            const auto& J = table_.J[n];
            const auto& fn = f[n];
            for (std::size_t k = 1; k <= len; ++k) {
                double conv = 0.0;
                for (std::size_t j = 0; j < k; ++j) conv += J[k - j] * fn[j];
                z_out[n][base_idx_ + k] = affine_[n][k - 1] + conv;
            }
        }
    }

  private:
    const SpectralModel& model_;
    const ResolventTable& table_;
    const NoisePath& path_;
    std::size_t base_idx_, last_idx_;
    std::vector<double> c1_, c2_;
    NonlinearityEntry g1_, g2_;
    std::vector<std::vector<double>> affine_;  // [mode][local k-1]
};

/// Interval-by-interval mild-solution solve: impulse windows are assigned
/// exactly from the impulse maps, flow intervals run Picard iteration from
/// the affine part until the sup-norm update drops below tol_picard.
inline Trajectory picard_solve(const SpectralModel& model, const ImpulseSchedule& schedule,
                               const std::vector<std::vector<double>>& control_samples,
                               const ResolventTable& table, const SolverTables& aux,
                               const NoisePath& path, const SolverOptions& options = {}) {
    model.validate();
    schedule.validate();
    const auto& grid = table.grid;
    if (!grid.same_layout(path.grid))
        throw std::invalid_argument("picard_solve: noise path grid differs from the table grid");
    if (table.S.size() != static_cast<std::size_t>(model.n_modes))
        throw std::invalid_argument("picard_solve: resolvent table does not cover the model modes");
    if (std::abs(grid.t_end() - schedule.ell) > 1e-9)
        throw std::invalid_argument("picard_solve: grid horizon differs from the schedule horizon");
    const std::size_t n_modes = static_cast<std::size_t>(model.n_modes);

    Trajectory traj;
    traj.grid = grid;
    traj.coeffs.assign(n_modes, std::vector<double>(grid.n_points, 0.0));
    traj.tags.resize(grid.n_points);

    std::vector<double> z_prev_at_tq;  // z(t_q^-) for the current window

    auto solve_flow = [&](std::size_t q, std::size_t base_idx, std::size_t last_idx,
                          std::vector<double> c1, std::vector<double> c2) {
        for (std::size_t k = base_idx + 1; k <= last_idx; ++k)
            traj.tags[k] = {IntervalKind::flow, q};
        FlowSegmentSolver segment(model, table, aux, path, control_samples, base_idx, last_idx,
                                  std::move(c1), std::move(c2));
        IntervalSolveStats stats;
        stats.interval = {IntervalKind::flow, q};
        std::vector<std::vector<double>> next = traj.coeffs;
        // initial guess: the affine part (exact fixed point when g1 = g2 = 0)
        for (std::size_t n = 0; n < n_modes; ++n)
            for (std::size_t k = base_idx + 1; k <= last_idx; ++k)
                traj.coeffs[n][k] = segment.affine()[n][k - base_idx - 1];
        bool ok = false;
        for (int iter = 1; iter <= options.max_iters; ++iter) {
            segment.apply(traj.coeffs, next);
            double residual = 0.0;
            for (std::size_t k = base_idx + 1; k <= last_idx; ++k) {
                double d2 = 0.0;
                for (std::size_t n = 0; n < n_modes; ++n) {
                    const double d = next[n][k] - traj.coeffs[n][k];
                    d2 += d * d;
                }
                residual = std::max(residual, std::sqrt(d2));
            }
            for (std::size_t n = 0; n < n_modes; ++n)
                for (std::size_t k = base_idx + 1; k <= last_idx; ++k)
                    traj.coeffs[n][k] = next[n][k];
            stats.picard_iterations = iter;
            stats.final_residual = residual;
            stats.residual_history.push_back(residual);
            if (residual < options.tol_picard) {
                ok = true;
                break;
            }
        }
        stats.converged = ok;
        traj.converged = traj.converged && ok;
        traj.stats.push_back(std::move(stats));
    };

    // first flow interval [0, t_1]
    {
        auto z0 = initial_coefficients(model.z0, model.n_modes);
        auto z1 = initial_coefficients(model.z1, model.n_modes);
        for (std::size_t n = 0; n < n_modes; ++n) traj.coeffs[n][0] = z0[n];
        traj.tags[0] = {IntervalKind::flow, 0};
        const std::size_t last = grid.index_of(schedule.flow_end(0));
        solve_flow(0, 0, last, std::move(z0), std::move(z1));
    }

    for (std::size_t q = 1; q <= schedule.r(); ++q) {
        const auto& ph = schedule.phases[q - 1];
        const std::size_t i_tq = grid.index_of(ph.t_q);
        const std::size_t i_eq = grid.index_of(ph.e_q);
        z_prev_at_tq.resize(n_modes);
        for (std::size_t n = 0; n < n_modes; ++n) z_prev_at_tq[n] = traj.coeffs[n][i_tq];

        const auto vs = resolve_impulse_map(ph.varsigma);
        IntervalSolveStats imp_stats;
        imp_stats.interval = {IntervalKind::impulse, q};
        std::vector<double> mapped(n_modes);
        for (std::size_t k = i_tq + 1; k <= i_eq; ++k) {
            traj.tags[k] = {IntervalKind::impulse, q};
            vs.apply(grid.time(k), z_prev_at_tq, mapped);
            for (std::size_t n = 0; n < n_modes; ++n) traj.coeffs[n][k] = mapped[n];
        }
        traj.stats.push_back(std::move(imp_stats));

        // flow restart data evaluated at the window exit time e_q
        const auto vp = resolve_impulse_map(ph.varphi);
        std::vector<double> c1(n_modes), c2(n_modes);
        vs.apply(ph.e_q, z_prev_at_tq, c1);
        vp.apply(ph.e_q, z_prev_at_tq, c2);
        const std::size_t last = grid.index_of(schedule.flow_end(q));
        solve_flow(q, i_eq, last, std::move(c1), std::move(c2));
    }
    return traj;
}

/// Monte Carlo moment estimates m_p(t) = E ||z(t)||^p with standard errors.
struct TrajectoryEnsemble {
    TimeGrid grid;
    std::size_t n_paths = 0;
    double p = 2.0;
    std::vector<double> moment;     // m_p(t_k)
    std::vector<double> std_error;  // per time point
    double sup_moment = 0.0;
    std::size_t n_failed = 0;
};

inline TrajectoryEnsemble simulate_ensemble(const SpectralModel& model,
                                            const ImpulseSchedule& schedule,
                                            const std::vector<std::vector<double>>& control_samples,
                                            const ResolventTable& table, const SolverTables& aux,
                                            std::size_t n_paths, std::uint64_t seed,
                                            const SolverOptions& options = {}) {
    if (n_paths < 1) throw std::invalid_argument("simulate_ensemble: n_paths must be >= 1");
    const auto& grid = table.grid;
    TrajectoryEnsemble ens;
    ens.grid = grid;
    ens.n_paths = n_paths;
    ens.p = model.p;
    ens.moment.assign(grid.n_points, 0.0);
    ens.std_error.assign(grid.n_points, 0.0);
    // Welford accumulation in path order keeps the reduction deterministic.
    std::vector<double> mean(grid.n_points, 0.0), m2(grid.n_points, 0.0);
    for (std::size_t path_index = 0; path_index < n_paths; ++path_index) {
        const auto path = sample_noise(model.noise, grid, seed, path_index,
                                       static_cast<std::size_t>(model.n_modes));
        const auto traj = picard_solve(model, schedule, control_samples, table, aux, path, options);
        if (!traj.converged) ++ens.n_failed;
        const double count = static_cast<double>(path_index + 1);
        for (std::size_t k = 0; k < grid.n_points; ++k) {
            const double nsq = traj.norm_sq_at(k);
            const double value = model.p == 2.0 ? nsq : std::pow(nsq, model.p / 2.0);
            const double delta = value - mean[k];
            mean[k] += delta / count;
            m2[k] += delta * (value - mean[k]);
        }
    }
    if (100 * ens.n_failed > n_paths)
        throw std::runtime_error("simulate_ensemble: more than 1% of paths failed to converge (" +
                                 std::to_string(ens.n_failed) + "/" + std::to_string(n_paths) + ")");
    for (std::size_t k = 0; k < grid.n_points; ++k) {
        ens.moment[k] = mean[k];
        if (n_paths > 1) {
            const double var = m2[k] / static_cast<double>(n_paths - 1);
            ens.std_error[k] = std::sqrt(var / static_cast<double>(n_paths));
        }
        ens.sup_moment = std::max(ens.sup_moment, ens.moment[k]);
    }
    return ens;
}

}  // namespace fracsim
