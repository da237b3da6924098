#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracsim/solver.hpp"

namespace fracsim {

/// Deterministic control, piecewise constant in time on the knot partition
/// and supported on the first K modes.  Admissibility is the L^p-norm ball of
/// radius eta.
struct ControlParameterization {
    std::vector<double> knots;                // size n_intervals + 1, covers [0, ell]
    std::vector<std::vector<double>> values;  // [knot interval][mode]
    double eta = 0.0;
    double p = 2.0;

    std::size_t n_intervals() const { return values.size(); }
    std::size_t n_modes() const { return values.empty() ? 0 : values.front().size(); }

    void validate() const {
        if (knots.size() < 2) throw std::invalid_argument("control: need at least two knots");
        if (values.size() + 1 != knots.size())
            throw std::invalid_argument("control: values rows must match knot intervals");
        for (std::size_t j = 0; j + 1 < knots.size(); ++j)
            if (!(knots[j + 1] > knots[j]))
                throw std::invalid_argument("control: knots must be strictly increasing");
        const std::size_t k = n_modes();
        for (const auto& row : values) {
            if (row.size() != k)
                throw std::invalid_argument("control: ragged value rows");
            for (double v : row)
                if (!std::isfinite(v)) throw std::invalid_argument("control: non-finite value");
        }
        if (eta < 0.0) throw std::invalid_argument("control: eta must be >= 0");
    }

    /// (int_0^ell ||u(t)||^p dt)^{1/p}; exact for the piecewise-constant form.
    double lp_norm() const {
        double acc = 0.0;
        for (std::size_t j = 0; j < values.size(); ++j) {
            double nsq = 0.0;
            for (double v : values[j]) nsq += v * v;
            acc += (knots[j + 1] - knots[j]) * std::pow(nsq, p / 2.0);
        }
        return std::pow(acc, 1.0 / p);
    }

    /// Mode coefficients of u at time t.
    std::vector<double> at(double t) const {
        std::size_t j = 0;
        while (j + 1 < values.size() && t >= knots[j + 1]) ++j;
        return values[j];
    }
};

/// Radial projection onto the admissible ball: controls inside pass through
/// unchanged, outside they scale by eta/||u||.
inline ControlParameterization project_admissible(ControlParameterization u) {
    u.validate();
    const double norm = u.lp_norm();
    if (norm <= u.eta || norm == 0.0) return u;
    const double scale = u.eta / norm;
    for (auto& row : u.values)
        for (auto& v : row) v *= scale;
    return u;
}

/// Samples of Eu on the solver grid, [mode][k] over all n_modes state modes
/// (zero beyond the controlled modes).  The scalar gain is applied by the
/// solver itself.
inline std::vector<std::vector<double>> control_samples(const ControlParameterization& u,
                                                        const TimeGrid& grid, int n_modes) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(n_modes),
                                         std::vector<double>(grid.n_points, 0.0));
    if (u.values.empty()) return out;
    for (std::size_t k = 0; k < grid.n_points; ++k) {
        const auto vals = u.at(grid.time(k));
        for (std::size_t m = 0; m < vals.size() && m < out.size(); ++m) out[m][k] = vals[m];
    }
    return out;
}

/// Integrand weights and lower-bound data of the running cost
/// G(t, z, u) = state_weight ||z||^2 + control_weight ||u||^2.
struct CostSpec {
    double state_weight = 1.0;
    double control_weight = 1.0;
    double phi = 0.0;  // lower-bound offset
    double h1 = 1.0;   // state coefficient of the lower bound
    double h2 = 1.0;   // control coefficient of the lower bound (> 0)

    void validate() const {
        if (!(h2 > 0.0)) throw std::invalid_argument("CostSpec: h2 must be positive");
        if (h1 < 0.0) throw std::invalid_argument("CostSpec: h1 must be >= 0");
        if (state_weight < 0.0 || control_weight < 0.0)
            throw std::invalid_argument("CostSpec: weights must be >= 0");
    }
};

struct CostReport {
    double total = 0.0;
    double state_term = 0.0;
    double control_term = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    bool projected_input = false;  // the control had to be pulled back into the ball
};

/// Monte Carlo estimate of the quadratic cost under a given control: the
/// state term is the ensemble mean of the trapezoid integral of ||z(t)||^2
/// (coefficient norm, so the spatial integral is already folded in), the
/// control term is exact for the piecewise-constant parameterization.
inline CostReport evaluate_cost(const SpectralModel& model, const ImpulseSchedule& schedule,
                                const ResolventTable& table, const SolverTables& aux,
                                const CostSpec& cost, ControlParameterization u,
                                std::size_t n_paths, std::uint64_t seed,
                                const SolverOptions& options = {}) {
    cost.validate();
    u.validate();
    if (n_paths < 1) throw std::invalid_argument("evaluate_cost: n_paths must be >= 1");
    CostReport report;
    const double norm = u.lp_norm();
    if (norm > u.eta * (1.0 + 1e-12)) {
        u = project_admissible(std::move(u));
        report.projected_input = true;
    }
    const auto& grid = table.grid;
    const auto eu = control_samples(u, grid, model.n_modes);

    double mean = 0.0, m2 = 0.0;
    for (std::size_t path_index = 0; path_index < n_paths; ++path_index) {
        const auto path = sample_noise(model.noise, grid, seed, path_index,
                                       static_cast<std::size_t>(model.n_modes));
        const auto traj = picard_solve(model, schedule, eu, table, aux, path, options);
        double integral = 0.0;
        for (std::size_t k = 0; k + 1 < grid.n_points; ++k)
            integral += 0.5 * grid.dt * (traj.norm_sq_at(k) + traj.norm_sq_at(k + 1));
        const double count = static_cast<double>(path_index + 1);
        const double delta = integral - mean;
        mean += delta / count;
        m2 += delta * (integral - mean);
    }
    report.n_paths = n_paths;
    report.state_term = cost.state_weight * mean;
    double unorm = 0.0;
    for (std::size_t j = 0; j < u.values.size(); ++j) {
        double nsq = 0.0;
        for (double v : u.values[j]) nsq += v * v;
        unorm += (u.knots[j + 1] - u.knots[j]) * nsq;
    }
    report.control_term = cost.control_weight * unorm;
    report.total = report.state_term + report.control_term;
    if (n_paths > 1) {
        const double var = m2 / static_cast<double>(n_paths - 1);
        report.std_error = cost.state_weight * std::sqrt(var / static_cast<double>(n_paths));
    }
    return report;
}

struct OptimizeLogEntry {
    std::size_t evaluation = 0;  // cost evaluations consumed so far
    double cost = 0.0;
    double std_error = 0.0;
};

struct AcceptedMove {
    std::size_t interval = 0;
    std::size_t mode = 0;
    double direction = 0.0;  // signed step actually taken
    ControlParameterization from;
};

struct OptimizeResult {
    ControlParameterization best;
    CostReport report;
    std::vector<OptimizeLogEntry> log;  // accepted iterates, monotone nonincreasing
    std::vector<AcceptedMove> moves;
    std::size_t evaluations = 0;
    bool budget_exhausted = false;
};

struct OptimizeOptions {
    double initial_step = 0.25;
    double min_step = 1.0 / 32.0;
    std::size_t budget = 200;  // maximum cost evaluations
    std::size_t n_paths = 1;
    std::uint64_t seed = 0;  // common random numbers: every evaluation reuses it
};

/// Derivative-free coordinate descent over the control parameters with
/// shrinking steps and common random numbers.  Only strictly improving moves
/// are accepted, every candidate is projected into the admissible ball first,
/// and all cost evaluations share one seed so the minimizing sequence is a
/// deterministic function of the parameters.
inline OptimizeResult optimize(const SpectralModel& model, const ImpulseSchedule& schedule,
                               const ResolventTable& table, const SolverTables& aux,
                               const CostSpec& cost, ControlParameterization initial,
                               const OptimizeOptions& opt = {},
                               const SolverOptions& solver_options = {}) {
    if (opt.budget < 1) throw std::invalid_argument("optimize: budget must be >= 1");
    OptimizeResult result;
    result.best = project_admissible(std::move(initial));

    auto eval = [&](const ControlParameterization& u) {
        return evaluate_cost(model, schedule, table, aux, cost, u, opt.n_paths, opt.seed,
                             solver_options);
    };
    result.report = eval(result.best);
    result.evaluations = 1;
    result.log.push_back({result.evaluations, result.report.total, result.report.std_error});

    bool out_of_budget = false;
    for (double step = opt.initial_step; step >= opt.min_step && !out_of_budget; step *= 0.5) {
        bool improved = true;
        while (improved && !out_of_budget) {
            improved = false;
            for (std::size_t j = 0; j < result.best.n_intervals() && !out_of_budget; ++j) {
                for (std::size_t m = 0; m < result.best.n_modes() && !out_of_budget; ++m) {
                    for (double sign : {+1.0, -1.0}) {
                        if (result.evaluations >= opt.budget) {
                            out_of_budget = true;
                            break;
                        }
                        ControlParameterization candidate = result.best;
                        candidate.values[j][m] += sign * step;
                        candidate = project_admissible(std::move(candidate));
                        const auto rep = eval(candidate);
                        ++result.evaluations;
                        if (rep.total < result.report.total) {
                            result.moves.push_back({j, m, sign * step, result.best});
                            result.best = std::move(candidate);
                            result.report = rep;
                            result.log.push_back({result.evaluations, rep.total, rep.std_error});
                            improved = true;
                            break;  // re-probe this coordinate from the new point
                        }
                    }
                }
            }
        }
    }
    result.budget_exhausted = out_of_budget;
    return result;
}

/// Sample check of the structural cost hypotheses: convexity of G(t, z, .)
/// along random segments (midpoint inequality) and the lower bound
/// G >= phi + h1 ||z||^p + h2 ||u||^p with the stored constants.
struct CostHypothesesReport {
    std::size_t convexity_samples = 0;
    std::size_t convexity_violations = 0;
    double worst_convexity_defect = 0.0;  // min of avg - midpoint over samples
    std::size_t bound_samples = 0;
    std::size_t bound_violations = 0;
    bool ok() const { return convexity_violations == 0 && bound_violations == 0; }
};

inline CostHypothesesReport verify_c5(const CostSpec& cost, std::size_t n_samples = 1000,
                                      std::uint64_t seed = 0) {
    cost.validate();
    CostHypothesesReport rep;
    detail::NormalRng rng(detail::mix_stream(seed, 0));
    auto norm_sq = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return s;
    };
    auto running_cost = [&](const std::vector<double>& z, const std::vector<double>& u) {
        return cost.state_weight * norm_sq(z) + cost.control_weight * norm_sq(u);
    };
    const std::size_t dim = 4;
    rep.worst_convexity_defect = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_samples; ++i) {
        std::vector<double> z(dim), ua(dim), ub(dim), um(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            z[k] = rng.normal();
            ua[k] = rng.normal();
            ub[k] = rng.normal();
            um[k] = 0.5 * (ua[k] + ub[k]);
        }
        const double avg = 0.5 * (running_cost(z, ua) + running_cost(z, ub));
        const double mid = running_cost(z, um);
        const double defect = avg - mid;
        rep.worst_convexity_defect = std::min(rep.worst_convexity_defect, defect);
        ++rep.convexity_samples;
        if (defect < -1e-12) ++rep.convexity_violations;

        const double bound = cost.phi + cost.h1 * norm_sq(z) + cost.h2 * norm_sq(ua);
        ++rep.bound_samples;
        if (running_cost(z, ua) < bound - 1e-12) ++rep.bound_violations;
    }
    return rep;
}

}  // namespace fracsim
