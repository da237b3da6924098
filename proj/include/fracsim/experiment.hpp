#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "fracsim/config.hpp"
#include "fracsim/io.hpp"

namespace fracsim {

/// Canned configuration reproducing the first worked example: wave-type
/// diffusion on [0, pi] with one impulse window (0.20, 0.90], a saturating
/// drift, an exponentially damped multiplicative noise map, and a quadratic
/// state-plus-control cost.  Shipped verbatim as configs/example61.cfg.
inline const char* example61_config_text() {
    return R"({
  "model": {
    "n_modes": 8,
    "p": 2.0,
    "orders": {"alpha": 0.5, "gammas": [], "betas": []},
    "g1": {"name": "saturating", "params": {"amplitude": 1.0, "rate": 3.0, "offset": 2.0}},
    "g2": {"name": "exp_scale", "params": {"amplitude": 23.140692632779267, "rate": 4.0}},
    "initial_position": {"name": "parabola"},
    "initial_velocity": {"name": "zero"},
    "noise_variances": [2e-05, 5e-06, 2.2222222222222221e-06, 1.25e-06,
                        8.0000000000000007e-07, 5.5555555555555552e-07,
                        4.0816326530612243e-07, 3.125e-07],
    "e_gain": 1.0
  },
  "schedule": {
    "end_time": 1.0,
    "impulses": [
      {"t": 0.2, "e": 0.9,
       "varsigma": {"name": "scaled_sin", "params": {"amplitude": 0.25}},
       "varphi": {"name": "scaled_sin", "params": {"amplitude": 0.33333333333333331}}}
    ]
  },
  "grid": {"dt": 0.0025},
  "solver": {"tol_picard": 1e-08, "max_iters": 50},
  "mc": {"n_paths": 2000, "seed": 7},
  "control": {
    "knots": [0.0, 0.25, 0.5, 0.75, 1.0],
    "n_modes": 2,
    "eta": 0.5,
    "optimizer": {"initial_step": 0.25, "min_step": 0.03125, "budget": 96, "n_paths": 16}
  },
  "cost": {"state_weight": 1.0, "control_weight": 1.0, "phi": 0.0, "h1": 1.0, "h2": 1.0},
  "outputs": {"trajectory": true, "ensemble": true, "resolvent_table": true, "constants": true}
}
)";
}

/// Canned configuration for the second worked example: four-term fractional
/// orders (1.2; 0.6, 0.4, 0.3), cosine impulse maps on (0.40, 0.80], a linear
/// decaying drift, and a bounded shifted-saturating noise map.  Shipped
/// verbatim as configs/example62.cfg.
inline const char* example62_config_text() {
    return R"({
  "model": {
    "n_modes": 8,
    "p": 2.0,
    "orders": {"alpha": 0.2, "gammas": [0.6, 0.4, 0.3], "betas": [1.0, 5.0, 8.0]},
    "g1": {"name": "linear_decay", "params": {"amplitude": 0.33333333333333331, "rate": 1.0}},
    "g2": {"name": "shifted_saturating",
           "params": {"shift": 2.0, "amplitude": 1.0, "rate": 3.1415926535897931}},
    "initial_position": {"name": "zero"},
    "initial_velocity": {"name": "x_plus_2"},
    "noise_variances": [0.0001, 2.5e-05, 1.1111111111111112e-05, 6.25e-06,
                        4.0000000000000003e-06, 2.7777777777777775e-06,
                        2.0408163265306121e-06, 1.5625e-06],
    "e_gain": 1.0
  },
  "schedule": {
    "end_time": 1.0,
    "impulses": [
      {"t": 0.4, "e": 0.8,
       "varsigma": {"name": "scaled_cos", "params": {"amplitude": 1.0}},
       "varphi": {"name": "scaled_cos", "params": {"amplitude": 0.1111111111111111}}}
    ]
  },
  "grid": {"dt": 0.0025},
  "solver": {"tol_picard": 1e-08, "max_iters": 50},
  "mc": {"n_paths": 400, "seed": 11},
  "control": {
    "knots": [0.0, 0.25, 0.5, 0.75, 1.0],
    "n_modes": 2,
    "eta": 0.5,
    "optimizer": {"initial_step": 0.25, "min_step": 0.0625, "budget": 64, "n_paths": 8}
  },
  "cost": {"state_weight": 1.0, "control_weight": 1.0, "phi": 0.0, "h1": 1.0, "h2": 1.0},
  "outputs": {"trajectory": true, "ensemble": true, "resolvent_table": true, "constants": true}
}
)";
}

/// Grid, resolvent table, and solver auxiliaries realized from a config.
struct Realization {
    TimeGrid grid;
    ResolventTable table;
    SolverTables aux;
};

inline Realization realize(const RunConfig& cfg) {
    Realization r;
    r.grid = cfg.grid();
    r.table = build_resolvent_table(cfg.model.orders, cfg.model.eigenvalues(), r.grid);
    r.aux = make_solver_tables(r.table);
    return r;
}

namespace detail {

inline void emit_check_hypotheses(const RunConfig& cfg, const Realization& real,
                                  const std::filesystem::path& out_dir) {
    const auto u = project_admissible(cfg.control);
    const auto data = build_hypothesis_data(cfg.model, cfg.schedule, real.table, u.lp_norm());
    const auto rep = apriori_bound_delta(data);
    write_constants_report(out_dir / "constants_report.txt", out_dir / "constants_report.csv",
                           rep, data);
}

inline void emit_simulate(const RunConfig& cfg, const Realization& real,
                          const std::filesystem::path& out_dir, std::uint64_t seed) {
    const auto u = project_admissible(cfg.control);
    const auto eu = control_samples(u, real.grid, cfg.model.n_modes);
    if (cfg.outputs.trajectory) {
        const auto path = sample_noise(cfg.model.noise, real.grid, seed, 0,
                                       static_cast<std::size_t>(cfg.model.n_modes));
        const auto traj =
            picard_solve(cfg.model, cfg.schedule, eu, real.table, real.aux, path, cfg.solver);
        write_trajectory_csv(out_dir / "trajectory_path0.csv", traj);
    }
    if (cfg.outputs.ensemble) {
        const auto ens = simulate_ensemble(cfg.model, cfg.schedule, eu, real.table, real.aux,
                                           cfg.n_paths, seed, cfg.solver);
        write_ensemble_csv(out_dir / "ensemble.csv", ens);
    }
}

inline void emit_optimize(const RunConfig& cfg, const Realization& real,
                          const std::filesystem::path& out_dir, std::uint64_t seed) {
    OptimizeOptions opt = cfg.optimizer;
    opt.seed = seed;
    const auto res = optimize(cfg.model, cfg.schedule, real.table, real.aux, cfg.cost, cfg.control,
                              opt, cfg.solver);
    write_minimizing_sequence_csv(out_dir / "minimizing_sequence.csv", res.log);
    write_control_csv(out_dir / "best_control.csv", res.best);
    write_cost_report(out_dir / "cost_report.txt", res.report);
}

}  // namespace detail

/// Run one subcommand against a parsed configuration.  Returns the process
/// exit status; failures leave a machine-readable error.json in the output
/// directory.
inline int run_experiment(const RunConfig& cfg, const std::string& subcommand,
                          const std::filesystem::path& out_dir,
                          std::optional<std::uint64_t> seed_override = {}) {
    const std::uint64_t seed = seed_override.value_or(cfg.seed);
    try {
        std::filesystem::create_directories(out_dir);
        write_manifest(out_dir / "manifest.txt", cfg.raw_text, seed, subcommand);
        const auto real = realize(cfg);
        if (subcommand == "check-hypotheses") {
            detail::emit_check_hypotheses(cfg, real, out_dir);
        } else if (subcommand == "resolvent") {
            write_resolvent_csv(out_dir / "resolvent_table.csv", real.table);
        } else if (subcommand == "simulate") {
            detail::emit_simulate(cfg, real, out_dir, seed);
        } else if (subcommand == "optimize") {
            detail::emit_optimize(cfg, real, out_dir, seed);
        } else if (subcommand == "reproduce-example61" || subcommand == "reproduce-example62") {
            detail::emit_check_hypotheses(cfg, real, out_dir);
            if (cfg.outputs.resolvent_table)
                write_resolvent_csv(out_dir / "resolvent_table.csv", real.table);
            detail::emit_simulate(cfg, real, out_dir, seed);
            detail::emit_optimize(cfg, real, out_dir, seed);
        } else {
            throw std::invalid_argument("unknown subcommand: " + subcommand);
        }
    } catch (const std::exception& e) {
        write_error_record(out_dir, subcommand, e.what());
        return 1;
    }
    return 0;
}

/// Convenience wrapper: parse config text, report validation errors, run.
inline int run_experiment_text(const std::string& config_text, const std::string& subcommand,
                               const std::filesystem::path& out_dir,
                               std::optional<std::uint64_t> seed_override,
                               std::string& error_out) {
    auto parsed = parse_config(config_text);
    if (!parsed.ok()) {
        std::ostringstream os;
        os << "configuration invalid:\n";
        for (const auto& e : parsed.errors) os << "  " << e << "\n";
        error_out = os.str();
        std::filesystem::create_directories(out_dir);
        write_error_record(out_dir, subcommand, error_out);
        return 2;
    }
    return run_experiment(*parsed.config, subcommand, out_dir, seed_override);
}

}  // namespace fracsim
