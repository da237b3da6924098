#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracsim/control.hpp"
#include "fracsim/hypotheses.hpp"
#include "fracsim/solver.hpp"

namespace fracsim {

struct OutputFlags {
    bool trajectory = true;
    bool ensemble = true;
    bool resolvent_table = false;
    bool constants = true;
};

/// Fully validated run description: model, schedule, grid, solver, Monte
/// Carlo, control, cost, and output selection.
struct RunConfig {
    SpectralModel model;
    ImpulseSchedule schedule;
    double dt = 1e-3;
    SolverOptions solver;
    std::size_t n_paths = 1;
    std::uint64_t seed = 0;
    ControlParameterization control;
    int control_modes = 1;
    OptimizeOptions optimizer;
    CostSpec cost;
    OutputFlags outputs;
    std::string raw_text;  // the exact text the config was parsed from

    TimeGrid grid() const { return TimeGrid::over(0.0, schedule.ell, dt); }
};

struct ConfigParseResult {
    std::optional<RunConfig> config;
    std::vector<std::string> errors;
    bool ok() const { return errors.empty() && config.has_value(); }
};

namespace detail {

class ConfigReader {
  public:
    explicit ConfigReader(std::vector<std::string>& errors) : errors_(errors) {}

    void fail(const std::string& path, const std::string& message) {
        errors_.push_back(path + ": " + message);
    }

    bool require_object(const nlohmann::json& j, const std::string& path) {
        if (j.is_object()) return true;
        fail(path, "expected an object");
        return false;
    }

    void check_keys(const nlohmann::json& j, const std::string& path,
                    const std::set<std::string>& allowed) {
        if (!j.is_object()) return;
        for (const auto& [key, value] : j.items())
            if (!allowed.count(key)) fail(path + "." + key, "unknown key");
    }

    double number(const nlohmann::json& j, const std::string& path, const std::string& key,
                  double fallback, bool required = false) {
        if (!j.contains(key)) {
            if (required) fail(path + "." + key, "missing required value");
            return fallback;
        }
        if (!j[key].is_number()) {
            fail(path + "." + key, "expected a number");
            return fallback;
        }
        return j[key].get<double>();
    }

    std::vector<double> number_list(const nlohmann::json& j, const std::string& path,
                                    const std::string& key) {
        std::vector<double> out;
        if (!j.contains(key)) return out;
        if (!j[key].is_array()) {
            fail(path + "." + key, "expected an array of numbers");
            return out;
        }
        for (const auto& v : j[key]) {
            if (!v.is_number()) {
                fail(path + "." + key, "expected numbers only");
                return {};
            }
            out.push_back(v.get<double>());
        }
        return out;
    }

    bool flag(const nlohmann::json& j, const std::string& path, const std::string& key,
              bool fallback) {
        if (!j.contains(key)) return fallback;
        if (!j[key].is_boolean()) {
            fail(path + "." + key, "expected true or false");
            return fallback;
        }
        return j[key].get<bool>();
    }

    std::string text(const nlohmann::json& j, const std::string& path, const std::string& key,
                     const std::string& fallback, bool required = false) {
        if (!j.contains(key)) {
            if (required) fail(path + "." + key, "missing required value");
            return fallback;
        }
        if (!j[key].is_string()) {
            fail(path + "." + key, "expected a string");
            return fallback;
        }
        return j[key].get<std::string>();
    }

    std::map<std::string, double> params(const nlohmann::json& j, const std::string& path) {
        std::map<std::string, double> out;
        if (!j.contains("params")) return out;
        if (!j["params"].is_object()) {
            fail(path + ".params", "expected an object of named numbers");
            return out;
        }
        for (const auto& [key, value] : j["params"].items()) {
            if (!value.is_number()) {
                fail(path + ".params." + key, "expected a number");
                continue;
            }
            out[key] = value.get<double>();
        }
        return out;
    }

  private:
    std::vector<std::string>& errors_;
};

inline bool divides(double step, double value, double tol = 1e-12) {
    const double q = value / step;
    return std::abs(value - std::round(q) * step) <= tol * std::max(1.0, std::abs(value));
}

}  // namespace detail

/// Parse and validate a declarative run configuration (JSON text).  Either a
/// usable RunConfig or the full list of validation errors, each prefixed with
/// the path of the offending field.
inline ConfigParseResult parse_config(const std::string& text) {
    ConfigParseResult result;
    auto& errors = result.errors;
    detail::ConfigReader r(errors);

    nlohmann::json root = nlohmann::json::parse(text, nullptr, false);
    if (root.is_discarded()) {
        errors.push_back("config: not valid JSON");
        return result;
    }
    r.check_keys(root, "config",
                 {"model", "schedule", "grid", "solver", "mc", "control", "cost", "outputs"});

    RunConfig cfg;
    cfg.raw_text = text;

    // model
    if (root.contains("model") && r.require_object(root["model"], "model")) {
        const auto& m = root["model"];
        r.check_keys(m, "model",
                     {"n_modes", "p", "orders", "g1", "g2", "initial_position",
                      "initial_velocity", "noise_variances", "e_gain", "projection_panels"});
        cfg.model.n_modes = static_cast<int>(r.number(m, "model", "n_modes", 1, true));
        cfg.model.p = r.number(m, "model", "p", 2.0);
        if (m.contains("orders") && r.require_object(m["orders"], "model.orders")) {
            const auto& o = m["orders"];
            r.check_keys(o, "model.orders", {"alpha", "gammas", "betas"});
            cfg.model.orders.alpha = r.number(o, "model.orders", "alpha", 1.0, true);
            cfg.model.orders.gammas = r.number_list(o, "model.orders", "gammas");
            cfg.model.orders.betas = r.number_list(o, "model.orders", "betas");
        } else if (!m.contains("orders")) {
            r.fail("model.orders", "missing required block");
        }
        auto read_nonlinearity = [&](const char* key) {
            NonlinearitySpec spec;
            if (!m.contains(key)) return spec;
            const std::string path = std::string("model.") + key;
            if (!r.require_object(m[key], path)) return spec;
            r.check_keys(m[key], path, {"name", "params"});
            spec.name = r.text(m[key], path, "name", "zero", true);
            spec.params = r.params(m[key], path);
            return spec;
        };
        cfg.model.g1 = read_nonlinearity("g1");
        cfg.model.g2 = read_nonlinearity("g2");
        auto read_initial = [&](const char* key) {
            InitialDataSpec spec;
            if (!m.contains(key)) return spec;
            const std::string path = std::string("model.") + key;
            if (!r.require_object(m[key], path)) return spec;
            r.check_keys(m[key], path, {"name", "params", "coeffs"});
            spec.name = r.text(m[key], path, "name", "zero", true);
            spec.params = r.params(m[key], path);
            spec.coeffs = r.number_list(m[key], path, "coeffs");
            return spec;
        };
        cfg.model.z0 = read_initial("initial_position");
        cfg.model.z1 = read_initial("initial_velocity");
        cfg.model.noise.mode_variances = r.number_list(m, "model", "noise_variances");
        cfg.model.e_gain = r.number(m, "model", "e_gain", 1.0);
    } else {
        r.fail("model", "missing required block");
    }

    // schedule
    if (root.contains("schedule") && r.require_object(root["schedule"], "schedule")) {
        const auto& s = root["schedule"];
        r.check_keys(s, "schedule", {"end_time", "impulses"});
        cfg.schedule.ell = r.number(s, "schedule", "end_time", 1.0, true);
        if (s.contains("impulses")) {
            if (!s["impulses"].is_array()) {
                r.fail("schedule.impulses", "expected an array");
            } else {
                std::size_t q = 0;
                for (const auto& imp : s["impulses"]) {
                    const std::string path = "schedule.impulses[" + std::to_string(q) + "]";
                    ImpulsePhase ph;
                    if (r.require_object(imp, path)) {
                        r.check_keys(imp, path, {"t", "e", "varsigma", "varphi"});
                        ph.t_q = r.number(imp, path, "t", 0.0, true);
                        ph.e_q = r.number(imp, path, "e", 0.0, true);
                        auto read_map = [&](const char* key) {
                            ImpulseMapSpec spec;
                            if (!imp.contains(key)) return spec;
                            const std::string mpath = path + "." + key;
                            if (!r.require_object(imp[key], mpath)) return spec;
                            r.check_keys(imp[key], mpath, {"name", "params", "mode_multipliers"});
                            spec.name = r.text(imp[key], mpath, "name", "zero", true);
                            spec.params = r.params(imp[key], mpath);
                            spec.mode_multipliers =
                                r.number_list(imp[key], mpath, "mode_multipliers");
                            return spec;
                        };
                        ph.varsigma = read_map("varsigma");
                        ph.varphi = read_map("varphi");
                        if (!(ph.t_q < ph.e_q))
                            r.fail(path, "window must satisfy t < e");
                    }
                    cfg.schedule.phases.push_back(ph);
                    ++q;
                }
            }
        }
    } else {
        r.fail("schedule", "missing required block");
    }

    // grid
    if (root.contains("grid") && r.require_object(root["grid"], "grid")) {
        r.check_keys(root["grid"], "grid", {"dt"});
        cfg.dt = r.number(root["grid"], "grid", "dt", 1e-3, true);
        if (!(cfg.dt > 0.0)) r.fail("grid.dt", "must be positive");
    } else {
        r.fail("grid", "missing required block");
    }

    // solver
    if (root.contains("solver")) {
        if (r.require_object(root["solver"], "solver")) {
            r.check_keys(root["solver"], "solver", {"tol_picard", "max_iters"});
            cfg.solver.tol_picard = r.number(root["solver"], "solver", "tol_picard", 1e-8);
            cfg.solver.max_iters =
                static_cast<int>(r.number(root["solver"], "solver", "max_iters", 50));
            if (!(cfg.solver.tol_picard > 0.0)) r.fail("solver.tol_picard", "must be positive");
            if (cfg.solver.max_iters < 1) r.fail("solver.max_iters", "must be >= 1");
        }
    }

    // mc
    if (root.contains("mc")) {
        if (r.require_object(root["mc"], "mc")) {
            r.check_keys(root["mc"], "mc", {"n_paths", "seed"});
            const double n = r.number(root["mc"], "mc", "n_paths", 1);
            if (n < 1) r.fail("mc.n_paths", "must be >= 1");
            cfg.n_paths = static_cast<std::size_t>(n);
            cfg.seed = static_cast<std::uint64_t>(r.number(root["mc"], "mc", "seed", 0));
        }
    }

    // control
    cfg.control.knots = {0.0, cfg.schedule.ell};
    cfg.control.values = {{0.0}};
    cfg.control.eta = 0.0;
    if (root.contains("control")) {
        if (r.require_object(root["control"], "control")) {
            const auto& c = root["control"];
            r.check_keys(c, "control", {"knots", "n_modes", "eta", "values", "optimizer"});
            auto knots = r.number_list(c, "control", "knots");
            if (!knots.empty()) cfg.control.knots = knots;
            cfg.control_modes = static_cast<int>(r.number(c, "control", "n_modes", 1));
            cfg.control.eta = r.number(c, "control", "eta", 0.0);
            const std::size_t nk =
                cfg.control.knots.size() >= 2 ? cfg.control.knots.size() - 1 : 0;
            cfg.control.values.assign(
                nk, std::vector<double>(static_cast<std::size_t>(cfg.control_modes), 0.0));
            if (c.contains("values")) {
                if (!c["values"].is_array()) {
                    r.fail("control.values", "expected an array of arrays");
                } else if (c["values"].size() != nk) {
                    r.fail("control.values", "need one row per knot interval");
                } else {
                    for (std::size_t j = 0; j < nk; ++j) {
                        const auto& row = c["values"][j];
                        if (!row.is_array() ||
                            row.size() != static_cast<std::size_t>(cfg.control_modes)) {
                            r.fail("control.values[" + std::to_string(j) + "]",
                                   "need one entry per controlled mode");
                            continue;
                        }
                        for (std::size_t m = 0; m < row.size(); ++m) {
                            if (!row[m].is_number()) {
                                r.fail("control.values[" + std::to_string(j) + "]",
                                       "expected numbers");
                                break;
                            }
                            cfg.control.values[j][m] = row[m].get<double>();
                        }
                    }
                }
            }
            if (c.contains("optimizer")) {
                const auto& o = c["optimizer"];
                if (r.require_object(o, "control.optimizer")) {
                    r.check_keys(o, "control.optimizer",
                                 {"initial_step", "min_step", "budget", "n_paths"});
                    cfg.optimizer.initial_step =
                        r.number(o, "control.optimizer", "initial_step", 0.25);
                    cfg.optimizer.min_step = r.number(o, "control.optimizer", "min_step", 1.0 / 32);
                    cfg.optimizer.budget =
                        static_cast<std::size_t>(r.number(o, "control.optimizer", "budget", 200));
                    cfg.optimizer.n_paths =
                        static_cast<std::size_t>(r.number(o, "control.optimizer", "n_paths", 1));
                }
            }
        }
    }
    cfg.optimizer.seed = cfg.seed;

    // cost
    if (root.contains("cost")) {
        if (r.require_object(root["cost"], "cost")) {
            r.check_keys(root["cost"], "cost",
                         {"state_weight", "control_weight", "phi", "h1", "h2"});
            cfg.cost.state_weight = r.number(root["cost"], "cost", "state_weight", 1.0);
            cfg.cost.control_weight = r.number(root["cost"], "cost", "control_weight", 1.0);
            cfg.cost.phi = r.number(root["cost"], "cost", "phi", 0.0);
            cfg.cost.h1 = r.number(root["cost"], "cost", "h1", 1.0);
            cfg.cost.h2 = r.number(root["cost"], "cost", "h2", 1.0);
        }
    }

    // outputs
    if (root.contains("outputs")) {
        if (r.require_object(root["outputs"], "outputs")) {
            r.check_keys(root["outputs"], "outputs",
                         {"trajectory", "ensemble", "resolvent_table", "constants"});
            cfg.outputs.trajectory = r.flag(root["outputs"], "outputs", "trajectory", true);
            cfg.outputs.ensemble = r.flag(root["outputs"], "outputs", "ensemble", true);
            cfg.outputs.resolvent_table =
                r.flag(root["outputs"], "outputs", "resolvent_table", false);
            cfg.outputs.constants = r.flag(root["outputs"], "outputs", "constants", true);
        }
    }

    // cross-field validation, guarded so it only runs on a structurally
    // complete configuration
    if (errors.empty()) {
        try {
            cfg.model.validate();
        } catch (const std::exception& e) {
            r.fail("model", e.what());
        }
        try {
            cfg.schedule.validate();
        } catch (const std::exception& e) {
            r.fail("schedule", e.what());
        }
        for (std::size_t q = 0; q < cfg.schedule.phases.size(); ++q) {
            const auto& ph = cfg.schedule.phases[q];
            const std::string path = "schedule.impulses[" + std::to_string(q) + "]";
            if (!detail::divides(cfg.dt, ph.t_q)) r.fail(path + ".t", "dt must divide t");
            if (!detail::divides(cfg.dt, ph.e_q)) r.fail(path + ".e", "dt must divide e");
        }
        if (!detail::divides(cfg.dt, cfg.schedule.ell))
            r.fail("grid.dt", "dt must divide the horizon end_time");
        if (errors.empty()) {
            if (std::abs(cfg.control.knots.front()) > 1e-12 ||
                std::abs(cfg.control.knots.back() - cfg.schedule.ell) > 1e-12)
                r.fail("control.knots", "knots must span [0, end_time]");
            try {
                cfg.control.validate();
            } catch (const std::exception& e) {
                r.fail("control", e.what());
            }
            try {
                cfg.cost.validate();
            } catch (const std::exception& e) {
                r.fail("cost", e.what());
            }
            if (cfg.control_modes > cfg.model.n_modes)
                r.fail("control.n_modes", "cannot exceed model.n_modes");
        }
    }

    if (errors.empty()) result.config = std::move(cfg);
    return result;
}

}  // namespace fracsim
