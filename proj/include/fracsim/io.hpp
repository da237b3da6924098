#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracsim/control.hpp"
#include "fracsim/hypotheses.hpp"
#include "fracsim/solver.hpp"

namespace fracsim {

/// 17 significant digits, enough to round-trip any double exactly.
inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path.string());
    return out;
}

}  // namespace detail

inline void write_resolvent_csv(const std::filesystem::path& path, const ResolventTable& table) {
    auto out = detail::open_out(path);
    out << "t";
    for (std::size_t n = 0; n < table.S.size(); ++n)
        out << ",S_" << (n + 1) << ",J_" << (n + 1);
    out << "\n";
    for (std::size_t k = 0; k < table.grid.n_points; ++k) {
        out << format_full(table.grid.time(k));
        for (std::size_t n = 0; n < table.S.size(); ++n)
            out << "," << format_full(table.S[n][k]) << "," << format_full(table.J[n][k]);
        out << "\n";
    }
}

inline std::string interval_label(const IntervalRef& ref) {
    return (ref.kind == IntervalKind::flow ? "flow" : "impulse") + std::to_string(ref.q);
}

inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    auto out = detail::open_out(path);
    out << "t,interval";
    for (std::size_t n = 0; n < traj.coeffs.size(); ++n) out << ",z_" << (n + 1);
    out << "\n";
    for (std::size_t k = 0; k < traj.grid.n_points; ++k) {
        out << format_full(traj.grid.time(k)) << "," << interval_label(traj.tags[k]);
        for (std::size_t n = 0; n < traj.coeffs.size(); ++n)
            out << "," << format_full(traj.coeffs[n][k]);
        out << "\n";
    }
}

inline void write_ensemble_csv(const std::filesystem::path& path, const TrajectoryEnsemble& ens) {
    auto out = detail::open_out(path);
    out << "t,m_p,std_error\n";
    for (std::size_t k = 0; k < ens.grid.n_points; ++k)
        out << format_full(ens.grid.time(k)) << "," << format_full(ens.moment[k]) << ","
            << format_full(ens.std_error[k]) << "\n";
}

inline void write_constants_report(const std::filesystem::path& txt_path,
                                   const std::filesystem::path& csv_path,
                                   const ConstantsReport& rep, const HypothesisData& data) {
    {
        auto out = detail::open_out(txt_path);
        out << "moment_order_p = " << format_full(data.p) << "\n";
        out << "resolvent_sup_S = " << format_full(rep.S) << " (grid estimate)\n";
        out << "c_p = " << format_full(rep.c_p) << "\n";
        out << "C_p = " << format_full(rep.C_p) << "\n";
        out << "mu1_integral = " << format_full(data.mu1_integral) << "\n";
        out << "mu2_integral = " << format_full(data.mu2_integral) << "\n";
        out << "u_norm_lp = " << format_full(data.u_norm_lp) << "\n";
        out << "contraction_f1 = " << format_full(rep.contraction_f1) << "\n";
        out << "growth_f = " << format_full(rep.growth_f) << "\n";
        out << "x1 = " << format_full(rep.x1) << "\n";
        for (std::size_t q = 0; q < rep.x1q.size(); ++q) {
            out << "x1q[" << q << "] = " << format_full(rep.x1q[q]) << "\n";
            out << "x2q[" << q << "] = " << format_full(rep.x2q[q]) << "\n";
            out << "x3q[" << q << "] = " << format_full(rep.x3q[q]) << "\n";
        }
        out << "chain_factor = " << format_full(rep.chain_factor) << "\n";
        out << "delta = " << format_full(rep.delta) << "\n";
        out << "pass_contraction_f1_lt_1 = " << (rep.contraction_ok ? "yes" : "no") << "\n";
        out << "pass_growth_f_lt_1 = " << (rep.growth_ok ? "yes" : "no") << "\n";
        out << "pass_impulse_growth_lt_1 = " << (rep.impulse_growth_ok ? "yes" : "no") << "\n";
        out << "g2_linear_domination = " << (rep.g2_bound_conforms ? "yes" : "no") << "\n";
        if (!rep.g2_bound_conforms)
            out << "note = a nonlinearity carries only an affine bound mu(t)(1+||z||^p); the "
                   "linear-domination hypothesis does not hold for it\n";
        out << "note_time_constants = time-dependent factors inside window-independent "
               "constants are frozen at their largest value\n";
    }
    auto out = detail::open_out(csv_path);
    out << "p,S,c_p,C_p,mu1_integral,mu2_integral,contraction_f1,growth_f,delta,"
           "pass_contraction,pass_growth,pass_impulse_growth\n";
    out << format_full(data.p) << "," << format_full(rep.S) << "," << format_full(rep.c_p) << ","
        << format_full(rep.C_p) << "," << format_full(data.mu1_integral) << ","
        << format_full(data.mu2_integral) << "," << format_full(rep.contraction_f1) << ","
        << format_full(rep.growth_f) << "," << format_full(rep.delta) << ","
        << (rep.contraction_ok ? 1 : 0) << "," << (rep.growth_ok ? 1 : 0) << ","
        << (rep.impulse_growth_ok ? 1 : 0) << "\n";
}

inline void write_minimizing_sequence_csv(const std::filesystem::path& path,
                                          const std::vector<OptimizeLogEntry>& log) {
    auto out = detail::open_out(path);
    out << "evaluation,cost,std_error\n";
    for (const auto& e : log)
        out << e.evaluation << "," << format_full(e.cost) << "," << format_full(e.std_error)
            << "\n";
}

inline void write_control_csv(const std::filesystem::path& path,
                              const ControlParameterization& u) {
    auto out = detail::open_out(path);
    out << "knot_start,mode,value\n";
    for (std::size_t j = 0; j < u.values.size(); ++j)
        for (std::size_t m = 0; m < u.values[j].size(); ++m)
            out << format_full(u.knots[j]) << "," << (m + 1) << ","
                << format_full(u.values[j][m]) << "\n";
}

inline void write_cost_report(const std::filesystem::path& path, const CostReport& rep) {
    auto out = detail::open_out(path);
    out << "total = " << format_full(rep.total) << "\n";
    out << "state_term = " << format_full(rep.state_term) << "\n";
    out << "control_term = " << format_full(rep.control_term) << "\n";
    out << "std_error = " << format_full(rep.std_error) << "\n";
    out << "n_paths = " << rep.n_paths << "\n";
    out << "projected_input = " << (rep.projected_input ? "yes" : "no") << "\n";
}

inline constexpr const char* kDefaultsVersion = "1";

inline void write_manifest(const std::filesystem::path& path, const std::string& config_text,
                           std::uint64_t seed, const std::string& subcommand) {
    auto out = detail::open_out(path);
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config_text)));
    out << "config_hash = " << hash << "\n";
    out << "seed = " << seed << "\n";
    out << "defaults_version = " << kDefaultsVersion << "\n";
    out << "subcommand = " << subcommand << "\n";
}

inline void write_error_record(const std::filesystem::path& dir, const std::string& subcommand,
                               const std::string& message) {
    nlohmann::json j;
    j["subcommand"] = subcommand;
    j["error"] = message;
    auto out = detail::open_out(dir / "error.json");
    out << j.dump(2) << "\n";
}

}  // namespace fracsim
