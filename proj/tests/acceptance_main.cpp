// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Usage: acceptance_tests <fracsim-cli> <configs-dir> <work-dir>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fracsim/experiment.hpp"

using namespace fracsim;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what, const std::string& detail = "") {
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << criterion << ": " << what;
    if (!detail.empty()) std::cout << " [" << detail << "]";
    std::cout << std::endl;
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

// ---------------------------------------------------------------- criterion 1
void criterion_1_cosine_limit() {
    const auto t0 = std::chrono::steady_clock::now();
    TimeGrid grid = TimeGrid::over(0.0, 1.0, 1e-3);
    auto table = build_resolvent_table({1.0, {}, {}}, {-1.0, -4.0, -9.0}, grid);
    double worst = 0.0;
    for (std::size_t m = 0; m < 3; ++m) {
        const double n = std::sqrt(-table.eigenvalues[m]);
        for (std::size_t k = 0; k < grid.n_points; ++k) {
            const double t = grid.time(k);
            worst = std::max(worst, std::abs(table.S[m][k] - std::cos(n * t)));
            worst = std::max(worst, std::abs(table.J[m][k] - std::sin(n * t) / n));
        }
    }
    const double dt_run = seconds_since(t0);
    report(1, worst < 1e-6 && dt_run < 5.0,
           "classical-limit resolvent rows match cos and sin/n to 1e-6",
           "max abs err " + fmt(worst) + ", " + fmt(dt_run) + " s");
}

// ---------------------------------------------------------------- criterion 2
void criterion_2_laplace_identity() {
    TimeGrid grid = TimeGrid::over(0.0, 1.0, 1e-3);
    ResolventSymbol sym{{0.2, {0.6, 0.4, 0.3}, {1.0, 5.0, 8.0}}, -4.0};
    auto S = eval_resolvent_S(sym, grid);
    double worst = 0.0;
    for (double z : {8.0, 9.0, 10.0, 12.0, 15.0}) {
        double integral = 0.0;
        for (std::size_t k = 0; k + 1 < grid.n_points; ++k)
            integral += 0.5 * grid.dt *
                        (std::exp(-z * grid.time(k)) * S[k] +
                         std::exp(-z * grid.time(k + 1)) * S[k + 1]);
        integral += S.back() * std::exp(-z * grid.t_end()) / z;  // tail extrapolation
        const double exact = sym.s_hat({z, 0.0}).real();
        worst = std::max(worst, std::abs(integral - exact) / std::abs(exact));
    }
    report(2, worst < 1e-3, "forward transform of tabulated S reproduces its symbol",
           "worst rel err " + fmt(worst));
}

// ---------------------------------------------------------------- criterion 3
void criterion_3_convolution_identity() {
    TimeGrid grid = TimeGrid::over(0.0, 1.0, 1e-3);
    const std::vector<std::pair<FractionalOrders, double>> symbols = {
        {{0.2, {0.6, 0.4, 0.3}, {1.0, 5.0, 8.0}}, -4.0},
        {{0.5, {0.6, 0.5}, {1.0, 5.0}}, -9.0},
        {{0.3, {0.5, 0.4}, {0.5, 0.5}}, -1.0},
    };
    double worst = 0.0;
    for (const auto& [orders, lam] : symbols) {
        ResolventSymbol sym{orders, lam};
        auto S = eval_resolvent_S(sym, grid);
        auto J = eval_resolvent_J(sym, grid);
        auto conv = convolve_kernel(grid, KernelOrder(orders.alpha), S);
        for (std::size_t k = 0; k < grid.n_points; ++k) {
            if (grid.time(k) < 0.1) continue;
            worst = std::max(worst, std::abs(conv[k] - J[k]) / std::abs(J[k]));
        }
    }
    report(3, worst < 1e-3, "J rows agree with the kernel convolution of S",
           "worst rel err " + fmt(worst));
}

// ---------------------------------------------------------------- criterion 4
void criterion_4_subordination() {
    double worst = 0.0;
    const std::vector<double> default_points = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    // the strongly oscillatory pair crosses zero near t = 0.7; its ten points
    // sit away from the crossing so the relative comparison stays conditioned
    const std::vector<double> shifted_points = {0.1, 0.2, 0.3, 0.4, 0.5, 0.55, 0.8, 0.85, 0.9, 1.0};
    for (double alpha : {0.3, 0.5, 0.7}) {
        for (double lam : {-1.0, -4.0}) {
            const auto& points =
                (alpha == 0.7 && lam == -4.0) ? shifted_points : default_points;
            ResolventSymbol sym{{alpha, {}, {}}, lam};
            for (double t : points) {
                TimeGrid point(t, 1.0, 1);
                const double via_contour = eval_resolvent_S(sym, point)[0];
                const double via_subordination = subordination_S(lam, alpha, t);
                worst = std::max(worst,
                                 std::abs(via_subordination - via_contour) / std::abs(via_contour));
            }
        }
    }
    report(4, worst < 1e-3, "subordination oracle agrees with contour inversion",
           "worst rel err " + fmt(worst));
}

// ---------------------------------------------------------------- criterion 5
void criterion_5_ito_isometry() {
    const auto t0 = std::chrono::steady_clock::now();
    SpectralModel model;
    model.n_modes = 1;
    model.p = 2.0;
    model.orders = {1.0, {}, {}};
    const double sigma = 1.0;
    model.g2 = {"constant", {{"value", sigma}}};
    model.noise.mode_variances = {1.0};
    ImpulseSchedule schedule;
    schedule.ell = 1.0;
    TimeGrid grid = TimeGrid::over(0.0, 1.0, 1.0 / 400.0);
    auto table = build_resolvent_table(model.orders, {0.0}, grid);
    auto aux = make_solver_tables(table);
    auto ens = simulate_ensemble(model, schedule, {}, table, aux, 10000, 20240131);
    const std::size_t last = grid.n_points - 1;
    const double expect = sigma * sigma / 3.0;
    const double err = std::abs(ens.moment[last] - expect);
    const double dt_run = seconds_since(t0);
    report(5, err < 3.0 * ens.std_error[last] && dt_run < 60.0,
           "stochastic convolution second moment matches the isometry value",
           "sigma^2/3 off by " + fmt(err) + " vs 3se " + fmt(3.0 * ens.std_error[last]) + ", " +
               fmt(dt_run) + " s");
}

// ------------------------------------------------------- criteria 6 and 7
const char* kConfigMultiTermText = R"({
  "model": {
    "n_modes": 4,
    "p": 2.0,
    "orders": {"alpha": 0.3, "gammas": [0.5, 0.4], "betas": [0.5, 0.5]},
    "g1": {"name": "linear_decay", "params": {"amplitude": 0.33333333333333331, "rate": 1.0}},
    "g2": {"name": "exp_scale", "params": {"amplitude": 0.5, "rate": 1.0}},
    "initial_position": {"name": "sine", "params": {"mode": 1.0, "amplitude": 1.0}},
    "initial_velocity": {"name": "zero"},
    "noise_variances": [0.0001, 2.5e-05, 1.1111111111111112e-05, 6.25e-06],
    "e_gain": 1.0
  },
  "schedule": {"end_time": 1.0, "impulses": []},
  "grid": {"dt": 0.0025},
  "mc": {"n_paths": 1000, "seed": 23}
})";

const char* kConfigSmallImpulseText = R"({
  "model": {
    "n_modes": 4,
    "p": 2.0,
    "orders": {"alpha": 0.5, "gammas": [], "betas": []},
    "g1": {"name": "saturating", "params": {"amplitude": 1.0, "rate": 3.0, "offset": 2.0}},
    "g2": {"name": "exp_scale", "params": {"amplitude": 23.140692632779267, "rate": 4.0}},
    "initial_position": {"name": "parabola"},
    "initial_velocity": {"name": "zero"},
    "noise_variances": [1e-05, 2.5e-06, 1.1111111111111112e-06, 6.25e-07],
    "e_gain": 1.0
  },
  "schedule": {
    "end_time": 1.0,
    "impulses": [
      {"t": 0.2, "e": 0.9,
       "varsigma": {"name": "scaled_sin", "params": {"amplitude": 0.1}},
       "varphi": {"name": "scaled_sin", "params": {"amplitude": 0.05}}}
    ]
  },
  "grid": {"dt": 0.0025},
  "mc": {"n_paths": 1000, "seed": 31}
})";

struct CheckedRun {
    std::string name;
    RunConfig cfg;
    Realization real;
    ConstantsReport rep;
    TrajectoryEnsemble ens;
};

std::vector<CheckedRun> run_checked_configs(const std::string& example61_text) {
    std::vector<CheckedRun> out;
    const std::vector<std::pair<std::string, std::string>> sources = {
        {"example61-desk", example61_text},
        {"multi-term-no-impulse", kConfigMultiTermText},
        {"small-impulse", kConfigSmallImpulseText},
    };
    for (const auto& [name, text] : sources) {
        auto parsed = parse_config(text);
        if (!parsed.ok()) {
            std::ostringstream os;
            for (const auto& e : parsed.errors) os << e << "; ";
            throw std::runtime_error("config " + name + " invalid: " + os.str());
        }
        CheckedRun run;
        run.name = name;
        run.cfg = *parsed.config;
        run.real = realize(run.cfg);
        const auto data = build_hypothesis_data(run.cfg.model, run.cfg.schedule, run.real.table);
        run.rep = apriori_bound_delta(data);
        run.ens = simulate_ensemble(run.cfg.model, run.cfg.schedule, {}, run.real.table,
                                    run.real.aux, run.cfg.n_paths, run.cfg.seed, run.cfg.solver);
        out.push_back(std::move(run));
    }
    return out;
}

void criterion_6_apriori_bound(const std::vector<CheckedRun>& runs) {
    bool all_pass = true;
    std::string detail;
    for (const auto& run : runs) {
        if (!run.rep.all_pass()) {
            all_pass = false;
            detail += run.name + ": smallness conditions not met; ";
            continue;
        }
        std::size_t argmax = 0;
        for (std::size_t k = 0; k < run.ens.moment.size(); ++k)
            if (run.ens.moment[k] > run.ens.moment[argmax]) argmax = k;
        const double slack = 3.0 * run.ens.std_error[argmax];
        if (run.ens.sup_moment > run.rep.delta + slack) {
            all_pass = false;
            detail += run.name + ": sup moment exceeds delta; ";
        } else {
            detail += run.name + ": sup " + fmt(run.ens.sup_moment) + " <= delta " +
                      fmt(run.rep.delta) + "; ";
        }
    }
    report(6, all_pass, "simulated sup moment stays under the a priori bound", detail);
}

void criterion_7_contraction(const std::vector<CheckedRun>& runs) {
    bool all_pass = true;
    std::string detail;
    for (const auto& run : runs) {
        if (!(run.rep.contraction_f1 < 1.0 && run.rep.growth_f < 1.0)) {
            all_pass = false;
            detail += run.name + ": checker did not pass; ";
            continue;
        }
        if (run.ens.n_failed != 0) {
            all_pass = false;
            detail += run.name + ": paths failed under a passing verdict; ";
        }
        double worst_ratio = 0.0;
        for (std::uint64_t path_index = 0; path_index < 5; ++path_index) {
            const auto path =
                sample_noise(run.cfg.model.noise, run.real.grid, run.cfg.seed, path_index,
                             static_cast<std::size_t>(run.cfg.model.n_modes));
            const auto traj = picard_solve(run.cfg.model, run.cfg.schedule, {}, run.real.table,
                                           run.real.aux, path, run.cfg.solver);
            if (!traj.converged) {
                all_pass = false;
                detail += run.name + ": non-convergence; ";
            }
            for (const auto& stats : traj.stats) {
                const auto& h = stats.residual_history;
                for (std::size_t i = 0; i + 1 < h.size(); ++i)
                    if (h[i] > 1e-12) worst_ratio = std::max(worst_ratio, h[i + 1] / h[i]);
            }
        }
        if (!(worst_ratio < 1.0)) {
            all_pass = false;
            detail += run.name + ": residual ratio " + fmt(worst_ratio) + " >= 1; ";
        } else {
            detail += run.name + ": worst ratio " + fmt(worst_ratio) + "; ";
        }
    }
    report(7, all_pass, "fixed-point residuals decay whenever the checker passes", detail);
}

// ---------------------------------------------------------------- criterion 8
void criterion_8_wave_limit() {
    SpectralModel model;
    model.n_modes = 16;
    model.p = 2.0;
    model.orders = {1.0, {}, {}};
    model.z0 = {"parabola", {}, {}};
    model.z1 = {"zero", {}, {}};
    model.noise.mode_variances = std::vector<double>(16, 0.0);
    ImpulseSchedule schedule;
    schedule.ell = 1.0;
    ImpulsePhase ph;
    ph.t_q = 0.20;
    ph.e_q = 0.90;
    ph.varsigma = {"scaled_sin", {{"amplitude", 0.25}}, {}};
    ph.varphi = {"scaled_sin", {{"amplitude", 1.0 / 3.0}}, {}};
    schedule.phases = {ph};

    TimeGrid grid = TimeGrid::over(0.0, 1.0, 1.0 / 800.0);
    auto table = build_resolvent_table(model.orders, model.eigenvalues(), grid);
    auto aux = make_solver_tables(table);
    auto path = sample_noise(model.noise, grid, 0, 0, 16);
    auto traj = picard_solve(model, schedule, {}, table, aux, path);

    const auto c = initial_coefficients(model.z0, model.n_modes);
    double worst = 0.0;
    for (std::size_t k = 0; k < grid.n_points; ++k) {
        const double t = grid.time(k);
        double err2 = 0.0;
        for (int n = 1; n <= model.n_modes; ++n) {
            const double cn = c[n - 1];
            const double z_t1 = cn * std::cos(0.20 * n);
            double ref;
            if (t <= 0.20) {
                ref = cn * std::cos(n * t);
            } else if (t <= 0.90) {
                ref = 0.25 * std::sin(t) * z_t1;
            } else {
                const double zs = 0.25 * std::sin(0.90) * z_t1;
                const double zv = std::sin(0.90) / 3.0 * z_t1;
                ref = zs * std::cos(n * (t - 0.90)) + zv * std::sin(n * (t - 0.90)) / n;
            }
            const double d = traj.coeffs[n - 1][k] - ref;
            err2 += d * d;
        }
        worst = std::max(worst, std::sqrt(err2));
    }
    report(8, traj.converged && worst < 1e-3,
           "classical-limit simulation matches the eigen-expansion closed form",
           "worst L2 err " + fmt(worst));
}

// ---------------------------------------------------------------- criterion 9
void criterion_9_control_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    SpectralModel model;
    model.n_modes = 1;
    model.p = 2.0;
    model.orders = {1.0, {}, {}};
    model.z0 = {"coeffs", {}, {1.0}};
    model.noise.mode_variances = {0.0};
    ImpulseSchedule schedule;
    schedule.ell = 1.0;
    auto table = build_resolvent_table(model.orders, {-1.0}, TimeGrid::over(0.0, 1.0, 0.01));
    auto aux = make_solver_tables(table);

    ControlParameterization u0;
    u0.knots = {0.0, 0.25, 0.5, 0.75, 1.0};
    u0.values.assign(4, {0.0});
    u0.eta = 8.0;

    OptimizeOptions opt;
    opt.initial_step = 0.5;
    opt.min_step = 0.125;
    opt.budget = 4000;
    opt.n_paths = 1;
    opt.seed = 0;
    auto res = optimize(model, schedule, table, aux, {}, u0, opt);

    double best_bf = std::numeric_limits<double>::infinity();
    for (int a = -8; a <= 8; ++a)
        for (int b = -8; b <= 8; ++b)
            for (int c = -8; c <= 8; ++c)
                for (int d = -8; d <= 8; ++d) {
                    auto u = u0;
                    u.values = {{a * 0.125}, {b * 0.125}, {c * 0.125}, {d * 0.125}};
                    const double cost =
                        evaluate_cost(model, schedule, table, aux, {}, u, 1, 0).total;
                    best_bf = std::min(best_bf, cost);
                }
    bool monotone = true;
    for (std::size_t i = 1; i < res.log.size(); ++i)
        if (res.log[i].cost >= res.log[i - 1].cost) monotone = false;
    const double diff = std::abs(res.report.total - best_bf);
    const double dt_run = seconds_since(t0);
    report(9, diff <= 1e-12 && monotone && dt_run < 60.0,
           "descent search matches exhaustive lattice search",
           "cost gap " + fmt(diff) + ", " + fmt(dt_run) + " s");
}

// --------------------------------------------------------------- criterion 10
bool directories_identical(const fs::path& a, const fs::path& b, std::string& why) {
    std::vector<fs::path> names;
    for (const auto& entry : fs::directory_iterator(a)) names.push_back(entry.path().filename());
    for (const auto& name : names) {
        std::ifstream fa(a / name, std::ios::binary), fb(b / name, std::ios::binary);
        if (!fa || !fb) {
            why = "missing " + name.string();
            return false;
        }
        std::ostringstream sa, sb;
        sa << fa.rdbuf();
        sb << fb.rdbuf();
        if (sa.str() != sb.str()) {
            why = "differs: " + name.string();
            return false;
        }
    }
    return true;
}

void criterion_10_reproduction(const std::string& cli, const fs::path& work) {
    bool pass = true;
    std::string detail;
    for (const char* name : {"reproduce-example61", "reproduce-example62"}) {
        const fs::path dir_a = work / (std::string(name) + "_a");
        const fs::path dir_b = work / (std::string(name) + "_b");
        fs::remove_all(dir_a);
        fs::remove_all(dir_b);
        const auto t0 = std::chrono::steady_clock::now();
        const std::string cmd_a =
            cli + " " + name + " --out " + dir_a.string() + " > /dev/null 2>&1";
        const std::string cmd_b =
            cli + " " + name + " --out " + dir_b.string() + " > /dev/null 2>&1";
        if (std::system(cmd_a.c_str()) != 0 || std::system(cmd_b.c_str()) != 0) {
            pass = false;
            detail += std::string(name) + ": nonzero exit; ";
            continue;
        }
        const double dt_run = seconds_since(t0) / 2.0;
        std::string why;
        if (!directories_identical(dir_a, dir_b, why)) {
            pass = false;
            detail += std::string(name) + ": rerun not byte-identical (" + why + "); ";
        } else if (dt_run >= 600.0) {
            pass = false;
            detail += std::string(name) + ": too slow (" + fmt(dt_run) + " s); ";
        } else {
            detail += std::string(name) + ": " + fmt(dt_run) + " s, byte-identical; ";
        }
    }
    report(10, pass, "canned example runs complete deterministically", detail);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 4) {
        std::cerr << "usage: acceptance_tests <fracsim-cli> <configs-dir> <work-dir>\n";
        return 2;
    }
    const std::string cli = argv[1];
    const fs::path configs = argv[2];
    const fs::path work = argv[3];
    fs::create_directories(work);

    std::string example61_text;
    {
        std::ifstream in(configs / "example61.cfg", std::ios::binary);
        if (!in) {
            std::cerr << "cannot read " << (configs / "example61.cfg") << "\n";
            return 2;
        }
        std::ostringstream os;
        os << in.rdbuf();
        example61_text = os.str();
    }

    try {
        criterion_1_cosine_limit();
        criterion_2_laplace_identity();
        criterion_3_convolution_identity();
        criterion_4_subordination();
        criterion_5_ito_isometry();
        const auto runs = run_checked_configs(example61_text);
        criterion_6_apriori_bound(runs);
        criterion_7_contraction(runs);
        criterion_8_wave_limit();
        criterion_9_control_oracle();
        criterion_10_reproduction(cli, work);
    } catch (const std::exception& e) {
        std::cerr << "acceptance suite aborted: " << e.what() << "\n";
        return 2;
    }

    std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: " + std::to_string(g_failures))
              << std::endl;
    return g_failures == 0 ? 0 : 1;
}
