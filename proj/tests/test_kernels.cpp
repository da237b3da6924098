#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "fracsim/kernels.hpp"
#include "fracsim/special_functions.hpp"

using namespace fracsim;

namespace {

// samples the t > 0 branch; at t = 0 the right limit (finite only for rho >= 1)
std::vector<double> sample_kernel(const TimeGrid& grid, double rho) {
    std::vector<double> v(grid.n_points);
    for (std::size_t k = 0; k < grid.n_points; ++k) {
        const double t = grid.time(k);
        if (t == 0.0)
            v[k] = rho > 1.0 ? 0.0 : 1.0 / gamma_fn(rho);  // rho = 1 jump value
        else
            v[k] = rl_kernel(KernelOrder(rho), t);
    }
    return v;
}

}  // namespace

TEST_CASE("gamma function accuracy") {
    CHECK(gamma_fn(0.5) == Catch::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
    CHECK(gamma_fn(1.0) == Catch::Approx(1.0).epsilon(1e-13));
    CHECK(gamma_fn(5.0) == Catch::Approx(24.0).epsilon(1e-13));
    CHECK(gamma_fn(1.5) == Catch::Approx(0.5 * std::sqrt(std::numbers::pi)).epsilon(1e-13));
    // reflection branch
    CHECK(gamma_fn(-0.5) == Catch::Approx(-2.0 * std::sqrt(std::numbers::pi)).epsilon(1e-12));
    CHECK(gamma_fn(-1.5) == Catch::Approx(4.0 / 3.0 * std::sqrt(std::numbers::pi)).epsilon(1e-12));
    CHECK(reciprocal_gamma(-2.0) == 0.0);
    CHECK(reciprocal_gamma(0.0) == 0.0);
    CHECK_THROWS_AS(gamma_fn(-3.0), std::invalid_argument);
    // cross-check against the standard library over the range the code uses
    for (double x : {0.1, 0.3, 0.9, 1.7, 2.5, 7.3, 20.0, 100.5, -0.7, -4.3, -10.2}) {
        CHECK(gamma_fn(x) == Catch::Approx(std::tgamma(x)).epsilon(1e-12));
        CHECK(log_abs_gamma(x) == Catch::Approx(std::lgamma(x)).margin(1e-11));
    }
}

TEST_CASE("rl_kernel basics") {
    CHECK(rl_kernel(KernelOrder(1.0), 2.0) == Catch::Approx(1.0));
    CHECK(rl_kernel(KernelOrder(0.7), -1.0) == 0.0);
    CHECK(rl_kernel(KernelOrder(0.7), 0.0) == 0.0);
    CHECK(rl_kernel(KernelOrder(0.5), 1.0) ==
          Catch::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-13));
    CHECK_THROWS_AS(KernelOrder(0.0), std::invalid_argument);
    CHECK_THROWS_AS(KernelOrder(-0.3), std::invalid_argument);
}

TEST_CASE("rl_kernel nonnegative on t > 0") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> rho_d(0.05, 3.0), t_d(1e-6, 10.0);
    for (int i = 0; i < 200; ++i)
        CHECK(rl_kernel(KernelOrder(rho_d(rng)), t_d(rng)) >= 0.0);
}

TEST_CASE("convolve semigroup identity k1*k1 = k2") {
    TimeGrid grid(0.0, 1e-3, 1001);
    auto k1 = sample_kernel(grid, 1.0);
    auto conv = convolve(grid, k1, k1);
    double max_err = 0.0;
    for (std::size_t k = 0; k < grid.n_points; ++k)
        max_err = std::max(max_err, std::abs(conv[k] - grid.time(k)));
    CHECK(max_err < 1e-6);
}

TEST_CASE("convolve_kernels k_0.5 * k_0.5 = k_1") {
    TimeGrid grid(0.0, 1e-3, 1001);
    auto conv = convolve_kernels(grid, KernelOrder(0.5), KernelOrder(0.5));
    double max_rel = 0.0;
    for (std::size_t k = 0; k < grid.n_points; ++k) {
        if (grid.time(k) < 0.1) continue;
        max_rel = std::max(max_rel, std::abs(conv[k] - 1.0));
    }
    CHECK(max_rel < 1e-3);
}

TEST_CASE("convolve of zero is zero") {
    TimeGrid grid(0.0, 0.01, 101);
    std::vector<double> zero(grid.n_points, 0.0);
    auto g = sample_kernel(grid, 1.0);
    auto conv = convolve(grid, zero, g);
    for (double v : conv) CHECK(v == 0.0);
}

TEST_CASE("convolve rejects mismatched grids") {
    TimeGrid grid(0.0, 0.01, 101);
    std::vector<double> f(grid.n_points, 1.0), g(50, 1.0);
    CHECK_THROWS_AS(convolve(grid, f, g), std::invalid_argument);
    TimeGrid shifted(1.0, 0.01, 101);
    std::vector<double> h(shifted.n_points, 1.0);
    CHECK_THROWS_AS(convolve(shifted, h, h), std::invalid_argument);
}

TEST_CASE("kernel semigroup law under grid refinement") {
    // error of the symmetric product rule should drop at second order
    const double p = 0.5, q = 0.7;
    auto worst = [&](double dt) {
        TimeGrid grid = TimeGrid::over(0.0, 1.0, dt);
        auto conv = convolve_kernels(grid, KernelOrder(p), KernelOrder(q));
        double m = 0.0;
        for (std::size_t k = 0; k < grid.n_points; ++k) {
            const double t = grid.time(k);
            if (t < 0.1) continue;
            m = std::max(m, std::abs(conv[k] - rl_kernel(KernelOrder(p + q), t)));
        }
        return m;
    };
    const double e1 = worst(1.0 / 200.0);
    const double e2 = worst(1.0 / 400.0);
    CHECK(e2 < e1);
    CHECK(e2 < 1e-4);
}

TEST_CASE("caputo derivative of a constant vanishes") {
    TimeGrid grid(0.0, 0.01, 101);
    std::vector<double> f(grid.n_points, 3.7);
    auto d = caputo_derivative(grid, f, 0.5);
    for (double v : d) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("caputo derivative of t at order 0.5") {
    // analytic rule: derivative of t is t^{1-rho}/Gamma(2-rho)
    TimeGrid grid(0.0, 1e-3, 1001);
    std::vector<double> f(grid.n_points);
    for (std::size_t k = 0; k < grid.n_points; ++k) f[k] = grid.time(k);
    auto d = caputo_derivative(grid, f, 0.5);
    const double expect = 1.0 / gamma_fn(1.5);  // = 2/sqrt(pi) at t=1
    CHECK(expect == Catch::Approx(1.1283791670955126).epsilon(1e-12));
    CHECK(d[1000] == Catch::Approx(expect).margin(1e-6));
}

TEST_CASE("caputo order zero is the identity") {
    TimeGrid grid(0.0, 0.1, 11);
    std::vector<double> f = {0.0, 1.0, -2.0, 0.5, 3.0, 1.0, 1.0, 0.0, -1.0, 4.0, 2.0};
    auto d = caputo_derivative(grid, f, 0.0);
    CHECK(d == f);
    CHECK_THROWS_AS(caputo_derivative(grid, f, 1.0), std::invalid_argument);
}

TEST_CASE("caputo L1 scheme order from grid refinement") {
    // smooth target f(t) = t^2: derivative 2 t^{2-rho}/Gamma(3-rho)
    const double rho = 0.5;
    auto err_at_end = [&](double dt) {
        TimeGrid grid = TimeGrid::over(0.0, 1.0, dt);
        std::vector<double> f(grid.n_points);
        for (std::size_t k = 0; k < grid.n_points; ++k) f[k] = grid.time(k) * grid.time(k);
        auto d = caputo_derivative(grid, f, rho);
        return std::abs(d.back() - 2.0 / gamma_fn(3.0 - rho));
    };
    const double e1 = err_at_end(1.0 / 100.0);
    const double e2 = err_at_end(1.0 / 200.0);
    const double order = std::log2(e1 / e2);
    CHECK(order > 1.3);  // L1 scheme order 2 - rho = 1.5
}

TEST_CASE("mainardi-wright special values") {
    // closed form at nu = 1/2: exp(-l^2/4)/sqrt(pi)
    auto half = mainardi_wright(0.5, 1.0);
    CHECK(half.converged);
    CHECK(half.value ==
          Catch::Approx(std::exp(-0.25) / std::sqrt(std::numbers::pi)).epsilon(1e-12));
    // only the n = 0 term survives at l = 0
    auto zero = mainardi_wright(0.7, 0.0);
    CHECK(zero.value == Catch::Approx(1.0 / gamma_fn(0.3)).epsilon(1e-12));
    CHECK_THROWS_AS(mainardi_wright(1.2, 1.0), std::invalid_argument);
}

TEST_CASE("mainardi-wright is a probability density") {
    const double nu = 0.6;
    auto integrand = [&](double s) { return mainardi_wright(nu, s, 4000).value; };
    // nonnegative within the series noise floor
    for (double l = 0.0; l <= 5.0; l += 0.25) {
        auto m = mainardi_wright(nu, l, 4000);
        CHECK(m.value >= -(m.abs_error + 1e-12));
    }
    const double total = integrate_adaptive(integrand, 0.0, 7.0, 1e-7, 14);
    CHECK(total == Catch::Approx(1.0).margin(1e-4));
}

TEST_CASE("mainardi-wright flags series breakdown") {
    auto far = mainardi_wright(0.55, 60.0, 300);
    CHECK_FALSE(far.converged);
}
