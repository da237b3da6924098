#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fracsim/impulse.hpp"

using namespace fracsim;

namespace {

ImpulseSchedule example61_schedule() {
    ImpulseSchedule s;
    s.ell = 1.0;
    ImpulsePhase ph;
    ph.t_q = 0.20;
    ph.e_q = 0.90;
    ph.varsigma = {"scaled_sin", {{"amplitude", 0.25}}, {}};
    ph.varphi = {"scaled_sin", {{"amplitude", 1.0 / 3.0}}, {}};
    s.phases = {ph};
    return s;
}

ImpulseSchedule example62_schedule() {
    ImpulseSchedule s;
    s.ell = 1.0;
    ImpulsePhase ph;
    ph.t_q = 0.40;
    ph.e_q = 0.80;
    ph.varsigma = {"scaled_cos", {{"amplitude", 1.0}}, {}};
    ph.varphi = {"scaled_cos", {{"amplitude", 1.0 / 9.0}}, {}};
    s.phases = {ph};
    return s;
}

}  // namespace

TEST_CASE("schedule validation") {
    CHECK_NOTHROW(example61_schedule().validate());
    auto bad = example61_schedule();
    bad.phases[0].t_q = 0.95;  // t_1 > e_1
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    auto late = example61_schedule();
    late.phases[0].e_q = 1.0;  // window must end before ell
    CHECK_THROWS_AS(late.validate(), std::invalid_argument);
    ImpulseSchedule empty;
    empty.ell = 2.0;
    CHECK_NOTHROW(empty.validate());
}

TEST_CASE("locate follows the half-open conventions") {
    const auto s = example61_schedule();
    CHECK(locate(s, 0.5) == IntervalRef{IntervalKind::impulse, 1});
    CHECK(locate(s, 0.1) == IntervalRef{IntervalKind::flow, 0});
    CHECK(locate(s, 0.90) == IntervalRef{IntervalKind::impulse, 1});  // right endpoint in
    CHECK(locate(s, 0.20) == IntervalRef{IntervalKind::flow, 0});
    CHECK(locate(s, 0.95) == IntervalRef{IntervalKind::flow, 1});
    CHECK(locate(s, 0.0) == IntervalRef{IntervalKind::flow, 0});
    CHECK(locate(s, 1.0) == IntervalRef{IntervalKind::flow, 1});
    CHECK_THROWS_AS(locate(s, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(locate(s, 1.1), std::invalid_argument);
}

TEST_CASE("locate is total and partitions the horizon") {
    const auto s = example61_schedule();
    std::size_t flow0 = 0, imp1 = 0, flow1 = 0;
    for (int i = 0; i <= 10000; ++i) {
        const double t = static_cast<double>(i) / 10000.0;
        const auto ref = locate(s, t);
        if (ref == IntervalRef{IntervalKind::flow, 0})
            ++flow0;
        else if (ref == IntervalRef{IntervalKind::impulse, 1})
            ++imp1;
        else if (ref == IntervalRef{IntervalKind::flow, 1})
            ++flow1;
        else
            FAIL("unexpected interval descriptor");
    }
    CHECK(flow0 + imp1 + flow1 == 10001);
    CHECK(flow0 == 2001);  // [0, 0.20]
    CHECK(imp1 == 7000);   // (0.20, 0.90]
    CHECK(flow1 == 1000);  // (0.90, 1.0]
}

TEST_CASE("impulse_state closed-form values") {
    const auto s61 = example61_schedule();
    std::vector<double> e1 = {1.0, 0.0, 0.0};
    auto [z, zp] = impulse_state(s61, 1, 0.9, e1);
    CHECK(z[0] == Catch::Approx(0.25 * std::sin(0.9)).epsilon(1e-14));
    CHECK(z[1] == 0.0);
    CHECK(zp[0] == Catch::Approx(std::sin(0.9) / 3.0).epsilon(1e-14));

    std::vector<double> zero = {0.0, 0.0, 0.0};
    auto [z0, zp0] = impulse_state(s61, 1, 0.5, zero);
    for (double v : z0) CHECK(v == 0.0);
    for (double v : zp0) CHECK(v == 0.0);

    const auto s62 = example62_schedule();
    std::vector<double> e2 = {0.0, 1.0, 0.0};
    auto [z2, zp2] = impulse_state(s62, 1, 0.8, e2);
    CHECK(z2[1] == Catch::Approx(std::cos(0.8)).epsilon(1e-14));
    CHECK(zp2[1] == Catch::Approx(std::cos(0.8) / 9.0).epsilon(1e-14));

    CHECK_THROWS_AS(impulse_state(s61, 1, 0.1, e1), std::invalid_argument);
    CHECK_THROWS_AS(impulse_state(s61, 2, 0.5, e1), std::invalid_argument);
}

TEST_CASE("stored constants dominate the maps on random pairs") {
    const double p = 2.0;
    for (const auto& s : {example61_schedule(), example62_schedule()}) {
        const auto consts = s.constants(p);
        REQUIRE(consts.size() == 1);
        const auto& ph = s.phases[0];
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> amp(-4.0, 4.0);
        std::uniform_real_distribution<double> time(std::nextafter(ph.t_q, 1.0), ph.e_q);
        for (int trial = 0; trial < 100; ++trial) {
            const double t = time(rng);
            std::vector<double> y(4), z(4);
            for (std::size_t i = 0; i < 4; ++i) {
                y[i] = amp(rng);
                z[i] = amp(rng);
            }
            auto [sy, py] = impulse_state(s, 1, t, y);
            auto [sz, pz] = impulse_state(s, 1, t, z);
            double dy2 = 0.0, ds2 = 0.0, dp2 = 0.0, ny2 = 0.0, ns2 = 0.0, np2 = 0.0;
            for (std::size_t i = 0; i < 4; ++i) {
                dy2 += (y[i] - z[i]) * (y[i] - z[i]);
                ds2 += (sy[i] - sz[i]) * (sy[i] - sz[i]);
                dp2 += (py[i] - pz[i]) * (py[i] - pz[i]);
                ny2 += y[i] * y[i];
                ns2 += sy[i] * sy[i];
                np2 += py[i] * py[i];
            }
            // Lipschitz inequality with the stored constants
            CHECK(std::pow(ds2, p / 2.0) <= consts[0].a * std::pow(dy2, p / 2.0) * (1.0 + 1e-9));
            CHECK(std::pow(dp2, p / 2.0) <= consts[0].b * std::pow(dy2, p / 2.0) * (1.0 + 1e-9));
            // growth inequality
            CHECK(std::pow(ns2, p / 2.0) <=
                  consts[0].a_tilde * (1.0 + std::pow(ny2, p / 2.0)) * (1.0 + 1e-9));
            CHECK(std::pow(np2, p / 2.0) <=
                  consts[0].b_tilde * (1.0 + std::pow(ny2, p / 2.0)) * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("constants for linear maps equal the sampled sup to 1 percent") {
    const auto s = example61_schedule();
    const auto consts = s.constants(2.0);
    const double exact = std::pow(0.25 * std::sin(0.9), 2.0);
    CHECK(consts[0].a >= exact);
    CHECK(consts[0].a <= exact * 1.0201);
}

TEST_CASE("mode multiplier impulse maps") {
    ImpulseSchedule s;
    s.ell = 1.0;
    ImpulsePhase ph;
    ph.t_q = 0.3;
    ph.e_q = 0.6;
    ph.varsigma = {"mode_multipliers", {}, {0.5, -0.25}};
    ph.varphi = {"zero", {}, {}};
    s.phases = {ph};
    s.validate();
    std::vector<double> z = {2.0, 2.0, 2.0};
    auto [zs, zp] = impulse_state(s, 1, 0.5, z);
    CHECK(zs[0] == 1.0);
    CHECK(zs[1] == -0.5);
    CHECK(zs[2] == 0.0);  // multipliers beyond the list act as zero
    const auto consts = s.constants(2.0);
    CHECK(consts[0].a == Catch::Approx(0.25 * 1.01));
}
