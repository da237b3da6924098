#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracsim/impulse.hpp"
#include "fracsim/resolvent.hpp"
#include "fracsim/spectral_model.hpp"

namespace fracsim {

/// Moment constants of the Burkholder-Davis-Gundy bound.
inline double bdg_cp(double p) { return std::pow(p / (p - 1.0), p); }

inline double bdg_Cp(double p) {
    return std::pow(0.5 * p * (p - 1.0), 0.5 * p) * std::pow(p / (p - 1.0), 0.5 * p * p);
}

namespace detail {

// pow with the convention 0^0 = 1, needed at p = 2 where one Holder exponent
// collapses to zero.
inline double pow_or_one(double base, double expo) {
    if (expo == 0.0) return 1.0;
    return std::pow(base, expo);
}

}  // namespace detail

/// Everything the smallness conditions and the a priori bound consume,
/// collected from a model, schedule, resolvent table, and control data.
struct HypothesisData {
    double S = 1.0;    // sup-norm estimate of the S family (grid maximum)
    double p = 2.0;    // moment order
    double ell = 1.0;  // horizon
    FractionalOrders orders;
    std::vector<double> t_bounds;  // t_{q+1} for q = 0..r (t_bounds[r] = ell)
    std::vector<ImpulseSchedule::Constants> impulse_constants;
    double mu1_integral = 0.0;  // int_0^ell mu_1
    double mu2_integral = 0.0;  // int_0^ell mu_2 (includes the covariance factor)
    double mu_sum_l1 = 0.0;     // ||mu_1 + mu_2||_{L^1}
    bool affine_bound_present = false;
    double E_norm = 1.0;
    double u_norm_lp = 0.0;  // ||u||_{L^p} of the deterministic control
    double z0_moment = 0.0;  // E||z0||^p
    double z1_moment = 0.0;  // E||z1||^p
    double c_p = 0.0, C_p = 0.0;

    std::size_t r() const { return impulse_constants.size(); }
};

/// Assemble hypothesis data.  The mu envelopes integrate to tolerance 1e-10;
/// the noise covariance enters mu_2 as (max variance)^{p/2} for linearly
/// dominated maps and (4 trace)^{p/2}-style uniform bounds for affine ones.
inline HypothesisData build_hypothesis_data(const SpectralModel& model,
                                            const ImpulseSchedule& schedule,
                                            const ResolventTable& table,
                                            double u_norm_lp = 0.0) {
    model.validate();
    schedule.validate();
    HypothesisData data;
    data.S = table.sup_norm_S;
    data.p = model.p;
    data.ell = schedule.ell;
    data.orders = model.orders;
    data.impulse_constants = schedule.constants(model.p);
    data.t_bounds.resize(schedule.r() + 1);
    for (std::size_t q = 0; q <= schedule.r(); ++q) data.t_bounds[q] = schedule.flow_end(q);

    const auto g1 = resolve_nonlinearity(model.g1);
    const auto g2 = resolve_nonlinearity(model.g2);
    const double p = model.p;
    auto mu1 = [&](double t) { return std::pow(g1.envelope(t), p); };
    // covariance factor: sum lam_n g(t,z_n)^2 <= env^2 max(lam) ||z||^2 for the
    // homogeneous kind, <= env^2 trace(Q) uniformly for the affine kind
    const double noise_factor = g2.bound_kind == BoundKind::affine
                                    ? std::pow(model.noise.trace(), p / 2.0)
                                    : std::pow(model.noise.max_variance(), p / 2.0);
    auto mu2 = [&](double t) { return std::pow(g2.envelope(t), p) * noise_factor; };
    data.mu1_integral = integrate_adaptive(mu1, 0.0, schedule.ell, 1e-10);
    data.mu2_integral = integrate_adaptive(mu2, 0.0, schedule.ell, 1e-10);
    data.mu_sum_l1 = data.mu1_integral + data.mu2_integral;
    data.affine_bound_present =
        g2.bound_kind == BoundKind::affine || g1.bound_kind == BoundKind::affine;

    data.E_norm = std::abs(model.e_gain);
    data.u_norm_lp = u_norm_lp;

    auto moment_of = [&](const InitialDataSpec& spec) {
        const auto c = initial_coefficients(spec, model.n_modes);
        double nsq = 0.0;
        for (double v : c) nsq += v * v;
        return std::pow(nsq, p / 2.0);
    };
    data.z0_moment = moment_of(model.z0);
    data.z1_moment = moment_of(model.z1);
    data.c_p = bdg_cp(p);
    data.C_p = bdg_Cp(p);
    return data;
}

namespace detail {

// sum_i beta_i (S / Gamma(1+alpha-gamma_i))^p t^{(1+alpha-gamma_i)p} / (1+p(alpha-gamma_i))
inline double multi_term_factor(const HypothesisData& d, double t, double s_const) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d.orders.n_terms(); ++i) {
        const double ag = d.orders.alpha - d.orders.gammas[i];
        acc += d.orders.betas[i] * std::pow(s_const / gamma_fn(1.0 + ag), d.p) *
               std::pow(t, (1.0 + ag) * d.p) / (1.0 + d.p * ag);
    }
    return acc;
}

// the two integral-term prefactors evaluated at upper time t
inline double drift_prefactor(const HypothesisData& d, double t) {
    const double p = d.p, a = d.orders.alpha;
    return std::pow(d.S / gamma_fn(1.0 + a), p) * std::pow((p - 1.0) / (a * p + p - 1.0), p) *
           std::pow(t, a * p + p - 1.0);
}

inline double noise_prefactor(const HypothesisData& d, double t) {
    const double p = d.p, a = d.orders.alpha;
    return d.C_p * std::pow(d.S / gamma_fn(1.0 + a), p) *
           pow_or_one((p - 2.0) / (2.0 * a * p + p - 2.0), (p - 2.0) / p) *
           std::pow(t, 0.5 * (2.0 * a * p + p - 2.0));
}

}  // namespace detail

/// Contraction constant of the restart part of the solution operator.
/// Returns 0 when there are no impulse windows (that part is then constant).
inline double contraction_constant_F1(const HypothesisData& d) {
    if (d.r() == 0) return 0.0;
    const double split = std::pow(3.0, d.p - 1.0);
    double worst = 0.0;
    for (const auto& c : d.impulse_constants) {
        const double bracket = std::pow(d.S, d.p) * c.a + std::pow(d.S, d.p) * d.ell * c.b +
                               detail::multi_term_factor(d, d.ell, d.S) * c.a;
        worst = std::max(worst, std::max(c.a, split * bracket));
    }
    return worst;
}

/// Growth constant of the full operator.  The drift/noise integral terms do
/// not depend on the window index; with no windows they are what remains.
inline double growth_constant_F(const HypothesisData& d) {
    const double split = std::pow(6.0, d.p - 1.0);
    const double mu_terms = split * detail::drift_prefactor(d, d.ell) * d.mu1_integral +
                            split * detail::noise_prefactor(d, d.ell) * d.mu2_integral;
    if (d.r() == 0) return mu_terms;
    double worst = 0.0;
    for (const auto& c : d.impulse_constants) {
        const double impulse_part = c.a_tilde + split * std::pow(d.S, d.p) * c.a_tilde +
                                    split * std::pow(d.S, d.p) * d.ell * c.b_tilde +
                                    split * detail::multi_term_factor(d, d.ell, d.S) * c.a_tilde;
        worst = std::max(worst, impulse_part + mu_terms);
    }
    return worst;
}

/// All constants of the a priori moment bound plus the smallness verdicts.
struct ConstantsReport {
    double c_p = 0.0, C_p = 0.0, S = 0.0;
    double contraction_f1 = 0.0;
    double growth_f = 0.0;
    double x1 = 0.0;
    std::vector<double> x1q, x2q, x3q;  // indexed by q = 0..r (x2q[0] unused)
    double chain_factor = 0.0;          // compounding factor across windows
    double delta = 0.0;                 // the moment bound
    bool contraction_ok = false;        // contraction_f1 < 1
    bool growth_ok = false;             // growth_f < 1
    bool impulse_growth_ok = false;     // every a_tilde < 1
    bool g2_bound_conforms = false;     // linear domination held for g2
    bool all_pass() const { return contraction_ok && growth_ok && impulse_growth_ok; }
};

/// The moment bound Delta: maximum of the first-interval Gronwall bound, the
/// window bounds a~/(1-a~), and the per-window chained Gronwall bounds.
/// Time-dependent factors inside window-independent constants are frozen at
/// their largest value (t = ell resp. t_{q+1}), the conservative reading.
inline ConstantsReport apriori_bound_delta(const HypothesisData& d) {
    ConstantsReport rep;
    rep.c_p = d.c_p;
    rep.C_p = d.C_p;
    rep.S = d.S;
    rep.contraction_f1 = contraction_constant_F1(d);
    rep.growth_f = growth_constant_F(d);
    rep.contraction_ok = rep.contraction_f1 < 1.0;
    rep.growth_ok = rep.growth_f < 1.0;
    rep.g2_bound_conforms = !d.affine_bound_present;

    const double split = std::pow(6.0, d.p - 1.0);
    const double Sp = std::pow(d.S, d.p);
    const double t1 = d.t_bounds.front();

    rep.impulse_growth_ok = true;
    for (const auto& c : d.impulse_constants)
        if (!(c.a_tilde < 1.0)) rep.impulse_growth_ok = false;
    if (!rep.impulse_growth_ok)
        throw std::runtime_error(
            "apriori_bound_delta: a window growth constant a~ is >= 1, the bound is undefined");

    rep.x1 = split * Sp * d.z0_moment + split * Sp * t1 * d.z1_moment +
             split * detail::multi_term_factor(d, t1, d.S) * d.z0_moment;

    const std::size_t r = d.r();
    rep.x1q.resize(r + 1);
    rep.x2q.resize(r + 1, 0.0);
    rep.x3q.resize(r + 1);
    for (std::size_t q = 0; q <= r; ++q) {
        const double tq1 = d.t_bounds[q];
        rep.x1q[q] = split * detail::drift_prefactor(d, tq1) * std::pow(d.E_norm, d.p) *
                     std::pow(d.u_norm_lp, d.p);
        // x3q couples both integral prefactors to ||mu1 + mu2||_{L1}
        const double p = d.p, a = d.orders.alpha;
        const double braces =
            std::pow((p - 1.0) / (a * p + p - 1.0), p) * std::pow(tq1, a * p + p - 1.0) +
            detail::pow_or_one((p - 2.0) / (2.0 * a * p + p - 2.0), (p - 2.0) / p) *
                std::pow(tq1, 0.5 * (2.0 * a * p + p - 2.0));
        rep.x3q[q] = split * std::pow(d.S / gamma_fn(1.0 + a), p) * braces * d.mu_sum_l1;
        if (q >= 1) {
            const auto& c = d.impulse_constants[q - 1];
            rep.x2q[q] = split * Sp * c.a_tilde + split * tq1 * Sp * c.b_tilde +
                         split * detail::multi_term_factor(d, tq1, d.S) * c.a_tilde;
        }
    }

    rep.chain_factor = 0.0;
    for (const auto& c : d.impulse_constants) {
        const double v = split * Sp *
                         (c.a_tilde + d.ell * c.b_tilde +
                          detail::multi_term_factor(d, d.ell, 1.0) * c.a_tilde);
        rep.chain_factor = std::max(rep.chain_factor, v);
    }

    double delta = (rep.x1 + rep.x1q[0]) * std::exp(rep.x3q[0]);
    for (std::size_t q = 1; q <= r; ++q) {
        const auto& c = d.impulse_constants[q - 1];
        delta = std::max(delta, c.a_tilde / (1.0 - c.a_tilde));
        delta = std::max(delta, (rep.x2q[q] + rep.x1q[q]) *
                                    std::pow(1.0 + rep.chain_factor, static_cast<double>(q)) *
                                    std::exp(rep.x3q[q]));
    }
    rep.delta = delta;
    return rep;
}

}  // namespace fracsim
