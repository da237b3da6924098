#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fracsim {

/// Registry key plus parameters for one impulse map.  Maps are scalar
/// multipliers c(t) z, with an optional per-mode multiplier variant.
struct ImpulseMapSpec {
    std::string name = "zero";
    std::map<std::string, double> params;
    std::vector<double> mode_multipliers;  // used when name == "mode_multipliers"

    double param_or(const std::string& key, double fallback) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }
};

struct ImpulseMapEntry {
    std::function<double(double)> coefficient;  // c(t); empty for mode multipliers
    std::vector<double> mode_multipliers;
    bool per_mode = false;

    void apply(double t, std::span<const double> z, std::span<double> out) const {
        if (per_mode) {
            for (std::size_t n = 0; n < z.size(); ++n) {
                const double m = n < mode_multipliers.size() ? mode_multipliers[n] : 0.0;
                out[n] = m * z[n];
            }
            return;
        }
        const double c = coefficient(t);
        for (std::size_t n = 0; n < z.size(); ++n) out[n] = c * z[n];
    }

    double sup_coefficient(double t_from, double t_to) const {
        if (per_mode) {
            double m = 0.0;
            for (double v : mode_multipliers) m = std::max(m, std::abs(v));
            return m;
        }
        double m = 0.0;  // dense sampling over the half-open interval
        const int samples = 1000;
        for (int i = 1; i <= samples; ++i) {
            const double t = t_from + (t_to - t_from) * static_cast<double>(i) / samples;
            m = std::max(m, std::abs(coefficient(t)));
        }
        return m;
    }
};

inline ImpulseMapEntry resolve_impulse_map(const ImpulseMapSpec& spec) {
    ImpulseMapEntry e;
    if (spec.name == "zero") {
        e.coefficient = [](double) { return 0.0; };
        return e;
    }
    if (spec.name == "scaled_sin") {
        const double amp = spec.param_or("amplitude", 1.0);
        e.coefficient = [amp](double t) { return amp * std::sin(t); };
        return e;
    }
    if (spec.name == "scaled_cos") {
        const double amp = spec.param_or("amplitude", 1.0);
        e.coefficient = [amp](double t) { return amp * std::cos(t); };
        return e;
    }
    if (spec.name == "constant") {
        const double amp = spec.param_or("amplitude", 0.0);
        e.coefficient = [amp](double) { return amp; };
        return e;
    }
    if (spec.name == "mode_multipliers") {
        e.per_mode = true;
        e.mode_multipliers = spec.mode_multipliers;
        return e;
    }
    throw std::invalid_argument("unknown impulse map registry key: " + spec.name);
}

/// One non-instantaneous impulse window (t_q, e_q] with its state and
/// velocity maps.
struct ImpulsePhase {
    double t_q = 0.0;
    double e_q = 0.0;
    ImpulseMapSpec varsigma;  // state law on the window
    ImpulseMapSpec varphi;    // velocity law on the window
};

enum class IntervalKind { flow, impulse };

struct IntervalRef {
    IntervalKind kind = IntervalKind::flow;
    std::size_t q = 0;

    bool operator==(const IntervalRef&) const = default;
};

/// Partition 0 = e_0 = t_0 < t_1 < e_1 < ... < t_r < e_r < t_{r+1} = ell with
/// per-window impulse maps.
struct ImpulseSchedule {
    double ell = 1.0;
    std::vector<ImpulsePhase> phases;

    std::size_t r() const { return phases.size(); }

    /// Right endpoint t_{q+1} of flow interval q.
    double flow_end(std::size_t q) const {
        return q < phases.size() ? phases[q].t_q : ell;
    }
    /// Left endpoint e_q of flow interval q.
    double flow_start(std::size_t q) const {
        return q == 0 ? 0.0 : phases[q - 1].e_q;
    }

    void validate() const {
        if (!(ell > 0.0)) throw std::invalid_argument("ImpulseSchedule: ell must be positive");
        double prev = 0.0;
        for (std::size_t q = 0; q < phases.size(); ++q) {
            const auto& ph = phases[q];
            if (!(ph.t_q > prev))
                throw std::invalid_argument("ImpulseSchedule: t_" + std::to_string(q + 1) +
                                            " must exceed the previous boundary");
            if (!(ph.e_q > ph.t_q))
                throw std::invalid_argument("ImpulseSchedule: e_" + std::to_string(q + 1) +
                                            " must exceed t_" + std::to_string(q + 1));
            resolve_impulse_map(ph.varsigma);
            resolve_impulse_map(ph.varphi);
            prev = ph.e_q;
        }
        if (!(prev < ell))
            throw std::invalid_argument("ImpulseSchedule: last impulse window must end before ell");
    }

    /// Lipschitz/growth constants of the window maps at moment order p.  For
    /// the scalar-multiplier registry the Lipschitz and growth constants
    /// coincide: a = a~ = (sup |c|)^p, b = b~ likewise, inflated by 1%.
    struct Constants {
        double a = 0.0, b = 0.0, a_tilde = 0.0, b_tilde = 0.0;
    };

    std::vector<Constants> constants(double p) const {
        std::vector<Constants> out(phases.size());
        for (std::size_t q = 0; q < phases.size(); ++q) {
            const auto vs = resolve_impulse_map(phases[q].varsigma);
            const auto vp = resolve_impulse_map(phases[q].varphi);
            const double sup_s = vs.sup_coefficient(phases[q].t_q, phases[q].e_q);
            const double sup_p = vp.sup_coefficient(phases[q].t_q, phases[q].e_q);
            out[q].a = out[q].a_tilde = std::pow(sup_s, p) * 1.01;
            out[q].b = out[q].b_tilde = std::pow(sup_p, p) * 1.01;
        }
        return out;
    }
};

/// Interval membership of a time point, half-open conventions: flow q covers
/// (e_q, t_{q+1}] plus the origin, impulse q covers (t_q, e_q].
inline IntervalRef locate(const ImpulseSchedule& schedule, double t) {
    if (t < 0.0 || t > schedule.ell)
        throw std::invalid_argument("locate: t outside [0, ell]");
    if (t == 0.0) return {IntervalKind::flow, 0};
    for (std::size_t q = 0; q < schedule.phases.size(); ++q) {
        const auto& ph = schedule.phases[q];
        if (t <= ph.t_q) return {IntervalKind::flow, q};
        if (t <= ph.e_q) return {IntervalKind::impulse, q + 1};
    }
    return {IntervalKind::flow, schedule.phases.size()};
}

/// State and velocity assigned on impulse window q (1-based) at time t, from
/// the pre-impulse state z(t_q^-).
inline std::pair<std::vector<double>, std::vector<double>> impulse_state(
    const ImpulseSchedule& schedule, std::size_t q, double t,
    std::span<const double> z_at_tq_minus) {
    if (q < 1 || q > schedule.phases.size())
        throw std::invalid_argument("impulse_state: window index out of range");
    const auto& ph = schedule.phases[q - 1];
    if (!(t > ph.t_q && t <= ph.e_q))
        throw std::invalid_argument("impulse_state: t outside the impulse window");
    const auto vs = resolve_impulse_map(ph.varsigma);
    const auto vp = resolve_impulse_map(ph.varphi);
    std::vector<double> z(z_at_tq_minus.size()), zp(z_at_tq_minus.size());
    vs.apply(t, z_at_tq_minus, z);
    vp.apply(t, z_at_tq_minus, zp);
    return {std::move(z), std::move(zp)};
}

}  // namespace fracsim
