#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracsim/resolvent.hpp"

namespace fracsim {

/// Dirichlet-Laplacian eigenvalue on [0, pi]: lambda_n = -n^2, n >= 1.
inline double eigenvalue(int n) {
    if (n < 1) throw std::invalid_argument("eigenvalue: index must be >= 1");
    return -static_cast<double>(n) * static_cast<double>(n);
}

/// Normalized eigenfunction xi_n(x) = sqrt(2/pi) sin(n x).
inline double eigenfunction(int n, double x) {
    if (n < 1) throw std::invalid_argument("eigenfunction: index must be >= 1");
    return std::sqrt(2.0 / std::numbers::pi) * std::sin(static_cast<double>(n) * x);
}

/// L2 projection coefficients c_n = int_0^pi f(x) xi_n(x) dx by composite
/// Simpson.  panels = 0 picks a count that keeps the Gram matrix of the basis
/// orthonormal to ~1e-8 up to n_modes = 64.
inline std::vector<double> project(const std::function<double(double)>& f, int n_modes,
                                   std::size_t panels = 0) {
    if (n_modes < 1) throw std::invalid_argument("project: n_modes must be >= 1");
    if (panels == 0) panels = std::max<std::size_t>(2048, 256 * static_cast<std::size_t>(n_modes));
    if (panels % 2 != 0) ++panels;
    const double h = std::numbers::pi / static_cast<double>(panels);
    std::vector<double> fx(panels + 1);
    for (std::size_t i = 0; i <= panels; ++i) fx[i] = f(static_cast<double>(i) * h);
    std::vector<double> coeffs(n_modes, 0.0);
    for (int n = 1; n <= n_modes; ++n) {
        double acc = 0.0;
        for (std::size_t i = 0; i <= panels; ++i) {
            const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            acc += w * fx[i] * eigenfunction(n, static_cast<double>(i) * h);
        }
        coeffs[n - 1] = acc * h / 3.0;
    }
    return coeffs;
}

/// Point evaluation of the eigen-expansion sum c_n xi_n(x).
inline double reconstruct(std::span<const double> coeffs, double x) {
    double acc = 0.0;
    for (std::size_t n = 0; n < coeffs.size(); ++n)
        acc += coeffs[n] * eigenfunction(static_cast<int>(n) + 1, x);
    return acc;
}

enum class BoundKind { homogeneous, affine };

/// Registry key plus parameters for a drift/noise nonlinearity.
struct NonlinearitySpec {
    std::string name = "zero";
    std::map<std::string, double> params;

    double param_or(const std::string& key, double fallback) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }
};

/// Resolved registry entry.  scalar_map is the pointwise action v -> g(t, v);
/// envelope(t) dominates it: |g(t,v)| <= envelope(t)|v| for the homogeneous
/// kind and |g(t,v)| <= envelope(t) for the affine (uniformly bounded) kind.
struct NonlinearityEntry {
    std::string name;
    bool acts_on_coefficients = true;  // linear entries skip the collocation round trip
    std::function<double(double, double)> scalar_map;
    std::function<double(double)> envelope;
    BoundKind bound_kind = BoundKind::homogeneous;
};

inline NonlinearityEntry resolve_nonlinearity(const NonlinearitySpec& spec) {
    NonlinearityEntry e;
    e.name = spec.name;
    if (spec.name == "zero") {
        e.scalar_map = [](double, double) { return 0.0; };
        e.envelope = [](double) { return 0.0; };
        return e;
    }
    if (spec.name == "linear_decay") {
        const double amp = spec.param_or("amplitude", 1.0 / 3.0);
        const double rate = spec.param_or("rate", 1.0);
        e.scalar_map = [amp, rate](double t, double v) { return amp * std::exp(-rate * t) * v; };
        e.envelope = [amp, rate](double t) { return std::abs(amp) * std::exp(-rate * t); };
        return e;
    }
    if (spec.name == "exp_scale") {
        const double amp = spec.param_or("amplitude", std::exp(std::numbers::pi));
        const double rate = spec.param_or("rate", 4.0);
        e.scalar_map = [amp, rate](double t, double v) { return amp * std::exp(-rate * t) * v; };
        e.envelope = [amp, rate](double t) { return std::abs(amp) * std::exp(-rate * t); };
        return e;
    }
    if (spec.name == "saturating") {
        const double amp = spec.param_or("amplitude", 1.0);
        const double rate = spec.param_or("rate", 3.0);
        const double offset = spec.param_or("offset", 2.0);
        if (!(offset > 0.0))
            throw std::invalid_argument("saturating nonlinearity: offset must be positive");
        e.acts_on_coefficients = false;
        e.scalar_map = [amp, rate, offset](double t, double v) {
            return amp * std::exp(-rate * t) * v / (offset + std::abs(v));
        };
        // |v|/(offset+|v|) <= |v|/offset
        e.envelope = [amp, rate, offset](double t) {
            return std::abs(amp) * std::exp(-rate * t) / offset;
        };
        return e;
    }
    if (spec.name == "shifted_saturating") {
        const double shift = spec.param_or("shift", 2.0);
        const double amp = spec.param_or("amplitude", 1.0);
        const double rate = spec.param_or("rate", std::numbers::pi);
        e.acts_on_coefficients = false;
        e.scalar_map = [shift, amp, rate](double t, double v) {
            return (shift + amp * std::exp(-rate * t) * v) / (1.0 + std::abs(v));
        };
        // uniformly bounded, not linearly dominated: (shift + a v)/(1+|v|) <= max(shift, a)
        const double cap = std::max(std::abs(shift), std::abs(amp));
        e.envelope = [cap](double) { return cap; };
        e.bound_kind = BoundKind::affine;
        return e;
    }
    if (spec.name == "constant") {
        const double value = spec.param_or("value", 0.0);
        e.scalar_map = [value](double, double) { return value; };
        e.envelope = [value](double) { return std::abs(value); };
        e.bound_kind = BoundKind::affine;
        return e;
    }
    throw std::invalid_argument("unknown nonlinearity registry key: " + spec.name);
}

/// Pseudo-spectral application of a pointwise nonlinearity: reconstruct on a
/// 4N+1-point uniform collocation grid, apply the map, re-project with the
/// trapezoid rule (exact discrete sine orthogonality at this oversampling).
/// Entries acting on coefficients bypass the round trip.
inline std::vector<double> apply_nonlinearity(const NonlinearityEntry& entry, double t,
                                              std::span<const double> coeffs) {
    const std::size_t n_modes = coeffs.size();
    std::vector<double> out(n_modes, 0.0);
    if (entry.acts_on_coefficients) {
        for (std::size_t n = 0; n < n_modes; ++n) out[n] = entry.scalar_map(t, coeffs[n]);
        return out;
    }
    const std::size_t panels = 4 * n_modes;
    const double h = std::numbers::pi / static_cast<double>(panels);
    for (std::size_t i = 1; i < panels; ++i) {
        const double x = static_cast<double>(i) * h;
        const double g = entry.scalar_map(t, reconstruct(coeffs, x));
        for (std::size_t n = 0; n < n_modes; ++n)
            out[n] += g * eigenfunction(static_cast<int>(n) + 1, x);
    }
    for (std::size_t n = 0; n < n_modes; ++n) out[n] *= h;  // endpoint xi values vanish
    return out;
}

/// Mode-diagonal noise action used on the solver path: the scalar map applied
/// per coefficient, sigma_n = g(t, z_n).
inline std::vector<double> apply_noise_map(const NonlinearityEntry& entry, double t,
                                           std::span<const double> coeffs) {
    std::vector<double> out(coeffs.size());
    for (std::size_t n = 0; n < coeffs.size(); ++n) out[n] = entry.scalar_map(t, coeffs[n]);
    return out;
}

/// Finitely many independent scalar Wiener modes with variances >= 0.
struct NoiseModel {
    std::vector<double> mode_variances;

    void validate() const {
        for (double v : mode_variances)
            if (v < 0.0) throw std::invalid_argument("NoiseModel: variances must be >= 0");
    }
    double trace() const {
        double s = 0.0;
        for (double v : mode_variances) s += v;
        return s;
    }
    double max_variance() const {
        double m = 0.0;
        for (double v : mode_variances) m = std::max(m, v);
        return m;
    }
};

/// Named initial-data profiles plus an explicit-coefficients escape hatch.
struct InitialDataSpec {
    std::string name = "zero";
    std::map<std::string, double> params;
    std::vector<double> coeffs;  // used when name == "coeffs"

    double param_or(const std::string& key, double fallback) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }
};

inline std::vector<double> initial_coefficients(const InitialDataSpec& spec, int n_modes) {
    if (spec.name == "zero") return std::vector<double>(n_modes, 0.0);
    if (spec.name == "coeffs") {
        std::vector<double> c(n_modes, 0.0);
        for (std::size_t i = 0; i < spec.coeffs.size() && i < static_cast<std::size_t>(n_modes); ++i)
            c[i] = spec.coeffs[i];
        return c;
    }
    if (spec.name == "parabola") {
        const double amp = spec.param_or("amplitude", 1.0);
        return project([amp](double x) { return amp * x * (std::numbers::pi - x); }, n_modes);
    }
    if (spec.name == "sine") {
        const double amp = spec.param_or("amplitude", 1.0);
        const int k = static_cast<int>(spec.param_or("mode", 1.0));
        return project([amp, k](double x) { return amp * std::sin(k * x); }, n_modes);
    }
    if (spec.name == "x_plus_2") {
        return project([](double x) { return x + 2.0; }, n_modes);
    }
    throw std::invalid_argument("unknown initial data key: " + spec.name);
}

/// Truncated eigen-expansion model of the evolution problem.
struct SpectralModel {
    int n_modes = 1;
    double p = 2.0;  // moment order
    FractionalOrders orders;
    NonlinearitySpec g1, g2;
    InitialDataSpec z0, z1;
    NoiseModel noise;
    double e_gain = 1.0;  // scalar control operator E

    std::vector<double> eigenvalues() const {
        std::vector<double> lam(n_modes);
        for (int n = 1; n <= n_modes; ++n) lam[n - 1] = eigenvalue(n);
        return lam;
    }

    void validate() const {
        if (n_modes < 1) throw std::invalid_argument("SpectralModel: n_modes must be >= 1");
        if (!(p >= 2.0)) throw std::invalid_argument("SpectralModel: p must be >= 2");
        orders.validate();
        noise.validate();
        resolve_nonlinearity(g1);
        resolve_nonlinearity(g2);
        if (noise.mode_variances.size() > static_cast<std::size_t>(n_modes))
            throw std::invalid_argument("SpectralModel: more noise modes than state modes");
    }
};

}  // namespace fracsim
