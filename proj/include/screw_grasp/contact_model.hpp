#pragma once

// Friction-cone models for manipulator (soft finger, elliptic) and environment
// (point contact with friction, fixed support) contacts.
//
// Frame convention for every contact: the third column of `rotation` is the
// contact normal and points into the object. Local wrench components are
// ordered (f_t, f_o, f_n, m_t, m_o, m_n).

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "screw_grasp/errors.hpp"
#include "screw_grasp/screw_algebra.hpp"

namespace screw_grasp {

/// Absolute tolerance on the cone residual used by membership tests.
inline constexpr double kDefaultMembershipTol = 1e-8;

/// Soft finger contact, elliptic approximation.
struct SfceParams {
    double mu = 0.5;
    double e_t = 1.0;
    double e_o = 1.0;
    double e_n = 0.01;  // torsional characteristic length (m)
    /// Frictionless contact: f_t = f_o = m_n = 0, only the normal force remains.
    bool frictionless = false;

    void validate(const std::string& where = "sfce") const {
        if (frictionless) return;
        if (!(mu > 0.0) || !std::isfinite(mu)) throw PhysicalInvariantError(where + ".mu", "friction coefficient must be > 0");
        if (!(e_t > 0.0) || !std::isfinite(e_t)) throw PhysicalInvariantError(where + ".e_t", "must be > 0");
        if (!(e_o > 0.0) || !std::isfinite(e_o)) throw PhysicalInvariantError(where + ".e_o", "must be > 0");
        if (!(e_n > 0.0) || !std::isfinite(e_n)) throw PhysicalInvariantError(where + ".e_n", "must be > 0");
    }
};

/// Point contact with (anisotropic) friction.
struct PcwfParams {
    double mu = 0.5;
    double e_t = 1.0;
    double e_o = 1.0;
    bool frictionless = false;

    void validate(const std::string& where = "pcwf") const {
        if (frictionless) return;
        if (!(mu > 0.0) || !std::isfinite(mu)) throw PhysicalInvariantError(where + ".mu", "friction coefficient must be > 0");
        if (!(e_t > 0.0) || !std::isfinite(e_t)) throw PhysicalInvariantError(where + ".e_t", "must be > 0");
        if (!(e_o > 0.0) || !std::isfinite(e_o)) throw PhysicalInvariantError(where + ".e_o", "must be > 0");
    }
};

/// Bilateral support. Components with a value are prescribed (e.g. a spring
/// moment), the others are free reactions.
struct FixedSupport {
    std::array<std::optional<double>, 6> prescribed{};

    void validate(const std::string& where = "fixed_support") const {
        for (std::size_t i = 0; i < prescribed.size(); ++i) {
            if (prescribed[i] && !std::isfinite(*prescribed[i])) {
                throw PhysicalInvariantError(where + ".prescribed[" + std::to_string(i) + "]", "must be finite");
            }
        }
    }
};

using EnvironmentModel = std::variant<PcwfParams, FixedSupport>;

struct LocalContactWrench {
    double f_t = 0.0;
    double f_o = 0.0;
    double f_n = 0.0;
    double m_t = 0.0;
    double m_o = 0.0;
    double m_n = 0.0;

    Vec6 vector() const {
        Vec6 v;
        v << f_t, f_o, f_n, m_t, m_o, m_n;
        return v;
    }
    static LocalContactWrench from_vector(const Vec6& v) { return {v[0], v[1], v[2], v[3], v[4], v[5]}; }
};

struct ManipulatorContact {
    std::string label = "c";
    Mat3 rotation = Mat3::Identity();
    Vec3 position = Vec3::Zero();
    SfceParams cone;
    double f_n_max = 1.0;

    Vec3 normal() const { return rotation.col(2); }

    void validate(const std::string& where) const {
        if (!is_rotation(rotation)) throw InvalidRotation(where + ".rotation is not a rotation matrix");
        if (!position.allFinite()) throw PhysicalInvariantError(where + ".position", "must be finite");
        cone.validate(where + ".cone");
        if (!(f_n_max > 0.0) || !std::isfinite(f_n_max)) throw PhysicalInvariantError(where + ".f_n_max", "must be > 0");
    }
};

struct EnvironmentContact {
    std::string label = "e";
    Mat3 rotation = Mat3::Identity();
    Vec3 position = Vec3::Zero();
    EnvironmentModel model = PcwfParams{};
    std::optional<double> f_n_min;
    std::optional<double> f_n_max;

    Vec3 normal() const { return rotation.col(2); }
    bool is_fixed_support() const { return std::holds_alternative<FixedSupport>(model); }

    void validate(const std::string& where) const {
        if (!is_rotation(rotation)) throw InvalidRotation(where + ".rotation is not a rotation matrix");
        if (!position.allFinite()) throw PhysicalInvariantError(where + ".position", "must be finite");
        std::visit([&](const auto& m) { m.validate(where + ".model"); }, model);
        if (f_n_min && (!(*f_n_min >= 0.0) || !std::isfinite(*f_n_min))) {
            throw PhysicalInvariantError(where + ".f_n_min", "must be finite and >= 0");
        }
        if (f_n_max && (!(*f_n_max > 0.0) || !std::isfinite(*f_n_max))) {
            throw PhysicalInvariantError(where + ".f_n_max", "must be finite and > 0");
        }
        if (f_n_min && f_n_max && *f_n_min > *f_n_max) {
            throw PhysicalInvariantError(where + ".f_n_min", "exceeds f_n_max");
        }
    }
};

namespace detail {

inline void check_tol(double tol) {
    if (!(tol >= 0.0)) throw InvalidArgument("membership tolerance must be >= 0");
}

inline bool frictionless_contains(const LocalContactWrench& w, double tol) {
    return std::abs(w.f_t) <= tol && std::abs(w.f_o) <= tol && std::abs(w.m_n) <= tol && w.f_n >= -tol;
}

}  // namespace detail

inline bool sfce_contains(const SfceParams& p, const LocalContactWrench& w, double tol = kDefaultMembershipTol) {
    detail::check_tol(tol);
    if (std::abs(w.m_t) > tol || std::abs(w.m_o) > tol) return false;
    if (p.frictionless) return detail::frictionless_contains(w, tol);
    const double r = std::hypot(w.f_t / p.e_t, w.f_o / p.e_o, w.m_n / p.e_n) / p.mu;
    return r <= w.f_n + tol;
}

inline bool pcwf_contains(const PcwfParams& p, const LocalContactWrench& w, double tol = kDefaultMembershipTol) {
    detail::check_tol(tol);
    if (std::abs(w.m_t) > tol || std::abs(w.m_o) > tol || std::abs(w.m_n) > tol) return false;
    if (p.frictionless) return detail::frictionless_contains(w, tol);
    const double r = std::hypot(w.f_t / p.e_t, w.f_o / p.e_o) / p.mu;
    return r <= w.f_n + tol;
}

namespace detail {

// Pull a sample back inside the cone when rounding put it one ulp outside.
template <class Contains>
void shrink_into(LocalContactWrench& w, Contains&& contains) {
    while (!contains(w)) {
        constexpr double k = 1.0 - 0x1p-50;
        w.f_t *= k;
        w.f_o *= k;
        w.m_n *= k;
    }
}

}  // namespace detail

/// Extreme rays of an inscribed polyhedral approximation of the SFCE cone at
/// normal force `f_n`.
///
/// Samples lie on the boundary ellipsoid on a latitude/longitude grid of the
/// unit sphere in (f_t/e_t, f_o/e_o, m_n/e_n) / (mu f_n): `facets` equally
/// spaced longitudes on each ring, rings every pi/(2Q) in latitude with
/// Q = facets/4, poles added once Q >= 2. Doubling `facets` yields a superset
/// of the previous samples, so the hulls are nested. facets = 4 gives exactly
/// the four equatorial axis points.
inline std::vector<LocalContactWrench> discretize_sfce(const SfceParams& p, double f_n, int facets) {
    if (facets < 4) throw InvalidArgument("discretize_sfce: facets must be >= 4");
    if (!(f_n > 0.0)) throw InvalidArgument("discretize_sfce: f_n must be > 0");
    p.validate();
    if (p.frictionless) return {LocalContactWrench{0.0, 0.0, f_n, 0.0, 0.0, 0.0}};

    const int rings = facets / 4;
    const double r = p.mu * f_n;
    auto contains = [&](const LocalContactWrench& w) { return sfce_contains(p, w, 0.0); };
    std::vector<LocalContactWrench> out;
    for (int j = -(rings - 1); j <= rings - 1; ++j) {
        const double lat = j * std::numbers::pi / (2.0 * rings);
        for (int k = 0; k < facets; ++k) {
            const double lon = 2.0 * std::numbers::pi * k / facets;
            LocalContactWrench w;
            w.f_n = f_n;
            w.f_t = r * p.e_t * std::cos(lat) * std::cos(lon);
            w.f_o = r * p.e_o * std::cos(lat) * std::sin(lon);
            w.m_n = r * p.e_n * std::sin(lat);
            detail::shrink_into(w, contains);
            out.push_back(w);
        }
    }
    if (rings >= 2) {
        for (double s : {1.0, -1.0}) {
            LocalContactWrench w;
            w.f_n = f_n;
            w.m_n = s * r * p.e_n;
            detail::shrink_into(w, contains);
            out.push_back(w);
        }
    }
    return out;
}

/// Vertices of the regular `facets`-gon inscribed in the PCWF tangential ellipse at normal force `f_n`.
inline std::vector<LocalContactWrench> discretize_pcwf(const PcwfParams& p, double f_n, int facets) {
    if (facets < 4) throw InvalidArgument("discretize_pcwf: facets must be >= 4");
    if (!(f_n > 0.0)) throw InvalidArgument("discretize_pcwf: f_n must be > 0");
    p.validate();
    if (p.frictionless) return {LocalContactWrench{0.0, 0.0, f_n, 0.0, 0.0, 0.0}};

    const double r = p.mu * f_n;
    auto contains = [&](const LocalContactWrench& w) { return pcwf_contains(p, w, 0.0); };
    std::vector<LocalContactWrench> out;
    out.reserve(static_cast<std::size_t>(facets));
    for (int k = 0; k < facets; ++k) {
        const double a = 2.0 * std::numbers::pi * k / facets;
        LocalContactWrench w;
        w.f_n = f_n;
        w.f_t = r * p.e_t * std::cos(a);
        w.f_o = r * p.e_o * std::sin(a);
        detail::shrink_into(w, contains);
        out.push_back(w);
    }
    return out;
}

}  // namespace screw_grasp
