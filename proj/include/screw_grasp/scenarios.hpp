#pragma once

// Scenario files and the built-in parameterized scenarios (door handle,
// cuboid pivoting, cuboid sliding).
//
// Scenario files are JSON documents in SI units:
//
//   {
//     "schema_version": 1,
//     "units": "SI",
//     "name": "door_handle",
//     "object":   {"description": ..., "dimensions": [L, W, H], "weight": N},   optional
//     "family":   {"type": "door_handle", "params": {"x_c": 0.0, ...}},         optional
//     "body_frame": "b",
//     "manipulator_contacts": [{"label", "position", "rotation", "cone": {"mu", "e_t", "e_o", "e_n"}, "f_n_max"}],
//     "environment_contacts": [{"label", "position", "rotation",
//                               "model": {"type": "pcwf", "mu", "e_t", "e_o"}
//                                      | {"type": "fixed_support", "prescribed": {"m_n": 0.0, ...}},
//                               "f_n_min", "f_n_max"}],
//     "external_wrenches": [{"label", "force", "moment", "application_point"}],
//     "torque_model": {"jacobian": [[...]], "tau_g", "tau_min", "tau_max", "dofs_per_manipulator"},  optional
//     "tasks": [{"label", "l", "q", "pitch": number | "inf"}]
//   }
//
// Rotations are row-major 3x3 arrays whose third column is the inward contact
// normal. The first task is the default one. When a "family" block is
// present, parameter overrides regenerate the scenario from its generator.

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "screw_grasp/contact_model.hpp"
#include "screw_grasp/errors.hpp"
#include "screw_grasp/grasp_problem.hpp"
#include "screw_grasp/screw_algebra.hpp"

namespace screw_grasp {

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------- generators

struct DoorHandleParams {
    double L = 0.20;
    double H = 0.04;
    double W = 0.03;
    double mu_c = 0.20;
    double e_t = 1.0;
    double e_o = 1.0;
    double e_n = 0.03;
    double f_n_max = 20.0;
    double k_t = 0.6;  // N m / rad
    double x_c = 0.0;
    double theta = 0.0;

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) throw PhysicalInvariantError(std::string("door_handle.") + name, "must be > 0");
        };
        positive(L, "L");
        positive(H, "H");
        positive(W, "W");
        positive(mu_c, "mu_c");
        positive(e_t, "e_t");
        positive(e_o, "e_o");
        positive(e_n, "e_n");
        positive(f_n_max, "f_n_max");
        if (!(k_t >= 0.0) || !std::isfinite(k_t)) throw PhysicalInvariantError("door_handle.k_t", "must be >= 0");
        if (!(x_c >= 0.0 && x_c <= L)) throw PhysicalInvariantError("door_handle.x_c", "must lie in [0, L]");
        if (!std::isfinite(theta)) throw PhysicalInvariantError("door_handle.theta", "must be finite");
    }
};

struct CuboidParams {
    double weight = 9.81;
    double L = 0.3;
    double W = 0.2;
    double H = 0.1;
    double mu_e = 0.25;
    double mu_c = 0.15;
    double e_t = 1.0;
    double e_o = 1.0;
    double e_n = 0.06;
    double f_n_max_1 = 25.0;
    double f_n_max_2 = 30.0;
    double alpha = 50.0 * std::numbers::pi / 180.0;
    double x_E = 0.4 * 0.3;

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) throw PhysicalInvariantError(std::string("cuboid.") + name, "must be > 0");
        };
        positive(L, "L");
        positive(W, "W");
        positive(H, "H");
        positive(mu_e, "mu_e");
        positive(mu_c, "mu_c");
        positive(e_t, "e_t");
        positive(e_o, "e_o");
        positive(e_n, "e_n");
        positive(f_n_max_1, "f_n_max_1");
        positive(f_n_max_2, "f_n_max_2");
        if (!(weight >= 0.0) || !std::isfinite(weight)) throw PhysicalInvariantError("cuboid.weight", "must be >= 0");
        if (!(x_E > 0.0 && x_E <= L / 2.0)) throw PhysicalInvariantError("cuboid.x_E", "must lie in (0, L/2]");
        if (!std::isfinite(alpha)) throw PhysicalInvariantError("cuboid.alpha", "must be finite");
    }
};

enum class CuboidTask { Pivot, Slide };

namespace detail {

// Contact frame [t, o, n] for a finger pressing on the +y face (normal -y)
// or on the -y face (normal +y), with t along body x.
inline Mat3 frame_on_plus_y_face() {
    Mat3 R;
    R.col(0) = Vec3::UnitX();
    R.col(1) = Vec3::UnitZ();
    R.col(2) = -Vec3::UnitY();
    return R;
}

inline Mat3 frame_on_minus_y_face() {
    Mat3 R;
    R.col(0) = Vec3::UnitX();
    R.col(1) = -Vec3::UnitZ();
    R.col(2) = Vec3::UnitY();
    return R;
}

inline TaskScrew pure_moment_screw(const Vec3& l, const Vec3& q = Vec3::Zero()) {
    TaskScrew s;
    s.l = l;
    s.q = q;
    s.pitch = Pitch::infinite();
    return s;
}

}  // namespace detail

/// Door-handle turning task. Body frame {b} at the hinge, handle along +x,
/// turning by theta about -z (the task axis). Two antipodal soft fingers
/// squeeze the handle's +-y faces at distance x_c from the hinge; the hinge
/// is a fixed support whose moment about the axis is the return spring,
/// -k_t theta about the task axis (+k_t theta about body z).
inline GraspProblem make_door_handle(const DoorHandleParams& d) {
    d.validate();
    const Mat3 Rh = rotation_about(Vec3::UnitZ(), -d.theta);
    const SfceParams cone{d.mu_c, d.e_t, d.e_o, d.e_n, false};

    GraspProblem p;
    p.name = "door_handle";
    ManipulatorContact c1;
    c1.label = "c1";
    c1.rotation = Rh * detail::frame_on_plus_y_face();
    c1.position = Rh * Vec3(d.x_c, d.W / 2.0, 0.0);
    c1.cone = cone;
    c1.f_n_max = d.f_n_max;
    ManipulatorContact c2 = c1;
    c2.label = "c2";
    c2.rotation = Rh * detail::frame_on_minus_y_face();
    c2.position = Rh * Vec3(d.x_c, -d.W / 2.0, 0.0);
    p.manipulator_contacts = {c1, c2};

    EnvironmentContact hinge;
    hinge.label = "hinge";
    FixedSupport fs;
    fs.prescribed[5] = d.k_t * d.theta;
    hinge.model = fs;
    p.environment_contacts = {hinge};

    p.task = detail::pure_moment_screw(-Vec3::UnitZ());
    return p;
}

/// World-to-body rotation of the tilted cuboid: the +x end is raised by alpha
/// about the support edge.
inline Mat3 cuboid_tilt(double alpha) { return rotation_about(Vec3::UnitY(), -alpha); }

/// S1: pure moment about the support edge (body +y).
inline TaskScrew cuboid_pivot_screw(const CuboidParams& c) {
    return detail::pure_moment_screw(Vec3::UnitY(), Vec3(-c.L / 2.0, 0.0, -c.H / 2.0));
}

/// S2: pure force through the centroid along world X, the horizontal
/// direction pointing from the raised end toward the support edge.
inline TaskScrew cuboid_slide_screw(const CuboidParams& c) {
    TaskScrew s;
    s.l = -(cuboid_tilt(c.alpha).transpose() * Vec3::UnitX());
    s.q = Vec3::Zero();
    s.pitch = Pitch::finite(0.0);
    return s;
}

/// Cuboid resting on one bottom edge (x = -L/2, z = -H/2), tilted by alpha,
/// held by two soft fingers on the +-y faces at x = x_E. Body frame at the
/// centroid. The edge is two point contacts with friction at its endpoints.
inline GraspProblem make_cuboid(const CuboidParams& c, CuboidTask task) {
    c.validate();
    const Mat3 Rt = cuboid_tilt(c.alpha).transpose();  // world -> body

    GraspProblem p;
    p.name = task == CuboidTask::Pivot ? "cuboid_pivot" : "cuboid_slide";
    ManipulatorContact c1;
    c1.label = "c1";
    c1.rotation = detail::frame_on_plus_y_face();
    c1.position = Vec3(c.x_E, c.W / 2.0, 0.0);
    c1.cone = SfceParams{c.mu_c, c.e_t, c.e_o, c.e_n, false};
    c1.f_n_max = c.f_n_max_1;
    ManipulatorContact c2 = c1;
    c2.label = "c2";
    c2.rotation = detail::frame_on_minus_y_face();
    c2.position = Vec3(c.x_E, -c.W / 2.0, 0.0);
    c2.f_n_max = c.f_n_max_2;
    p.manipulator_contacts = {c1, c2};

    Mat3 Re;
    Re.col(2) = Rt * Vec3::UnitZ();
    Re.col(0) = Rt * Vec3::UnitX();
    Re.col(1) = Re.col(2).cross(Re.col(0));
    EnvironmentContact e1;
    e1.label = "e1";
    e1.rotation = Re;
    e1.position = Vec3(-c.L / 2.0, c.W / 2.0, -c.H / 2.0);
    e1.model = PcwfParams{c.mu_e, c.e_t, c.e_o, false};
    EnvironmentContact e2 = e1;
    e2.label = "e2";
    e2.position = Vec3(-c.L / 2.0, -c.W / 2.0, -c.H / 2.0);
    p.environment_contacts = {e1, e2};

    ExternalWrench g;
    g.label = "gravity";
    g.force = Rt * Vec3(0.0, 0.0, -c.weight);
    p.external = {g};

    p.task = task == CuboidTask::Pivot ? cuboid_pivot_screw(c) : cuboid_slide_screw(c);
    return p;
}

// ---------------------------------------------------------------- families

enum class Dimension { Length, Angle, Force, Dimensionless, Stiffness };

struct FamilyParam {
    std::string name;
    Dimension dimension = Dimension::Dimensionless;
    double value = 0.0;
};

/// A generator plus its parameter values; `type` is one of builtin_names().
struct ScenarioFamily {
    std::string type;
    std::vector<FamilyParam> params;

    const FamilyParam* find(std::string_view name) const {
        for (const auto& p : params) {
            if (p.name == name) return &p;
        }
        return nullptr;
    }
    double get(std::string_view name) const {
        const auto* p = find(name);
        if (!p) throw InvalidArgument("unknown parameter '" + std::string(name) + "' for " + type);
        return p->value;
    }
    void set(std::string_view name, double value) {
        for (auto& p : params) {
            if (p.name == name) {
                p.value = value;
                return;
            }
        }
        throw InvalidArgument("unknown parameter '" + std::string(name) + "' for " + type + " (known: " + known() + ")");
    }
    std::string known() const {
        std::string s;
        for (const auto& p : params) s += (s.empty() ? "" : ", ") + p.name;
        return s;
    }
};

inline const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names = {"door_handle", "cuboid_pivot", "cuboid_slide"};
    return names;
}

inline ScenarioFamily default_family(std::string_view type) {
    using D = Dimension;
    ScenarioFamily f;
    f.type = std::string(type);
    if (type == "door_handle") {
        const DoorHandleParams d;
        f.params = {{"L", D::Length, d.L},         {"H", D::Length, d.H},          {"W", D::Length, d.W},
                    {"mu_c", D::Dimensionless, d.mu_c}, {"e_t", D::Dimensionless, d.e_t}, {"e_o", D::Dimensionless, d.e_o},
                    {"e_n", D::Length, d.e_n},     {"f_n_max", D::Force, d.f_n_max}, {"k_t", D::Stiffness, d.k_t},
                    {"x_c", D::Length, d.x_c},     {"theta", D::Angle, d.theta}};
    } else if (type == "cuboid_pivot" || type == "cuboid_slide") {
        const CuboidParams c;
        f.params = {{"weight", D::Force, c.weight},       {"L", D::Length, c.L},
                    {"W", D::Length, c.W},                {"H", D::Length, c.H},
                    {"mu_e", D::Dimensionless, c.mu_e},   {"mu_c", D::Dimensionless, c.mu_c},
                    {"e_t", D::Dimensionless, c.e_t},     {"e_o", D::Dimensionless, c.e_o},
                    {"e_n", D::Length, c.e_n},            {"f_n_max_1", D::Force, c.f_n_max_1},
                    {"f_n_max_2", D::Force, c.f_n_max_2}, {"alpha", D::Angle, c.alpha},
                    {"x_E", D::Length, c.x_E}};
    } else {
        throw InvalidArgument("unknown scenario family '" + std::string(type) + "' (known: door_handle, cuboid_pivot, cuboid_slide)");
    }
    return f;
}

inline DoorHandleParams door_handle_params(const ScenarioFamily& f) {
    DoorHandleParams d;
    d.L = f.get("L");
    d.H = f.get("H");
    d.W = f.get("W");
    d.mu_c = f.get("mu_c");
    d.e_t = f.get("e_t");
    d.e_o = f.get("e_o");
    d.e_n = f.get("e_n");
    d.f_n_max = f.get("f_n_max");
    d.k_t = f.get("k_t");
    d.x_c = f.get("x_c");
    d.theta = f.get("theta");
    return d;
}

inline CuboidParams cuboid_params(const ScenarioFamily& f) {
    CuboidParams c;
    c.weight = f.get("weight");
    c.L = f.get("L");
    c.W = f.get("W");
    c.H = f.get("H");
    c.mu_e = f.get("mu_e");
    c.mu_c = f.get("mu_c");
    c.e_t = f.get("e_t");
    c.e_o = f.get("e_o");
    c.e_n = f.get("e_n");
    c.f_n_max_1 = f.get("f_n_max_1");
    c.f_n_max_2 = f.get("f_n_max_2");
    c.alpha = f.get("alpha");
    c.x_E = f.get("x_E");
    return c;
}

/// Parses "<number>[unit]". Units: deg | rad for angles, m | L (fraction of
/// the family's L) for lengths, N for forces. A bare number is SI.
inline double parse_quantity(std::string_view text, Dimension dim, std::optional<double> L = std::nullopt) {
    const auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    };
    const std::string_view t = trim(text);
    double v = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr == first) throw InvalidArgument("cannot parse quantity '" + std::string(text) + "'");
    if (!std::isfinite(v)) throw InvalidArgument("quantity '" + std::string(text) + "' is not finite");
    const std::string_view unit = trim(std::string_view(ptr, static_cast<std::size_t>(last - ptr)));
    if (unit.empty()) return v;
    auto wrong = [&]() { return InvalidArgument("unit '" + std::string(unit) + "' does not fit quantity '" + std::string(text) + "'"); };
    if (unit == "deg") {
        if (dim != Dimension::Angle) throw wrong();
        return v * std::numbers::pi / 180.0;
    }
    if (unit == "rad") {
        if (dim != Dimension::Angle) throw wrong();
        return v;
    }
    if (unit == "m") {
        if (dim != Dimension::Length) throw wrong();
        return v;
    }
    if (unit == "L") {
        if (dim != Dimension::Length) throw wrong();
        if (!L) throw InvalidArgument("'L' suffix needs a scenario with a length L");
        return v * *L;
    }
    if (unit == "N") {
        if (dim != Dimension::Force) throw wrong();
        return v;
    }
    throw InvalidArgument("unknown unit '" + std::string(unit) + "' in '" + std::string(text) + "'");
}

/// Sets a family parameter from text such as "50deg" or "0.4L".
inline void set_param_text(ScenarioFamily& f, std::string_view name, std::string_view text) {
    const auto* p = f.find(name);
    if (!p) throw InvalidArgument("unknown parameter '" + std::string(name) + "' for " + f.type + " (known: " + f.known() + ")");
    const auto* L = f.find("L");
    f.set(name, parse_quantity(text, p->dimension, L ? std::optional<double>(L->value) : std::nullopt));
}

// ---------------------------------------------------------------- scenario

struct ObjectInfo {
    std::string description;
    Vec3 dimensions = Vec3::Zero();
    double weight = 0.0;
};

struct LabeledTask {
    std::string label;
    TaskScrew screw;
};

struct Scenario {
    std::string name;
    std::optional<ObjectInfo> object;
    std::optional<ScenarioFamily> family;
    /// problem.task is the default (first) task.
    GraspProblem problem;
    std::vector<LabeledTask> tasks;

    /// Looks up a task; an empty label selects the default one.
    const LabeledTask& task(std::string_view label = {}) const {
        if (tasks.empty()) throw InvalidArgument("scenario '" + name + "' defines no tasks");
        if (label.empty()) return tasks.front();
        for (const auto& t : tasks) {
            if (t.label == label) return t;
        }
        std::string known;
        for (const auto& t : tasks) known += (known.empty() ? "" : ", ") + t.label;
        throw InvalidArgument("unknown task '" + std::string(label) + "' (known: " + known + ")");
    }

    GraspProblem problem_for(std::string_view label = {}) const {
        GraspProblem p = problem;
        p.task = task(label).screw;
        return p;
    }
};

/// Builds a scenario from a generator family.
inline Scenario make_scenario(const ScenarioFamily& f) {
    Scenario s;
    s.name = f.type;
    s.family = f;
    if (f.type == "door_handle") {
        const DoorHandleParams d = door_handle_params(f);
        s.problem = make_door_handle(d);
        s.object = ObjectInfo{"door handle turned about its hinge", Vec3(d.L, d.W, d.H), 0.0};
        s.tasks = {{"S", s.problem.task}};
    } else if (f.type == "cuboid_pivot" || f.type == "cuboid_slide") {
        const CuboidParams c = cuboid_params(f);
        const bool pivot = f.type == "cuboid_pivot";
        s.problem = make_cuboid(c, pivot ? CuboidTask::Pivot : CuboidTask::Slide);
        s.object = ObjectInfo{"cuboid resting on a support edge", Vec3(c.L, c.W, c.H), c.weight};
        const LabeledTask s1{"S1", cuboid_pivot_screw(c)};
        const LabeledTask s2{"S2", cuboid_slide_screw(c)};
        s.tasks = pivot ? std::vector<LabeledTask>{s1, s2} : std::vector<LabeledTask>{s2, s1};
    } else {
        throw InvalidArgument("unknown scenario family '" + f.type + "'");
    }
    s.problem.name = s.name;
    return s;
}

/// Regenerates a family-backed scenario with `overrides` (name, text) applied.
inline Scenario with_overrides(const Scenario& s, const std::vector<std::pair<std::string, std::string>>& overrides) {
    if (overrides.empty()) return s;
    if (!s.family) throw InvalidArgument("scenario '" + s.name + "' has no parameter family, so parameters cannot be set");
    ScenarioFamily f = *s.family;
    for (const auto& [k, v] : overrides) set_param_text(f, k, v);
    Scenario out = make_scenario(f);
    out.name = s.name;
    out.problem.name = s.name;
    return out;
}

inline Scenario builtin_scenario(std::string_view name,
                                 const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
    return with_overrides(make_scenario(default_family(name)), overrides);
}

// ---------------------------------------------------------------- JSON I/O

namespace detail {

using Json = nlohmann::ordered_json;

inline constexpr double kLoadRotationTol = 1e-6;
// Below this deviation values are kept bit-for-bit so save/load round trips are exact.
inline constexpr double kRenormalizeThreshold = 1e-13;

inline std::string field(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

inline std::string item(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

inline void expect_object(const Json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path.empty() ? "<root>" : path, "expected an object");
}

inline void check_keys(const Json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
    expect_object(j, path);
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || a == k;
        if (!ok) throw SchemaError(field(path, k), "unknown field");
    }
}

inline const Json& require(const Json& j, const std::string& path, std::string_view key) {
    const auto it = j.find(std::string(key));
    if (it == j.end()) throw SchemaError(field(path, key), "missing required field");
    return *it;
}

inline const Json* optional_field(const Json& j, std::string_view key) {
    const auto it = j.find(std::string(key));
    return it == j.end() ? nullptr : &*it;
}

inline double number(const Json& v, const std::string& path) {
    if (!v.is_number()) throw SchemaError(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw SchemaError(path, "expected a finite number");
    return d;
}

inline std::string text(const Json& v, const std::string& path) {
    if (!v.is_string()) throw SchemaError(path, "expected a string");
    return v.get<std::string>();
}

inline bool boolean(const Json& v, const std::string& path) {
    if (!v.is_boolean()) throw SchemaError(path, "expected true or false");
    return v.get<bool>();
}

inline Eigen::VectorXd vector(const Json& v, const std::string& path, int expected = -1) {
    if (!v.is_array()) throw SchemaError(path, "expected an array of numbers");
    if (expected >= 0 && static_cast<int>(v.size()) != expected) {
        throw SchemaError(path, "expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = number(v[i], item(path, i));
    return out;
}

inline Vec3 vec3(const Json& v, const std::string& path) { return vector(v, path, 3); }

inline Eigen::MatrixXd matrix(const Json& v, const std::string& path, int rows = -1, int cols = -1) {
    if (!v.is_array()) throw SchemaError(path, "expected an array of rows");
    if (rows >= 0 && static_cast<int>(v.size()) != rows) {
        throw SchemaError(path, "expected " + std::to_string(rows) + " rows, got " + std::to_string(v.size()));
    }
    if (v.empty()) return Eigen::MatrixXd(0, std::max(cols, 0));
    const int c = cols >= 0 ? cols : static_cast<int>(v[0].is_array() ? v[0].size() : 0);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(v.size()), c);
    for (std::size_t i = 0; i < v.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = vector(v[i], item(path, i), c).transpose();
    return out;
}

inline Mat3 rotation(const Json& v, const std::string& path) {
    Mat3 R = matrix(v, path, 3, 3);
    const double err = rotation_error(R);
    if (!(err <= kLoadRotationTol) || std::abs(R.determinant() - 1.0) > 10.0 * kLoadRotationTol) {
        throw PhysicalInvariantError(path, "not a rotation matrix within 1e-6");
    }
    if (err > kRenormalizeThreshold) R = orthonormalize(R);
    return R;
}

inline double no_negative_zero(double v) { return v == 0.0 ? 0.0 : v; }

inline Json to_json(const Vec3& v) {
    return Json::array({no_negative_zero(v.x()), no_negative_zero(v.y()), no_negative_zero(v.z())});
}

inline Json to_json(const Eigen::VectorXd& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(no_negative_zero(v[i]));
    return a;
}

inline Json to_json(const Eigen::MatrixXd& M) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) a.push_back(to_json(Eigen::VectorXd(M.row(i).transpose())));
    return a;
}

inline Json rotation_json(const Mat3& R) { return to_json(Eigen::MatrixXd(R)); }

inline const std::array<std::string_view, 6> kComponentKeys = {"f_t", "f_o", "f_n", "m_t", "m_o", "m_n"};

template <class F>
auto with_context(const std::string& label, F&& f) {
    try {
        return f();
    } catch (const PhysicalInvariantError& e) {
        throw PhysicalInvariantError(e.field(), std::string(e.what()).substr(e.field().size() + 2) + " (contact '" + label + "')");
    }
}

inline ManipulatorContact parse_manipulator(const Json& j, const std::string& path) {
    check_keys(j, path, {"label", "position", "rotation", "cone", "f_n_max"});
    ManipulatorContact c;
    c.label = text(require(j, path, "label"), field(path, "label"));
    c.position = vec3(require(j, path, "position"), field(path, "position"));
    c.rotation = rotation(require(j, path, "rotation"), field(path, "rotation"));
    const std::string cp = field(path, "cone");
    const Json& cone = require(j, path, "cone");
    check_keys(cone, cp, {"mu", "e_t", "e_o", "e_n", "frictionless"});
    if (const auto* f = optional_field(cone, "frictionless")) c.cone.frictionless = boolean(*f, field(cp, "frictionless"));
    if (!c.cone.frictionless || cone.contains("mu")) {
        c.cone.mu = number(require(cone, cp, "mu"), field(cp, "mu"));
        c.cone.e_t = number(require(cone, cp, "e_t"), field(cp, "e_t"));
        c.cone.e_o = number(require(cone, cp, "e_o"), field(cp, "e_o"));
        c.cone.e_n = number(require(cone, cp, "e_n"), field(cp, "e_n"));
    }
    c.f_n_max = number(require(j, path, "f_n_max"), field(path, "f_n_max"));
    with_context(c.label, [&] {
        c.validate(path);
        return 0;
    });
    return c;
}

inline EnvironmentContact parse_environment(const Json& j, const std::string& path) {
    check_keys(j, path, {"label", "position", "rotation", "model", "f_n_min", "f_n_max"});
    EnvironmentContact c;
    c.label = text(require(j, path, "label"), field(path, "label"));
    c.position = vec3(require(j, path, "position"), field(path, "position"));
    c.rotation = rotation(require(j, path, "rotation"), field(path, "rotation"));
    const std::string mp = field(path, "model");
    const Json& model = require(j, path, "model");
    expect_object(model, mp);
    const std::string type = text(require(model, mp, "type"), field(mp, "type"));
    if (type == "pcwf") {
        check_keys(model, mp, {"type", "mu", "e_t", "e_o", "frictionless"});
        PcwfParams pc;
        if (const auto* f = optional_field(model, "frictionless")) pc.frictionless = boolean(*f, field(mp, "frictionless"));
        if (!pc.frictionless || model.contains("mu")) {
            pc.mu = number(require(model, mp, "mu"), field(mp, "mu"));
            pc.e_t = number(require(model, mp, "e_t"), field(mp, "e_t"));
            pc.e_o = number(require(model, mp, "e_o"), field(mp, "e_o"));
        }
        c.model = pc;
    } else if (type == "fixed_support") {
        check_keys(model, mp, {"type", "prescribed"});
        FixedSupport fs;
        if (const auto* pr = optional_field(model, "prescribed")) {
            const std::string pp = field(mp, "prescribed");
            expect_object(*pr, pp);
            for (const auto& [k, v] : pr->items()) {
                std::size_t idx = 6;
                for (std::size_t i = 0; i < 6; ++i) {
                    if (kComponentKeys[i] == k) idx = i;
                }
                if (idx == 6) throw SchemaError(field(pp, k), "unknown wrench component (expected f_t, f_o, f_n, m_t, m_o, m_n)");
                fs.prescribed[idx] = number(v, field(pp, k));
            }
        }
        c.model = fs;
    } else {
        throw SchemaError(field(mp, "type"), "unknown environment model '" + type + "' (expected pcwf or fixed_support)");
    }
    if (const auto* v = optional_field(j, "f_n_min")) c.f_n_min = number(*v, field(path, "f_n_min"));
    if (const auto* v = optional_field(j, "f_n_max")) c.f_n_max = number(*v, field(path, "f_n_max"));
    with_context(c.label, [&] {
        c.validate(path);
        return 0;
    });
    return c;
}

inline TaskScrew parse_screw(const Json& j, const std::string& path) {
    TaskScrew s;
    Vec3 l = vec3(require(j, path, "l"), field(path, "l"));
    const double dev = std::abs(l.norm() - 1.0);
    if (!(dev <= kLoadRotationTol)) throw PhysicalInvariantError(field(path, "l"), "must be a unit vector within 1e-6");
    if (dev > kRenormalizeThreshold) l.normalize();
    s.l = l;
    if (const auto* q = optional_field(j, "q")) s.q = vec3(*q, field(path, "q"));
    const Json& h = require(j, path, "pitch");
    if (h.is_string()) {
        const std::string hs = h.get<std::string>();
        if (hs != "inf" && hs != "infinite") throw SchemaError(field(path, "pitch"), "expected a number or \"inf\"");
        s.pitch = Pitch::infinite();
    } else {
        s.pitch = Pitch::finite(number(h, field(path, "pitch")));
    }
    return s;
}

inline Json screw_json(const LabeledTask& t) {
    Json j;
    j["label"] = t.label;
    j["l"] = to_json(t.screw.l);
    j["q"] = to_json(t.screw.q);
    if (t.screw.pitch.is_infinite()) j["pitch"] = "inf";
    else j["pitch"] = t.screw.pitch.value();
    return j;
}

}  // namespace detail

/// Parses and validates a scenario document.
inline Scenario parse_scenario(std::string_view document) {
    using detail::Json;
    Json j;
    try {
        j = Json::parse(document.begin(), document.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed scenario: ") + e.what());
    }
    detail::expect_object(j, "");
    const Json& ver = detail::require(j, "", "schema_version");
    if (!ver.is_number_integer()) throw SchemaError("schema_version", "expected an integer");
    if (ver.get<int>() != kSchemaVersion) {
        throw VersionError("unsupported schema_version " + std::to_string(ver.get<int>()) + " (this build reads version " +
                           std::to_string(kSchemaVersion) + ")");
    }
    detail::check_keys(j, "", {"schema_version", "units", "name", "object", "family", "body_frame",
                               "manipulator_contacts", "environment_contacts", "external_wrenches", "torque_model", "tasks"});
    if (detail::text(detail::require(j, "", "units"), "units") != "SI") throw SchemaError("units", "only \"SI\" is supported");

    Scenario s;
    s.name = detail::text(detail::require(j, "", "name"), "name");
    if (const auto* o = detail::optional_field(j, "object")) {
        detail::check_keys(*o, "object", {"description", "dimensions", "weight"});
        ObjectInfo info;
        if (const auto* d = detail::optional_field(*o, "description")) info.description = detail::text(*d, "object.description");
        if (const auto* d = detail::optional_field(*o, "dimensions")) info.dimensions = detail::vec3(*d, "object.dimensions");
        if (const auto* d = detail::optional_field(*o, "weight")) info.weight = detail::number(*d, "object.weight");
        s.object = info;
    }
    if (const auto* f = detail::optional_field(j, "family")) {
        detail::check_keys(*f, "family", {"type", "params"});
        const std::string type = detail::text(detail::require(*f, "family", "type"), "family.type");
        ScenarioFamily fam;
        try {
            fam = default_family(type);
        } catch (const InvalidArgument& e) {
            throw SchemaError("family.type", e.what());
        }
        if (const auto* ps = detail::optional_field(*f, "params")) {
            detail::expect_object(*ps, "family.params");
            for (const auto& [k, v] : ps->items()) {
                if (!fam.find(k)) throw SchemaError("family.params." + k, "unknown parameter for " + type);
                fam.set(k, detail::number(v, "family.params." + k));
            }
        }
        s.family = fam;
    }

    GraspProblem& p = s.problem;
    p.name = s.name;
    if (const auto* b = detail::optional_field(j, "body_frame")) p.body_frame = detail::text(*b, "body_frame");
    if (const auto* mc = detail::optional_field(j, "manipulator_contacts")) {
        if (!mc->is_array()) throw SchemaError("manipulator_contacts", "expected an array");
        for (std::size_t i = 0; i < mc->size(); ++i) {
            p.manipulator_contacts.push_back(detail::parse_manipulator((*mc)[i], detail::item("manipulator_contacts", i)));
        }
    }
    if (const auto* ec = detail::optional_field(j, "environment_contacts")) {
        if (!ec->is_array()) throw SchemaError("environment_contacts", "expected an array");
        for (std::size_t i = 0; i < ec->size(); ++i) {
            p.environment_contacts.push_back(detail::parse_environment((*ec)[i], detail::item("environment_contacts", i)));
        }
    }
    if (const auto* ex = detail::optional_field(j, "external_wrenches")) {
        if (!ex->is_array()) throw SchemaError("external_wrenches", "expected an array");
        for (std::size_t i = 0; i < ex->size(); ++i) {
            const std::string path = detail::item("external_wrenches", i);
            const Json& e = (*ex)[i];
            detail::check_keys(e, path, {"label", "force", "moment", "application_point"});
            ExternalWrench w;
            if (const auto* v = detail::optional_field(e, "label")) w.label = detail::text(*v, detail::field(path, "label"));
            if (const auto* v = detail::optional_field(e, "force")) w.force = detail::vec3(*v, detail::field(path, "force"));
            if (const auto* v = detail::optional_field(e, "moment")) w.moment = detail::vec3(*v, detail::field(path, "moment"));
            if (const auto* v = detail::optional_field(e, "application_point")) {
                w.application_point = detail::vec3(*v, detail::field(path, "application_point"));
            }
            p.external.push_back(w);
        }
    }
    if (const auto* tm = detail::optional_field(j, "torque_model")) {
        const std::string path = "torque_model";
        detail::check_keys(*tm, path, {"jacobian", "tau_g", "tau_min", "tau_max", "dofs_per_manipulator"});
        TorqueModel t;
        t.jacobian = detail::matrix(detail::require(*tm, path, "jacobian"), "torque_model.jacobian");
        const int l = static_cast<int>(t.jacobian.cols());
        t.tau_g = detail::vector(detail::require(*tm, path, "tau_g"), "torque_model.tau_g", l);
        t.tau_min = detail::vector(detail::require(*tm, path, "tau_min"), "torque_model.tau_min", l);
        t.tau_max = detail::vector(detail::require(*tm, path, "tau_max"), "torque_model.tau_max", l);
        if (const auto* d = detail::optional_field(*tm, "dofs_per_manipulator")) {
            const Eigen::VectorXd v = detail::vector(*d, "torque_model.dofs_per_manipulator");
            for (Eigen::Index i = 0; i < v.size(); ++i) t.dofs_per_manipulator.push_back(static_cast<int>(v[i]));
        }
        p.torque_model = std::move(t);
    }

    const Json& tasks = detail::require(j, "", "tasks");
    if (!tasks.is_array() || tasks.empty()) throw SchemaError("tasks", "expected a non-empty array");
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const std::string path = detail::item("tasks", i);
        detail::check_keys(tasks[i], path, {"label", "l", "q", "pitch"});
        LabeledTask t;
        t.label = detail::text(detail::require(tasks[i], path, "label"), detail::field(path, "label"));
        t.screw = detail::parse_screw(tasks[i], path);
        for (const auto& prev : s.tasks) {
            if (prev.label == t.label) throw SchemaError(detail::field(path, "label"), "duplicate task label '" + t.label + "'");
        }
        s.tasks.push_back(t);
    }
    p.task = s.tasks.front().screw;

    try {
        p.validate();
    } catch (const CompileError& e) {
        throw SchemaError("torque_model", e.what());
    }
    return s;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open scenario file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

/// Canonical JSON text of a scenario (2-space indent, trailing newline).
inline std::string dump_scenario(const Scenario& s) {
    using detail::Json;
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["units"] = "SI";
    j["name"] = s.name;
    if (s.object) {
        Json o;
        o["description"] = s.object->description;
        o["dimensions"] = detail::to_json(s.object->dimensions);
        o["weight"] = s.object->weight;
        j["object"] = o;
    }
    if (s.family) {
        Json f;
        f["type"] = s.family->type;
        Json ps = Json::object();
        for (const auto& prm : s.family->params) ps[prm.name] = prm.value;
        f["params"] = ps;
        j["family"] = f;
    }
    const GraspProblem& p = s.problem;
    j["body_frame"] = p.body_frame;
    Json mcs = Json::array();
    for (const auto& c : p.manipulator_contacts) {
        Json m;
        m["label"] = c.label;
        m["position"] = detail::to_json(c.position);
        m["rotation"] = detail::rotation_json(c.rotation);
        Json cone;
        cone["mu"] = c.cone.mu;
        cone["e_t"] = c.cone.e_t;
        cone["e_o"] = c.cone.e_o;
        cone["e_n"] = c.cone.e_n;
        if (c.cone.frictionless) cone["frictionless"] = true;
        m["cone"] = cone;
        m["f_n_max"] = c.f_n_max;
        mcs.push_back(m);
    }
    j["manipulator_contacts"] = mcs;
    Json ecs = Json::array();
    for (const auto& c : p.environment_contacts) {
        Json e;
        e["label"] = c.label;
        e["position"] = detail::to_json(c.position);
        e["rotation"] = detail::rotation_json(c.rotation);
        Json model;
        if (const auto* fs = std::get_if<FixedSupport>(&c.model)) {
            model["type"] = "fixed_support";
            Json pr = Json::object();
            for (std::size_t k = 0; k < 6; ++k) {
                if (fs->prescribed[k]) pr[std::string(detail::kComponentKeys[k])] = *fs->prescribed[k];
            }
            model["prescribed"] = pr;
        } else {
            const auto& pc = std::get<PcwfParams>(c.model);
            model["type"] = "pcwf";
            model["mu"] = pc.mu;
            model["e_t"] = pc.e_t;
            model["e_o"] = pc.e_o;
            if (pc.frictionless) model["frictionless"] = true;
        }
        e["model"] = model;
        if (c.f_n_min) e["f_n_min"] = *c.f_n_min;
        if (c.f_n_max) e["f_n_max"] = *c.f_n_max;
        ecs.push_back(e);
    }
    j["environment_contacts"] = ecs;
    Json exs = Json::array();
    for (const auto& w : p.external) {
        Json e;
        e["label"] = w.label;
        e["force"] = detail::to_json(w.force);
        e["moment"] = detail::to_json(w.moment);
        e["application_point"] = detail::to_json(w.application_point);
        exs.push_back(e);
    }
    j["external_wrenches"] = exs;
    if (p.torque_model) {
        const auto& t = *p.torque_model;
        Json tm;
        tm["jacobian"] = detail::to_json(t.jacobian);
        tm["tau_g"] = detail::to_json(t.tau_g);
        tm["tau_min"] = detail::to_json(t.tau_min);
        tm["tau_max"] = detail::to_json(t.tau_max);
        if (!t.dofs_per_manipulator.empty()) tm["dofs_per_manipulator"] = t.dofs_per_manipulator;
        j["torque_model"] = tm;
    }
    Json tasks = Json::array();
    for (const auto& t : s.tasks) tasks.push_back(detail::screw_json(t));
    j["tasks"] = tasks;
    return j.dump(2) + "\n";
}

inline void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write scenario file '" + path + "'");
    out << dump_scenario(s);
    if (!out) throw IoError("failed while writing '" + path + "'");
}

/// Wraps a bare problem (its current task labelled `task_label`) as a scenario.
inline Scenario scenario_from_problem(const GraspProblem& p, const std::string& task_label = "S") {
    Scenario s;
    s.name = p.name.empty() ? "scenario" : p.name;
    s.problem = p;
    s.problem.name = s.name;
    s.tasks = {{task_label, p.task}};
    return s;
}

}  // namespace screw_grasp
