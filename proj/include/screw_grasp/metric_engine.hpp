#pragma once

// Task-dependent grasp metric: the local value eta at one pose, the global
// value eta* (minimum over a sampled path) and parameter sweeps.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "screw_grasp/conic_solver.hpp"
#include "screw_grasp/detail/parallel.hpp"
#include "screw_grasp/errors.hpp"
#include "screw_grasp/grasp_problem.hpp"

namespace screw_grasp {

/// Threshold (relative residual) below which a bound or cone counts as tight.
inline constexpr double kActiveTol = 1e-6;

struct SolveStats {
    int iterations = 0;
    double wall_ms = 0.0;
};

struct MetricResult {
    std::optional<double> eta;  // present only when status is Optimal
    Direction direction = Direction::Positive;
    SolveStatus status = SolveStatus::NumericalFailure;
    /// Tight constraints, e.g. "c1.f_n<=max", "c2.f_n>=0", "c1.cone", "tau[0]<=max".
    std::vector<std::string> active_constraints;
    SolveStats stats;
    /// Optimal but negative: the grasp cannot even cancel the external load along the task.
    bool negative_eta = false;
    /// Non-empty when the point could not be built or compiled.
    std::string error;
    std::optional<Certificate> certificate;
    Eigen::VectorXd primal;
};

inline std::string status_text(const MetricResult& r) {
    return r.error.empty() ? std::string(to_string(r.status)) : std::string("error");
}

namespace detail {

inline std::vector<std::string> active_constraints(const ConicProgram& prog, const Eigen::VectorXd& x) {
    std::vector<std::string> out;
    static const char* names[6] = {"f_t", "f_o", "f_n", "m_t", "m_o", "m_n"};
    auto var_name = [&](int j) -> std::string {
        for (const auto& s : prog.layout.slices) {
            if (j < s.offset || j >= s.offset + s.length) continue;
            if (s.role == VariableRole::JointTorque) return "tau[" + std::to_string(j - s.offset) + "]";
            if (s.components.empty()) return s.label;
            return s.label + "." + names[s.components[static_cast<std::size_t>(j - s.offset)]];
        }
        return "x" + std::to_string(j);
    };
    for (const auto& s : prog.layout.slices) {
        for (int j = s.offset; j < s.offset + s.length; ++j) {
            if (std::isfinite(prog.lower[j]) && std::abs(x[j] - prog.lower[j]) <= kActiveTol * (1.0 + std::abs(prog.lower[j]))) {
                out.push_back(var_name(j) + (prog.lower[j] == 0.0 ? ">=0" : ">=min"));
            }
            if (std::isfinite(prog.upper[j]) && std::abs(x[j] - prog.upper[j]) <= kActiveTol * (1.0 + std::abs(prog.upper[j]))) {
                out.push_back(var_name(j) + "<=max");
            }
        }
    }
    for (const auto& k : prog.cones) {
        const double rhs = k.c.dot(x) + k.d;
        if (rhs <= kActiveTol) continue;  // at the apex: contact carries no load
        const double slack = rhs - (k.A * x + k.b).norm();
        if (slack <= kActiveTol * (1.0 + rhs)) out.push_back(k.label);
    }
    return out;
}

}  // namespace detail

/// Compiles and solves one instance. eta is the force magnitude along the
/// task screw for finite pitch, the moment magnitude for infinite pitch.
inline MetricResult local_metric(const GraspProblem& p, Direction direction, const SolveSettings& settings = {},
                                 const ConicBackend& backend = InteriorPointBackend{}) {
    const ConicProgram prog = compile(p, direction);
    const auto t0 = std::chrono::steady_clock::now();
    const SolveResult r = backend.solve(prog, settings);
    const auto t1 = std::chrono::steady_clock::now();

    MetricResult m;
    m.direction = direction;
    m.status = r.status;
    m.stats.iterations = r.iterations;
    m.stats.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    m.certificate = r.certificate;
    m.primal = r.primal;
    if (r.status == SolveStatus::Optimal) {
        m.eta = r.primal[prog.layout.eta_index];
        m.negative_eta = *m.eta < 0.0;
        m.active_constraints = detail::active_constraints(prog, r.primal);
    }
    return m;
}

struct PathPoint {
    double parameter = 0.0;
    GraspProblem problem;
    std::string label;
};

struct GlobalMetricResult {
    std::optional<double> eta_star;     // only when every point is Optimal
    std::optional<std::size_t> argmin;  // index into per_point
    std::string argmin_label;
    std::vector<MetricResult> per_point;
    std::vector<std::size_t> failures;  // indices of non-Optimal points
};

namespace detail {

inline MetricResult guarded_metric(const std::function<GraspProblem()>& build, Direction direction,
                                   const SolveSettings& settings) {
    try {
        return local_metric(build(), direction, settings);
    } catch (const std::exception& e) {
        MetricResult m;
        m.direction = direction;
        m.error = e.what();
        return m;
    }
}

inline GlobalMetricResult summarize(std::vector<MetricResult> per_point, const std::vector<std::string>& labels) {
    GlobalMetricResult g;
    g.per_point = std::move(per_point);
    double best = kInf;
    for (std::size_t i = 0; i < g.per_point.size(); ++i) {
        const auto& r = g.per_point[i];
        if (!r.eta) {
            g.failures.push_back(i);
            continue;
        }
        if (*r.eta < best) {
            best = *r.eta;
            g.argmin = i;
        }
    }
    if (!g.failures.empty() || !g.argmin) {
        g.argmin.reset();
        return g;
    }
    g.eta_star = best;
    g.argmin_label = labels[*g.argmin];
    return g;
}

}  // namespace detail

/// eta* = min over the path of the local metric. Points are solved
/// concurrently; results keep path order.
inline GlobalMetricResult global_metric(const std::vector<PathPoint>& path, Direction direction,
                                        const SolveSettings& settings = {}, int parallelism = 1) {
    if (path.empty()) throw InvalidArgument("global_metric: path is empty");
    settings.validate();
    std::vector<MetricResult> per(path.size());
    detail::parallel_for(path.size(), parallelism, [&](std::size_t i) {
        per[i] = detail::guarded_metric([&] { return path[i].problem; }, direction, settings);
    });
    std::vector<std::string> labels;
    for (const auto& p : path) labels.push_back(p.label);
    return detail::summarize(std::move(per), labels);
}

struct SweepRow {
    double parameter = 0.0;
    MetricResult result;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    GlobalMetricResult global;
};

/// Evaluates `family(value)` at every grid value. Failures are recorded per
/// row and never abort the sweep.
inline SweepResult metric_sweep(const std::function<GraspProblem(double)>& family, const std::vector<double>& grid,
                                Direction direction, const SolveSettings& settings = {}, int parallelism = 1) {
    if (grid.empty()) throw InvalidArgument("metric_sweep: grid is empty");
    settings.validate();
    std::vector<MetricResult> per(grid.size());
    detail::parallel_for(grid.size(), parallelism, [&](std::size_t i) {
        per[i] = detail::guarded_metric([&] { return family(grid[i]); }, direction, settings);
    });
    SweepResult out;
    std::vector<std::string> labels;
    char buf[64];
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.9g", grid[i]);
        labels.emplace_back(buf);
        out.rows.push_back({grid[i], per[i]});
    }
    out.global = detail::summarize(std::move(per), labels);
    return out;
}

/// `count` evenly spaced values from start to stop inclusive.
inline std::vector<double> linspace(double start, double stop, int count) {
    if (count < 1) throw InvalidArgument("linspace: count must be >= 1");
    std::vector<double> v(static_cast<std::size_t>(count));
    if (count == 1) {
        v[0] = start;
        return v;
    }
    for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = start + (stop - start) * i / (count - 1);
    return v;
}

}  // namespace screw_grasp
