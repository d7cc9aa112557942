#pragma once

// screw-grasp command line front end.
//
//   screw-grasp <eval|sweep|oracle-check|gws|export> [--builtin NAME | --scenario PATH]
//               [--task LABEL] [--dir +|-] [--set K=V]... [--sweep PARAM=START:STOP:COUNT]
//               [--facets N] [--out PATH] [--parallel N] [--tol-feas X] [--tol-gap X]
//
// Exit codes: 0 success, 1 oracle check failed, 2 infeasible, 3 unbounded,
// 4 input error, 5 solver failure.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "screw_grasp/screw_grasp.hpp"

namespace screw_grasp::cli {

enum ExitCode : int {
    kOk = 0,
    kOracleMismatch = 1,
    kInfeasible = 2,
    kUnbounded = 3,
    kInputError = 4,
    kSolverFailure = 5,
};

inline int exit_code_for(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return kOk;
        case SolveStatus::Infeasible: return kInfeasible;
        case SolveStatus::Unbounded: return kUnbounded;
        default: return kSolverFailure;
    }
}

struct SweepSpec {
    std::string param;
    std::string start;
    std::string stop;
    int count = 1;
};

struct RunConfig {
    std::string command;
    std::string builtin;
    std::string scenario_path;
    std::string task;
    std::string dir = "+";
    std::vector<std::string> sets;
    std::string sweep;
    int facets = 64;
    double oracle_threshold = 0.02;
    std::string out;
    std::string format = "text";
    int parallel = detail::default_parallelism();
    double tol_feas = SolveSettings{}.feasibility_tol;
    double tol_gap = SolveSettings{}.duality_gap_tol;
    int max_iterations = SolveSettings{}.max_iterations;
    bool timing = false;
    std::string subspace = "fx,fz,ty";
    int rays = 0;
};

namespace detail {

inline std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v == 0.0 ? 0.0 : v);
    return buf;
}

inline std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
    auto log = std::make_shared<spdlog::logger>("screw-grasp", sink);
    log->set_pattern("[%l] %v");
    log->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("SCREW_GRASP_LOG")) {
        const auto level = spdlog::level::from_str(env);
        // from_str maps unknown names to "off"; only honor it when asked for explicitly.
        if (level != spdlog::level::off || std::string(env) == "off") log->set_level(level);
    }
    return log;
}

inline Direction parse_direction(const std::string& s) {
    if (s == "+" || s == "pos" || s == "positive") return Direction::Positive;
    if (s == "-" || s == "neg" || s == "negative") return Direction::Negative;
    throw InvalidArgument("--dir must be + or - (got '" + s + "')");
}

inline std::vector<std::pair<std::string, std::string>> parse_sets(const std::vector<std::string>& sets) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw InvalidArgument("--set expects KEY=VALUE (got '" + s + "')");
        out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    return out;
}

inline SweepSpec parse_sweep(const std::string& s) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidArgument("--sweep expects PARAM=START:STOP:COUNT");
    SweepSpec spec;
    spec.param = s.substr(0, eq);
    std::vector<std::string> parts;
    std::stringstream ss(s.substr(eq + 1));
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() != 3) throw InvalidArgument("--sweep expects PARAM=START:STOP:COUNT");
    spec.start = parts[0];
    spec.stop = parts[1];
    try {
        std::size_t used = 0;
        spec.count = std::stoi(parts[2], &used);
        if (used != parts[2].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
        throw InvalidArgument("--sweep COUNT must be an integer (got '" + parts[2] + "')");
    }
    if (spec.count < 1) throw InvalidArgument("--sweep COUNT must be >= 1");
    return spec;
}

inline Scenario load_base(const RunConfig& cfg) {
    if (!cfg.builtin.empty() && !cfg.scenario_path.empty()) throw InvalidArgument("use either --builtin or --scenario, not both");
    if (cfg.builtin.empty() && cfg.scenario_path.empty()) throw InvalidArgument("one of --builtin NAME or --scenario PATH is required");
    if (!cfg.builtin.empty()) return make_scenario(default_family(cfg.builtin));
    return load_scenario(cfg.scenario_path);
}

inline SolveSettings settings_from(const RunConfig& cfg, const std::shared_ptr<spdlog::logger>& log) {
    SolveSettings s;
    s.feasibility_tol = cfg.tol_feas;
    s.duality_gap_tol = cfg.tol_gap;
    s.max_iterations = cfg.max_iterations;
    s.validate();
    if (log->should_log(spdlog::level::trace)) {
        s.trace = [log](const IterationTrace& t) {
            log->trace("iter {:3d} pcost {:+.6e} dcost {:+.6e} pres {:.2e} dres {:.2e} gap {:.2e} step {:.3f} sigma {:.3f}",
                       t.iteration, t.primal_cost, t.dual_cost, t.primal_residual, t.dual_residual, t.gap, t.step, t.sigma);
        };
    }
    return s;
}

/// Writes to --out when given, otherwise to `out`.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) throw IoError("cannot open output file '" + path + "'");
            os_ = &file_;
        }
    }
    std::ostream& stream() { return *os_; }
    bool to_file() const { return file_.is_open(); }

private:
    std::ofstream file_;
    std::ostream* os_;
};

inline std::string csv_header() { return "param,eta,status,iterations,wall_ms\n"; }

inline std::string csv_row(const std::string& param, const MetricResult& r, bool timing) {
    std::string line = param + ",";
    if (r.eta) line += fmt_g(*r.eta);
    line += "," + status_text(r) + "," + std::to_string(r.stats.iterations) + ",";
    line += timing ? fmt_g(r.stats.wall_ms) : std::string("0");
    return line + "\n";
}

inline std::string describe_screw(const TaskScrew& s) {
    std::string d = "l = (" + fmt_g(s.l.x()) + ", " + fmt_g(s.l.y()) + ", " + fmt_g(s.l.z()) + ")";
    if (s.pitch.is_infinite()) return d + ", pitch inf";
    return d + ", q = (" + fmt_g(s.q.x()) + ", " + fmt_g(s.q.y()) + ", " + fmt_g(s.q.z()) + "), pitch " + fmt_g(s.pitch.value());
}

inline int cmd_eval(const RunConfig& cfg, const Scenario& sc, std::ostream& out, const std::shared_ptr<spdlog::logger>& log) {
    const Direction dir = parse_direction(cfg.dir);
    const LabeledTask& task = sc.task(cfg.task);
    const SolveSettings settings = settings_from(cfg, log);
    const MetricResult r = local_metric(sc.problem_for(task.label), dir, settings);
    if (r.negative_eta) {
        log->warn("eta is negative: the grasp cannot cancel the external load along the task screw");
    }
    Sink sink(cfg.out, out);
    std::ostream& os = sink.stream();
    if (cfg.format == "csv") {
        os << csv_header() << csv_row("", r, cfg.timing);
    } else {
        os << "scenario:   " << sc.name << "\n";
        os << "task:       " << task.label << " (" << describe_screw(task.screw) << ")\n";
        os << "direction:  " << to_string(dir) << "\n";
        os << "status:     " << to_string(r.status) << "\n";
        os << "eta:        " << (r.eta ? fmt_g(*r.eta) : std::string("-")) << "\n";
        os << "iterations: " << r.stats.iterations << "\n";
        if (cfg.timing) os << "wall_ms:    " << fmt_g(r.stats.wall_ms) << "\n";
        if (r.status == SolveStatus::Optimal) {
            os << "active:    ";
            if (r.active_constraints.empty()) os << " (none)";
            for (const auto& a : r.active_constraints) os << " " << a;
            os << "\n";
        }
        if (r.certificate) os << "certificate: " << r.certificate->summary << " (residual " << fmt_g(r.certificate->ray_residual) << ")\n";
    }
    return exit_code_for(r.status);
}

inline int cmd_sweep(const RunConfig& cfg, const Scenario& sc, std::ostream& out, std::ostream& err,
                     const std::shared_ptr<spdlog::logger>& log) {
    if (cfg.sweep.empty()) throw InvalidArgument("sweep needs --sweep PARAM=START:STOP:COUNT");
    if (!sc.family) throw InvalidArgument("scenario '" + sc.name + "' has no parameter family to sweep");
    const SweepSpec spec = parse_sweep(cfg.sweep);
    const Direction dir = parse_direction(cfg.dir);
    const std::string task_label = sc.task(cfg.task).label;
    const FamilyParam* prm = sc.family->find(spec.param);
    if (!prm) throw InvalidArgument("unknown sweep parameter '" + spec.param + "' (known: " + sc.family->known() + ")");
    const auto* Lp = sc.family->find("L");
    std::optional<double> L;
    if (Lp) L = Lp->value;
    const double start = parse_quantity(spec.start, prm->dimension, L);
    const double stop = parse_quantity(spec.stop, prm->dimension, L);
    const std::vector<double> grid = linspace(start, stop, spec.count);

    const ScenarioFamily base = *sc.family;
    auto family = [&](double v) {
        ScenarioFamily f = base;
        f.set(spec.param, v);
        return make_scenario(f).problem_for(task_label);
    };
    const SweepResult res = metric_sweep(family, grid, dir, settings_from(cfg, log), cfg.parallel);

    Sink sink(cfg.out, out);
    std::ostream& os = sink.stream();
    os << csv_header();
    for (const auto& row : res.rows) {
        os << csv_row(fmt_g(row.parameter), row.result, cfg.timing);
        if (!row.result.error.empty()) log->warn("{} = {}: {}", spec.param, fmt_g(row.parameter), row.result.error);
    }
    std::ostream& summary = sink.to_file() ? out : err;
    if (res.global.eta_star) {
        summary << "eta* = " << fmt_g(*res.global.eta_star) << " at " << spec.param << " = " << res.global.argmin_label << "\n";
    } else {
        summary << "eta* undefined: " << res.global.failures.size() << " of " << res.rows.size() << " points not optimal\n";
    }
    return kOk;
}

inline int cmd_oracle_check(const RunConfig& cfg, const Scenario& sc, std::ostream& out, const std::shared_ptr<spdlog::logger>& log) {
    if (cfg.facets < 4) throw InvalidArgument("--facets must be >= 4");
    const Direction dir = parse_direction(cfg.dir);
    const SolveSettings settings = settings_from(cfg, log);
    const ConicProgram prog = compile(sc.problem_for(sc.task(cfg.task).label), dir);
    const SolveResult socp = solve(prog, settings);
    const SolveResult lp = solve_with_oracle(prog, cfg.facets);

    Sink sink(cfg.out, out);
    std::ostream& os = sink.stream();
    os << "socp:     " << to_string(socp.status);
    if (socp.status == SolveStatus::Optimal) os << " eta = " << fmt_g(socp.objective);
    os << "\noracle:   " << to_string(lp.status);
    if (lp.status == SolveStatus::Optimal) os << " eta = " << fmt_g(lp.objective);
    os << " (" << cfg.facets << " facets)\n";

    if (socp.status == SolveStatus::Optimal && lp.status == SolveStatus::Optimal) {
        const double abs_gap = socp.objective - lp.objective;
        const double rel_gap = abs_gap / std::max(std::abs(socp.objective), 1e-12);
        const bool below = lp.objective <= socp.objective + settings.duality_gap_tol * std::max(1.0, std::abs(socp.objective));
        const bool ok = below && rel_gap <= cfg.oracle_threshold;
        os << "abs_gap:  " << fmt_g(abs_gap) << "\nrel_gap:  " << fmt_g(rel_gap) << "\n";
        os << "result:   " << (ok ? "pass" : "FAIL") << " (threshold " << fmt_g(cfg.oracle_threshold) << ")\n";
        return ok ? kOk : kOracleMismatch;
    }
    const bool agree = socp.status == lp.status &&
                       (socp.status == SolveStatus::Infeasible || socp.status == SolveStatus::Unbounded);
    os << "result:   " << (agree ? "pass (both " + std::string(to_string(socp.status)) + ")" : std::string("FAIL")) << "\n";
    return agree ? kOk : kOracleMismatch;
}

inline int component_index(const std::string& name) {
    static const std::vector<std::pair<std::string, int>> names = {
        {"fx", 0}, {"fy", 1}, {"fz", 2}, {"mx", 3}, {"my", 4}, {"mz", 5}, {"tx", 3}, {"ty", 4}, {"tz", 5}};
    for (const auto& [n, i] : names) {
        if (n == name) return i;
    }
    throw InvalidArgument("unknown wrench component '" + name + "' (use fx fy fz tx ty tz)");
}

/// Deterministic direction set: circle for 2-D, golden-angle spiral for 3-D.
inline std::vector<Eigen::VectorXd> subspace_directions(int dim, int count) {
    std::vector<Eigen::VectorXd> dirs;
    if (dim == 1) {
        dirs.push_back(Eigen::VectorXd::Constant(1, 1.0));
        dirs.push_back(Eigen::VectorXd::Constant(1, -1.0));
    } else if (dim == 2) {
        for (int k = 0; k < count; ++k) {
            const double a = 2.0 * std::numbers::pi * k / count;
            Eigen::VectorXd d(2);
            d << std::cos(a), std::sin(a);
            dirs.push_back(d);
        }
    } else {
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < count; ++k) {
            const double z = 1.0 - (2.0 * k + 1.0) / count;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double phi = golden * k;
            Eigen::VectorXd d(3);
            d << r * std::cos(phi), r * std::sin(phi), z;
            dirs.push_back(d);
        }
    }
    return dirs;
}

inline int cmd_gws(const RunConfig& cfg, const Scenario& sc, std::ostream& out, const std::shared_ptr<spdlog::logger>& log) {
    std::vector<std::string> names;
    std::vector<int> comps;
    {
        std::stringstream ss(cfg.subspace);
        std::string part;
        while (std::getline(ss, part, ',')) {
            const int c = component_index(part);
            for (int prev : comps) {
                if (prev == c) throw InvalidArgument("--subspace lists '" + part + "' twice");
            }
            names.push_back(part);
            comps.push_back(c);
        }
    }
    if (comps.empty() || comps.size() > 3) throw InvalidArgument("--subspace needs 1 to 3 components");
    const int dim = static_cast<int>(comps.size());
    const int count = cfg.rays > 0 ? cfg.rays : (dim == 2 ? 72 : 200);

    const auto dirs = subspace_directions(dim, count);
    std::vector<TaskScrew> screws;
    std::vector<double> magnitudes;
    for (const auto& d : dirs) {
        Vec6 w = Vec6::Zero();
        for (int i = 0; i < dim; ++i) w[comps[static_cast<std::size_t>(i)]] = d[i];
        const ScrewCoordinates sc6 = wrench_to_screw(Wrench::from_vector(w));
        screws.push_back(sc6.axis);
        magnitudes.push_back(sc6.magnitude);
    }
    const SolveSettings settings = settings_from(cfg, log);
    std::vector<GwsSample> samples(screws.size());
    screw_grasp::detail::parallel_for(screws.size(), cfg.parallel, [&](std::size_t i) {
        samples[i] = gws_sample(sc.problem, {screws[i]}, settings).front();
    });

    Sink sink(cfg.out, out);
    std::ostream& os = sink.stream();
    for (const auto& n : names) os << n << ",";
    os << "eta,status\n";
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        for (int k = 0; k < dim; ++k) os << fmt_g(dirs[i][k]) << ",";
        // Support along the unit direction itself, not along the screw's unit wrench.
        if (samples[i].eta) os << fmt_g(*samples[i].eta / magnitudes[i]);
        os << "," << (samples[i].error.empty() ? std::string(to_string(samples[i].status)) : std::string("error")) << "\n";
        if (!samples[i].error.empty()) log->warn("direction {}: {}", i, samples[i].error);
    }
    return kOk;
}

inline int cmd_export(const RunConfig& cfg, const Scenario& sc, std::ostream& out) {
    Sink sink(cfg.out, out);
    sink.stream() << dump_scenario(sc);
    return kOk;
}

}  // namespace detail

/// Runs the command line; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Task-dependent grasp metric along a screw axis", "screw-grasp"};
    app.require_subcommand(1, 1);

    auto add_common = [&](CLI::App* sub, bool needs_task) {
        auto* b = sub->add_option("--builtin", cfg.builtin, "Built-in scenario: door_handle, cuboid_pivot, cuboid_slide");
        auto* s = sub->add_option("--scenario", cfg.scenario_path, "Scenario file (JSON)");
        b->excludes(s);
        sub->add_option("--set", cfg.sets, "Override a scenario parameter, e.g. theta=10deg, x_E=0.4L")->take_all();
        sub->add_option("--out", cfg.out, "Write output to PATH instead of stdout");
        if (needs_task) {
            sub->add_option("--task", cfg.task, "Task label (default: the scenario's first task)");
            sub->add_option("--dir", cfg.dir, "Task direction: + or -");
        }
        sub->add_option("--parallel", cfg.parallel, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--tol-feas", cfg.tol_feas, "Solver feasibility tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--tol-gap", cfg.tol_gap, "Solver relative duality-gap tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--max-iter", cfg.max_iterations, "Solver iteration limit")->check(CLI::PositiveNumber);
    };

    auto* eval = app.add_subcommand("eval", "Evaluate eta for one scenario and task");
    add_common(eval, true);
    eval->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"text", "csv"}));
    eval->add_flag("--timing", cfg.timing, "Report wall-clock time");

    auto* sweep = app.add_subcommand("sweep", "Evaluate eta over a parameter grid (CSV)");
    add_common(sweep, true);
    sweep->add_option("--sweep", cfg.sweep, "PARAM=START:STOP:COUNT, e.g. theta=0deg:40deg:41")->required();
    sweep->add_flag("--timing", cfg.timing, "Fill the wall_ms column (makes output non-deterministic)");

    auto* oracle = app.add_subcommand("oracle-check", "Compare the conic optimum with the polyhedral LP oracle");
    add_common(oracle, true);
    oracle->add_option("--facets", cfg.facets, "Facets of the polyhedral cone approximation")->check(CLI::Range(4, 1 << 16));
    oracle->add_option("--threshold", cfg.oracle_threshold, "Maximum relative gap")->check(CLI::NonNegativeNumber);

    auto* gws = app.add_subcommand("gws", "Sample the grasp wrench space boundary in a wrench subspace (CSV)");
    add_common(gws, false);
    gws->add_option("--subspace", cfg.subspace, "Comma separated components among fx,fy,fz,tx,ty,tz");
    gws->add_option("--rays", cfg.rays, "Number of sampled directions")->check(CLI::PositiveNumber);

    auto* exp = app.add_subcommand("export", "Write the (possibly overridden) scenario as a scenario file");
    add_common(exp, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kInputError;
    }

    auto log = detail::make_logger(err);
    try {
        const Scenario base = detail::load_base(cfg);
        const Scenario sc = with_overrides(base, detail::parse_sets(cfg.sets));
        log->debug("scenario {} with {} manipulator and {} environment contacts", sc.name,
                   sc.problem.manipulator_contacts.size(), sc.problem.environment_contacts.size());
        if (*eval) return detail::cmd_eval(cfg, sc, out, log);
        if (*sweep) return detail::cmd_sweep(cfg, sc, out, err, log);
        if (*oracle) return detail::cmd_oracle_check(cfg, sc, out, log);
        if (*gws) return detail::cmd_gws(cfg, sc, out, log);
        if (*exp) return detail::cmd_export(cfg, sc, out);
    } catch (const UnsupportedProgram& e) {
        err << "error: unsupported program: " << e.what() << "\n";
        return kInputError;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kSolverFailure;
    }
    return kInputError;
}

}  // namespace screw_grasp::cli
