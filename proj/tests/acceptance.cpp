// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "generators.hpp"
#include "problem_tools.hpp"
#include "program_builder.hpp"
#include "screw_grasp/screw_grasp.hpp"

using namespace screw_grasp;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SolveSettings tight() {
    SolveSettings s;
    s.feasibility_tol = 1e-9;
    s.duality_gap_tol = 1e-9;
    return s;
}

std::vector<Scenario> bundled() {
    std::vector<Scenario> out;
    for (const auto& name : builtin_names()) out.push_back(load_scenario(std::string(SG_SCENARIO_DIR) + "/" + name + ".scenario"));
    return out;
}

GraspProblem door(double theta, double x_c) {
    DoorHandleParams d;
    d.theta = theta;
    d.x_c = x_c;
    return make_door_handle(d);
}

GraspProblem cuboid(double alpha, double x_E, CuboidTask task) {
    CuboidParams c;
    c.alpha = alpha;
    c.x_E = x_E;
    return make_cuboid(c, task);
}

std::optional<double> eta_of(const GraspProblem& p, Direction d, const SolveSettings& s = {}) {
    return local_metric(p, d, s).eta;
}

Outcome criterion1() {
    const auto grid = linspace(0.0, 40.0 * kDeg, 41);
    const auto t0 = std::chrono::steady_clock::now();
    const SweepResult s = metric_sweep([](double th) { return door(th, 0.0); }, grid, Direction::Positive);
    const double secs = seconds_since(t0);
    std::optional<double> crossing;
    for (std::size_t i = 0; i + 1 < s.rows.size(); ++i) {
        const auto& a = s.rows[i].result.eta;
        const auto& b = s.rows[i + 1].result.eta;
        if (!a || !b) return {false, "sweep point failed to solve"};
        if (*a >= 0.0 && *b < 0.0) {
            crossing = grid[i] + (grid[i + 1] - grid[i]) * *a / (*a - *b);
            break;
        }
    }
    if (!crossing) return {false, "eta never crosses zero on 0..40 deg"};
    const double deg = *crossing / kDeg;
    return {std::abs(deg - 10.0) <= 2.0 && secs < 5.0, fmt("zero crossing at %.3f deg (target 10 +- 2), 41-point sweep %.3f s", deg, secs)};
}

Outcome criterion2() {
    const double L = DoorHandleParams{}.L;
    const std::vector<double> xs = {0.0, 0.25 * L, 0.5 * L, 0.75 * L};
    const auto thetas = linspace(0.0, 40.0 * kDeg, 41);
    std::vector<std::vector<double>> eta(xs.size(), std::vector<double>(thetas.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < thetas.size(); ++j) {
            const auto e = eta_of(door(thetas[j], xs[i]), Direction::Positive, tight());
            if (!e) return {false, "sweep point failed to solve"};
            eta[i][j] = *e;
        }
    }
    int violations = 0;
    for (std::size_t j = 0; j < thetas.size(); ++j) {
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) violations += eta[i + 1][j] < eta[i][j] - 1e-6;
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j + 1 < thetas.size(); ++j) violations += eta[i][j + 1] > eta[i][j] + 1e-6;
    }
    return {violations == 0, fmt("%.0f violations over a 4 x 41 grid (nondecreasing in x_c, nonincreasing in theta)", violations)};
}

Outcome criterion3() {
    const double L = CuboidParams{}.L;
    const std::vector<double> xs = {0.2 * L, 0.3 * L, 0.4 * L};
    const auto alphas = linspace(10.0 * kDeg, 80.0 * kDeg, 15);
    int violations = 0;
    // Positive along S1 (body +y) is the CCW sense, negative the CW sense.
    for (Direction d : {Direction::Positive, Direction::Negative}) {
        std::vector<std::vector<double>> eta(xs.size(), std::vector<double>(alphas.size()));
        for (std::size_t i = 0; i < xs.size(); ++i) {
            for (std::size_t j = 0; j < alphas.size(); ++j) {
                const auto e = eta_of(cuboid(alphas[j], xs[i], CuboidTask::Pivot), d, tight());
                if (!e) return {false, "sweep point failed to solve"};
                eta[i][j] = *e;
            }
        }
        for (std::size_t i = 0; i < xs.size(); ++i) {
            for (std::size_t j = 0; j + 1 < alphas.size(); ++j) {
                const double step = eta[i][j + 1] - eta[i][j];
                violations += d == Direction::Positive ? step > 1e-6 : step < -1e-6;
            }
        }
        for (std::size_t j = 0; j < alphas.size(); ++j) {
            for (std::size_t i = 0; i + 1 < xs.size(); ++i) violations += !(eta[i + 1][j] > eta[i][j]);
        }
    }
    return {violations == 0, fmt("%.0f violations over alpha 10..80 deg (15 points) x 3 x_E x 2 directions", violations)};
}

Outcome criterion4() {
    const double L = CuboidParams{}.L;
    const auto plus = eta_of(cuboid(50.0 * kDeg, 0.4 * L, CuboidTask::Slide), Direction::Positive, tight());
    const auto minus = eta_of(cuboid(50.0 * kDeg, 0.4 * L, CuboidTask::Slide), Direction::Negative, tight());
    if (!plus || !minus) return {false, "slide solve failed"};
    return {*plus - *minus > 1e-6, fmt("eta(+X) = %.6f, eta(-X) = %.6f, margin %.6f", *plus, *minus, *plus - *minus)};
}

Outcome criterion5() {
    sg_test::Gen g(2024);
    const double L_door = DoorHandleParams{}.L, L_box = CuboidParams{}.L;
    const std::vector<int> facets = {8, 16, 32, 64};
    int checked = 0, failures = 0;
    double worst_gap = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& name : builtin_names()) {
        for (int k = 0; k < 5; ++k) {
            std::vector<std::pair<std::string, std::string>> overrides;
            if (name == "door_handle") {
                overrides = {{"theta", std::to_string(g.uniform(0.0, 40.0)) + "deg"},
                             {"x_c", std::to_string(g.uniform(0.0, 0.75 * L_door)) + "m"}};
            } else {
                overrides = {{"alpha", std::to_string(g.uniform(10.0, 80.0)) + "deg"},
                             {"x_E", std::to_string(g.uniform(0.2 * L_box, 0.45 * L_box)) + "m"}};
            }
            const Scenario sc = builtin_scenario(name, overrides);
            for (Direction d : {Direction::Positive, Direction::Negative}) {
                const ConicProgram prog = compile(sc.problem_for(), d);
                const SolveResult socp = solve(prog, tight());
                if (socp.status != SolveStatus::Optimal) {
                    ++failures;
                    continue;
                }
                const double scale = std::max(std::abs(socp.objective), 1e-12);
                double prev_gap = kInf;
                for (int f : facets) {
                    const SolveResult lp = solve_with_oracle(prog, f);
                    if (lp.status != SolveStatus::Optimal) {
                        ++failures;
                        break;
                    }
                    const double gap = socp.objective - lp.objective;
                    const double slack = 1e-8 * std::max(1.0, std::abs(socp.objective));
                    if (gap < -slack || gap > prev_gap + slack) ++failures;
                    if (f == 64) {
                        worst_gap = std::max(worst_gap, gap / scale);
                        if (gap / scale > 0.02) ++failures;
                    }
                    prev_gap = gap;
                }
                ++checked;
            }
        }
    }
    const double secs = seconds_since(t0);
    return {failures == 0 && secs < 60.0,
            fmt("%.0f programs, %.0f failures, worst 64-facet relative gap %.3g", checked, failures, worst_gap) +
                fmt(", %.2f s", secs)};
}

template <class Check>
Outcome over_bundled_tasks(Check check, const char* what) {
    int checked = 0, failures = 0;
    double worst = 0.0;
    for (const Scenario& sc : bundled()) {
        for (const auto& t : sc.tasks) {
            for (Direction d : {Direction::Positive, Direction::Negative}) {
                const GraspProblem p = sc.problem_for(t.label);
                const auto base = eta_of(p, d, tight());
                if (!base) {
                    ++failures;
                    continue;
                }
                check(p, d, *base, checked, failures, worst);
            }
        }
    }
    return {failures == 0, fmt("%.0f comparisons, %.0f failures, worst relative deviation %.3g", checked, failures, worst) + " " + what};
}

Outcome criterion6() {
    return over_bundled_tasks(
        [](const GraspProblem& p, Direction d, double base, int& checked, int& failures, double& worst) {
            for (double k : {0.5, 2.0, 10.0}) {
                const auto e = eta_of(sg_test::scaled(p, k), d, tight());
                ++checked;
                if (!e) {
                    ++failures;
                    continue;
                }
                const double dev = std::abs(*e - k * base) / std::max(std::abs(k * base), 1e-12);
                worst = std::max(worst, dev);
                failures += dev > 1e-6;
            }
        },
        "(k in {0.5, 2, 10}, all tasks, both directions)");
}

Outcome criterion7() {
    sg_test::Gen g(77);
    return over_bundled_tasks(
        [&g](const GraspProblem& p, Direction d, double base, int& checked, int& failures, double& worst) {
            for (int i = 0; i < 20; ++i) {
                const GraspProblem moved = transform_problem(p, g.rotation(), g.vec3(2.0));
                const auto e = eta_of(moved, d, tight());
                ++checked;
                if (!e) {
                    ++failures;
                    continue;
                }
                const double dev = std::abs(*e - base) / std::max(std::abs(base), 1e-12);
                worst = std::max(worst, dev);
                failures += dev > 1e-6;
            }
        },
        "(20 rigid transforms per task and direction)");
}

Outcome criterion8() {
    SolveSettings s;
    s.feasibility_tol = 1e-10;
    s.duality_gap_tol = 1e-10;
    std::string detail;
    bool ok = true;

    auto box = sg_test::blank_program(1);
    box.objective << 1.0;
    box.upper << 3.0;
    const SolveResult r1 = solve(box, s);
    const double e1 = std::abs(r1.objective - 3.0);
    ok = ok && r1.status == SolveStatus::Optimal && e1 <= 1e-8;

    auto disk = sg_test::blank_program(2);
    disk.objective << 1.0, 1.0;
    sg_test::add_soc(disk, Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2), 1.0);
    const SolveResult r2 = solve(disk, s);
    const double e2 = std::abs(r2.objective - std::sqrt(2.0));
    ok = ok && r2.status == SolveStatus::Optimal && e2 <= 1e-8;

    const ConicProgram unreachable = compile(sg_test::unreachable_load());
    const SolveResult r3 = solve(unreachable, s);
    const SolveResult r3lp = solve_with_oracle(unreachable, 16);
    ok = ok && r3.status == SolveStatus::Infeasible && r3lp.status == SolveStatus::Infeasible && r3.certificate.has_value();

    const SolveResult r4 = solve(compile(sg_test::uncapped_support()), s);
    ok = ok && r4.status == SolveStatus::Unbounded && r4.certificate.has_value();

    detail = fmt("box error %.2g, disk error %.2g", e1, e2) + ", infeasible -> " + std::string(to_string(r3.status)) +
             " (oracle " + std::string(to_string(r3lp.status)) + "), unbounded -> " + std::string(to_string(r4.status));
    return {ok, detail};
}

Outcome criterion9() {
    double worst_ms = 0.0;
    std::string worst_label;
    int count = 0;
    for (const Scenario& sc : bundled()) {
        for (const auto& t : sc.tasks) {
            for (Direction d : {Direction::Positive, Direction::Negative}) {
                const GraspProblem p = sc.problem_for(t.label);
                const auto t0 = std::chrono::steady_clock::now();
                const MetricResult r = local_metric(p, d);
                const double ms = seconds_since(t0) * 1e3;
                ++count;
                if (r.status != SolveStatus::Optimal) return {false, sc.name + " " + t.label + " did not solve"};
                if (ms > worst_ms) {
                    worst_ms = ms;
                    worst_label = sc.name + " " + t.label + (d == Direction::Positive ? " +" : " -");
                }
            }
        }
    }
    return {worst_ms < 50.0, fmt("%.0f solves, slowest %.2f ms", count, worst_ms) + " (" + worst_label + ")"};
}

}  // namespace

int main() {
    const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                            criterion6, criterion7, criterion8, criterion9};
    bool all = true;
    bool curves_ok = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all = all && o.pass;
        if (i < 4) curves_ok = curves_ok && o.pass;
        std::printf("criterion %zu: %s  %s\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    // No published curve values exist to compare against; the stated point and
    // orderings checked by criteria 1-4 stand in for them.
    std::printf("criterion 10: %s  exact curve values are not published; covered by criteria 1-4 (%s)\n",
                curves_ok ? "PASS" : "FAIL", curves_ok ? "all pass" : "not all pass");
    all = all && curves_ok;
    return all ? 0 : 1;
}
