// Library walkthrough: builds the door-handle and cuboid problems, evaluates
// the metric, finds the turning limit and cross-checks with the LP oracle.

#include <cstdio>
#include <numbers>

#include "screw_grasp/screw_grasp.hpp"

using namespace screw_grasp;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

void door_handle() {
    std::printf("door handle: eta(theta) for several finger positions x_c\n");
    std::printf("%10s", "theta[deg]");
    const DoorHandleParams base;
    const double xs[] = {0.0, 0.25 * base.L, 0.5 * base.L, 0.75 * base.L};
    for (double x : xs) std::printf("  x_c=%.3fm", x);
    std::printf("\n");
    for (int deg = 0; deg <= 20; deg += 4) {
        std::printf("%10d", deg);
        for (double x : xs) {
            DoorHandleParams d;
            d.theta = deg * kDeg;
            d.x_c = x;
            const MetricResult r = local_metric(make_door_handle(d), Direction::Positive);
            if (r.eta) std::printf("  %11.5f", *r.eta);
            else std::printf("  %11s", std::string(to_string(r.status)).c_str());
        }
        std::printf("\n");
    }

    // Global metric over the turning path and the angle where eta reaches zero.
    const auto grid = linspace(0.0, 20.0 * kDeg, 81);
    const SweepResult s = metric_sweep(
        [](double th) {
            DoorHandleParams d;
            d.theta = th;
            return make_door_handle(d);
        },
        grid, Direction::Positive);
    for (std::size_t i = 0; i + 1 < s.rows.size(); ++i) {
        const double a = *s.rows[i].result.eta, b = *s.rows[i + 1].result.eta;
        if (a >= 0.0 && b < 0.0) {
            std::printf("turning limit: eta reaches zero at %.2f deg\n", (grid[i] + (grid[i + 1] - grid[i]) * a / (a - b)) / kDeg);
            break;
        }
    }
    if (s.global.eta_star) std::printf("eta* over 0..20 deg: %.5f at theta = %s rad\n\n", *s.global.eta_star, s.global.argmin_label.c_str());
}

void cuboid() {
    CuboidParams c;
    c.alpha = 50.0 * kDeg;
    c.x_E = 0.4 * c.L;
    std::printf("cuboid at alpha = 50 deg, x_E = 0.4L\n");
    const GraspProblem pivot = make_cuboid(c, CuboidTask::Pivot);
    const GraspProblem slide = make_cuboid(c, CuboidTask::Slide);
    struct Case {
        const char* label;
        const GraspProblem* p;
        Direction d;
    };
    const Case cases[] = {{"pivot CCW", &pivot, Direction::Positive},
                          {"pivot CW ", &pivot, Direction::Negative},
                          {"slide +X ", &slide, Direction::Positive},
                          {"slide -X ", &slide, Direction::Negative}};
    for (const auto& k : cases) {
        const MetricResult r = local_metric(*k.p, k.d);
        const SolveResult lp = solve_with_oracle(compile(*k.p, k.d), 64);
        std::printf("  %s  eta = %8.4f   (64-facet LP bound %8.4f, %d iterations)\n", k.label, r.eta.value_or(NAN),
                    lp.objective, r.stats.iterations);
        std::printf("             tight:");
        for (const auto& a : r.active_constraints) std::printf(" %s", a.c_str());
        std::printf("\n");
    }

    // The boundary wrench reached along S1 in the CCW sense.
    const MetricResult r = local_metric(pivot, Direction::Positive);
    const Wrench w = *r.eta * screw_to_unit_wrench(pivot.task);
    std::printf("  pivot CCW boundary wrench: f = (%.3f, %.3f, %.3f), m = (%.3f, %.3f, %.3f)\n", w.force.x(), w.force.y(),
                w.force.z(), w.moment.x(), w.moment.y(), w.moment.z());
}

}  // namespace

int main() {
    door_handle();
    cuboid();
    return 0;
}
