#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "program_builder.hpp"
#include "screw_grasp/conic_solver.hpp"

using namespace screw_grasp;
using sg_test::add_equality;
using sg_test::add_soc;
using sg_test::blank_program;

namespace {

SolveSettings tight() {
    SolveSettings s;
    s.feasibility_tol = 1e-10;
    s.duality_gap_tol = 1e-10;
    return s;
}

}  // namespace

TEST(ConicSolver, BoxOnlyLinearProgram) {
    auto p = blank_program(1);
    p.objective << 1.0;
    p.upper << 3.0;
    const auto r = solve(p, tight());
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_NEAR(r.objective, 3.0, 1e-8);
}

TEST(ConicSolver, DiskMaximizesAlongDiagonal) {
    // max x + y  s.t. ||(x, y)|| <= 1
    auto p = blank_program(2);
    p.objective << 1.0, 1.0;
    add_soc(p, Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2), 1.0);
    const auto r = solve(p, tight());
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_NEAR(r.objective, std::sqrt(2.0), 1e-8);
    EXPECT_NEAR(r.primal[0], std::sqrt(0.5), 1e-6);
}

TEST(ConicSolver, ConeWithOffset) {
    // max t  s.t. ||(t, 1)|| <= 2
    auto p = blank_program(1);
    p.objective << 1.0;
    Eigen::MatrixXd A(2, 1);
    A << 1.0, 0.0;
    Eigen::VectorXd b(2);
    b << 0.0, 1.0;
    add_soc(p, A, b, Eigen::VectorXd::Zero(1), 2.0);
    const auto r = solve(p, tight());
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_NEAR(r.objective, std::sqrt(3.0), 1e-8);
}

TEST(ConicSolver, EqualityAndConeTogether) {
    // max eta s.t. x = eta, ||x|| <= 2 - y, y >= 0.5  => eta = 1.5
    auto p = blank_program(3);  // x, y, eta
    p.objective << 0, 0, 1;
    add_equality(p, Eigen::RowVector3d(1, 0, -1), 0.0);
    Eigen::MatrixXd A(1, 3);
    A << 1, 0, 0;
    add_soc(p, A, Eigen::VectorXd::Zero(1), Eigen::Vector3d(0, -1, 0), 2.0);
    p.lower[1] = 0.5;
    const auto r = solve(p, tight());
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_NEAR(r.objective, 1.5, 1e-8);
    EXPECT_LE(r.residuals.primal_feasibility, 1e-9);
    EXPECT_LE(r.residuals.cone_violation, 1e-9);
}

TEST(ConicSolver, DetectsInfeasibility) {
    // x >= 2 and ||x|| <= 1
    auto p = blank_program(1);
    p.objective << 1.0;
    p.lower << 2.0;
    add_soc(p, Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), 1.0);
    const auto r = solve(p);
    EXPECT_EQ(r.status, SolveStatus::Infeasible);
    ASSERT_TRUE(r.certificate.has_value());
    EXPECT_LT(r.certificate->ray_value, 0.0);
}

TEST(ConicSolver, DetectsUnboundedness) {
    // max x s.t. ||y|| <= x
    auto p = blank_program(2);
    p.objective << 0.0, 1.0;
    Eigen::MatrixXd A(1, 2);
    A << 1, 0;
    add_soc(p, A, Eigen::VectorXd::Zero(1), Eigen::Vector2d(0, 1), 0.0);
    const auto r = solve(p);
    EXPECT_EQ(r.status, SolveStatus::Unbounded);
}

TEST(ConicSolver, RejectsNonFiniteData) {
    auto p = blank_program(1);
    p.objective << std::nan("");
    EXPECT_THROW(solve(p), DataError);
}

TEST(ConicSolver, RandomLinearProgramsMatchVertexEnumeration) {
    // max c^T x over a random box-and-halfplane polygon in 2D, checked by
    // brute-force enumeration of constraint intersections.
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        auto p = blank_program(2);
        p.objective << U(rng), U(rng);
        p.lower << -1.0, -1.0;
        p.upper << 1.0, 1.0;
        // a^T x <= 0.5 encoded as || 0 || <= 0.5 - a^T x
        const Eigen::Vector2d a(U(rng), U(rng));
        add_soc(p, Eigen::MatrixXd::Zero(1, 2), Eigen::VectorXd::Zero(1), -a, 0.5);
        const auto r = solve(p, tight());
        ASSERT_EQ(r.status, SolveStatus::Optimal) << "trial " << trial;

        std::vector<std::pair<Eigen::Vector2d, double>> hs = {
            {{1, 0}, 1}, {{-1, 0}, 1}, {{0, 1}, 1}, {{0, -1}, 1}, {a, 0.5}};
        double best = -kInf;
        for (std::size_t i = 0; i < hs.size(); ++i) {
            for (std::size_t j = i + 1; j < hs.size(); ++j) {
                Eigen::Matrix2d M;
                M.row(0) = hs[i].first.transpose();
                M.row(1) = hs[j].first.transpose();
                if (std::abs(M.determinant()) < 1e-12) continue;
                const Eigen::Vector2d v = M.inverse() * (Eigen::Vector2d(hs[i].second, hs[j].second));
                bool ok = true;
                for (const auto& [n, rhs] : hs) ok = ok && n.dot(v) <= rhs + 1e-12;
                if (ok) best = std::max(best, p.objective.dot(v));
            }
        }
        EXPECT_NEAR(r.objective, best, 1e-7) << "trial " << trial;
    }
}

TEST(ConicSolver, TraceCallbackSeesEveryIteration) {
    auto p = blank_program(2);
    p.objective << 1.0, 1.0;
    add_soc(p, Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2), 1.0);
    SolveSettings s;
    int calls = 0;
    s.trace = [&](const IterationTrace&) { ++calls; };
    const auto r = solve(p, s);
    EXPECT_EQ(calls, r.iterations);
}

TEST(ConicSolver, IterationLimitReturnsBestIterate) {
    auto p = blank_program(2);
    p.objective << 1.0, 1.0;
    add_soc(p, Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2), 1.0);
    SolveSettings s = tight();
    s.max_iterations = 2;
    const auto r = solve(p, s);
    EXPECT_EQ(r.status, SolveStatus::IterationLimit);
    EXPECT_EQ(r.primal.size(), 2);
}

TEST(ConicSolver, SettingsValidation) {
    SolveSettings s;
    s.feasibility_tol = 0.0;
    EXPECT_THROW(s.validate(), InvalidArgument);
}
