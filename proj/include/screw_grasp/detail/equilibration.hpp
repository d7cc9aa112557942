#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "screw_grasp/detail/cones.hpp"

namespace screw_grasp::detail {

/// Diagonal scalings with  A~ = D A C,  G~ = E G C.  E is constant on each
/// second-order cone block so the scaled slack stays in the same cone.
struct Equilibration {
    Eigen::VectorXd D;  // equality rows
    Eigen::VectorXd E;  // cone rows
    Eigen::VectorXd C;  // columns
};

/// Ruiz equilibration in the infinity norm. Scales A and G in place.
inline Equilibration ruiz_equilibrate(Eigen::MatrixXd& A, Eigen::MatrixXd& G, const ConeStructure& K,
                                      int iterations = 15) {
    const Eigen::Index n = std::max(A.cols(), G.cols());
    Equilibration eq{Eigen::VectorXd::Ones(A.rows()), Eigen::VectorXd::Ones(G.rows()), Eigen::VectorXd::Ones(n)};
    constexpr double kMin = 1e-4;
    constexpr double kMax = 1e4;
    auto inv_sqrt = [](double v) { return v > 1e-12 ? 1.0 / std::sqrt(v) : 1.0; };

    for (int it = 0; it < iterations; ++it) {
        Eigen::VectorXd dc(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            double m = 0.0;
            if (A.rows() > 0) m = std::max(m, A.col(j).cwiseAbs().maxCoeff());
            if (G.rows() > 0) m = std::max(m, G.col(j).cwiseAbs().maxCoeff());
            dc[j] = inv_sqrt(m);
        }
        Eigen::VectorXd dr(A.rows());
        for (Eigen::Index i = 0; i < A.rows(); ++i) dr[i] = inv_sqrt(n > 0 ? A.row(i).cwiseAbs().maxCoeff() : 0.0);
        Eigen::VectorXd de(G.rows());
        for (int i = 0; i < K.n_nonneg; ++i) de[i] = inv_sqrt(n > 0 ? G.row(i).cwiseAbs().maxCoeff() : 0.0);
        K.for_each_soc([&](int off, int d) {
            const double m = n > 0 ? G.middleRows(off, d).cwiseAbs().maxCoeff() : 0.0;
            de.segment(off, d).setConstant(inv_sqrt(m));
        });

        // Keep cumulative factors bounded.
        for (Eigen::Index j = 0; j < n; ++j) dc[j] = std::clamp(eq.C[j] * dc[j], kMin, kMax) / eq.C[j];
        for (Eigen::Index i = 0; i < A.rows(); ++i) dr[i] = std::clamp(eq.D[i] * dr[i], kMin, kMax) / eq.D[i];
        for (Eigen::Index i = 0; i < G.rows(); ++i) de[i] = std::clamp(eq.E[i] * de[i], kMin, kMax) / eq.E[i];

        A = dr.asDiagonal() * A * dc.asDiagonal();
        G = de.asDiagonal() * G * dc.asDiagonal();
        eq.C = eq.C.cwiseProduct(dc);
        eq.D = eq.D.cwiseProduct(dr);
        eq.E = eq.E.cwiseProduct(de);
    }
    return eq;
}

}  // namespace screw_grasp::detail
