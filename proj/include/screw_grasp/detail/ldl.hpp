#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace screw_grasp::detail {

/// Dense LDL^T of a symmetric quasi-definite matrix, without pivoting.
///
/// `signs[i]` is the expected sign (+1/-1) of pivot i. A pivot that comes out
/// with the wrong sign or below `delta` in magnitude is replaced by
/// signs[i] * delta (dynamic regularization); callers recover accuracy with
/// iterative refinement against the unperturbed matrix.
class QuasiDefiniteLdl {
public:
    QuasiDefiniteLdl() = default;

    void factor(const Eigen::MatrixXd& K, const std::vector<int>& signs, double delta) {
        const Eigen::Index n = K.rows();
        L_ = Eigen::MatrixXd::Identity(n, n);
        D_ = Eigen::VectorXd::Zero(n);
        bumps_ = 0;
        Eigen::MatrixXd A = K;
        for (Eigen::Index j = 0; j < n; ++j) {
            double d = A(j, j);
            for (Eigen::Index k = 0; k < j; ++k) d -= L_(j, k) * L_(j, k) * D_[k];
            const double sgn = signs[static_cast<std::size_t>(j)];
            if (d * sgn < delta) {
                d = sgn * delta;
                ++bumps_;
            }
            D_[j] = d;
            for (Eigen::Index i = j + 1; i < n; ++i) {
                double v = A(i, j);
                for (Eigen::Index k = 0; k < j; ++k) v -= L_(i, k) * L_(j, k) * D_[k];
                L_(i, j) = v / d;
            }
        }
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
        Eigen::VectorXd x = L_.triangularView<Eigen::UnitLower>().solve(b);
        x = x.cwiseQuotient(D_);
        return L_.transpose().triangularView<Eigen::UnitUpper>().solve(x);
    }

    int bumps() const { return bumps_; }

private:
    Eigen::MatrixXd L_;
    Eigen::VectorXd D_;
    int bumps_ = 0;
};

}  // namespace screw_grasp::detail
