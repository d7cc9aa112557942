#pragma once

// Cone algebra for the product cone R^l_+ x Q^{n_1} x ... x Q^{n_k}.
// Vectors are laid out with the nonnegative orthant first, then each
// second-order cone (t, u) with ||u|| <= t.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace screw_grasp::detail {

struct ConeStructure {
    int n_nonneg = 0;
    std::vector<int> soc_dims;

    int total() const {
        int t = n_nonneg;
        for (int d : soc_dims) t += d;
        return t;
    }
    /// Barrier degree: one per orthant coordinate and one per Lorentz cone.
    int degree() const { return n_nonneg + static_cast<int>(soc_dims.size()); }

    template <class F>
    void for_each_soc(F&& f) const {
        int off = n_nonneg;
        for (int d : soc_dims) {
            f(off, d);
            off += d;
        }
    }
};

/// sqrt(t^2 - ||u||^2), or a non-positive value when outside the cone interior.
inline double soc_residual(double t, double unorm) {
    if (t <= unorm) return t - unorm;
    return std::sqrt((t - unorm) * (t + unorm));
}

/// Smallest "eigenvalue" of v with respect to the cone.
inline double min_eigenvalue(const ConeStructure& K, const Eigen::VectorXd& v) {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < K.n_nonneg; ++i) m = std::min(m, v[i]);
    K.for_each_soc([&](int off, int d) { m = std::min(m, v[off] - v.segment(off + 1, d - 1).norm()); });
    return m;
}

inline Eigen::VectorXd identity_element(const ConeStructure& K) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(K.total());
    e.head(K.n_nonneg).setOnes();
    K.for_each_soc([&](int off, int) { e[off] = 1.0; });
    return e;
}

inline Eigen::VectorXd jordan_product(const ConeStructure& K, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    Eigen::VectorXd w(u.size());
    w.head(K.n_nonneg) = u.head(K.n_nonneg).cwiseProduct(v.head(K.n_nonneg));
    K.for_each_soc([&](int off, int d) {
        w[off] = u.segment(off, d).dot(v.segment(off, d));
        w.segment(off + 1, d - 1) = u[off] * v.segment(off + 1, d - 1) + v[off] * u.segment(off + 1, d - 1);
    });
    return w;
}

/// Solves lambda o x = d for x.
inline Eigen::VectorXd jordan_divide(const ConeStructure& K, const Eigen::VectorXd& lambda, const Eigen::VectorXd& d) {
    Eigen::VectorXd x(d.size());
    x.head(K.n_nonneg) = d.head(K.n_nonneg).cwiseQuotient(lambda.head(K.n_nonneg));
    K.for_each_soc([&](int off, int n) {
        const double l0 = lambda[off];
        const auto l1 = lambda.segment(off + 1, n - 1);
        const double det = l0 * l0 - l1.squaredNorm();
        const double x0 = (l0 * d[off] - l1.dot(d.segment(off + 1, n - 1))) / det;
        x[off] = x0;
        x.segment(off + 1, n - 1) = (d.segment(off + 1, n - 1) - x0 * l1) / l0;
    });
    return x;
}

/// Largest alpha >= 0 with v + alpha dv in the cone (v interior). +inf when unbounded.
inline double max_step(const ConeStructure& K, const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
    double alpha = std::numeric_limits<double>::infinity();
    for (int i = 0; i < K.n_nonneg; ++i) {
        if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
    }
    K.for_each_soc([&](int off, int d) {
        const double t = v[off];
        const double dt = dv[off];
        const auto u = v.segment(off + 1, d - 1);
        const auto du = dv.segment(off + 1, d - 1);
        // f(a) = (t + a dt)^2 - ||u + a du||^2 = qa a^2 + 2 qb a + qc, qc > 0.
        const double qa = dt * dt - du.squaredNorm();
        const double qb = t * dt - u.dot(du);
        const double qc = std::max(soc_residual(t, u.norm()), 0.0);
        const double qc2 = qc * qc;
        double a = std::numeric_limits<double>::infinity();
        const double scale = std::max({std::abs(qa), std::abs(qb), 1e-300});
        if (std::abs(qa) <= 1e-14 * scale) {
            if (qb < 0.0) a = -qc2 / (2.0 * qb);
        } else {
            const double disc = qb * qb - qa * qc2;
            if (disc >= 0.0) {
                const double sq = std::sqrt(disc);
                const double q = -(qb + std::copysign(sq, qb));
                const double r1 = q / qa;
                const double r2 = (q != 0.0) ? qc2 / q : std::numeric_limits<double>::infinity();
                for (double r : {r1, r2}) {
                    if (r > 0.0) a = std::min(a, r);
                }
            }
        }
        // Keep t + a dt >= 0 (the other nappe of the quadric).
        if (dt < 0.0) a = std::min(a, -t / dt);
        alpha = std::min(alpha, a);
    });
    return alpha;
}

/// Nesterov-Todd scaling W with W z = W^{-1} s = lambda. W is symmetric.
struct NtScaling {
    Eigen::VectorXd nonneg;                // diagonal of W on the orthant
    std::vector<Eigen::MatrixXd> soc;      // dense W blocks
    std::vector<Eigen::MatrixXd> soc_inv;  // dense W^{-1} blocks
    Eigen::VectorXd lambda;
    bool ok = true;

    Eigen::VectorXd apply(const ConeStructure& K, const Eigen::VectorXd& v) const {
        Eigen::VectorXd out(v.size());
        out.head(K.n_nonneg) = nonneg.cwiseProduct(v.head(K.n_nonneg));
        std::size_t i = 0;
        K.for_each_soc([&](int off, int d) { out.segment(off, d) = soc[i++] * v.segment(off, d); });
        return out;
    }
    Eigen::VectorXd apply_inverse(const ConeStructure& K, const Eigen::VectorXd& v) const {
        Eigen::VectorXd out(v.size());
        out.head(K.n_nonneg) = v.head(K.n_nonneg).cwiseQuotient(nonneg);
        std::size_t i = 0;
        K.for_each_soc([&](int off, int d) { out.segment(off, d) = soc_inv[i++] * v.segment(off, d); });
        return out;
    }
    /// Writes -W^2 into the diagonal block of M starting at (row0, row0).
    void write_negative_squared(const ConeStructure& K, Eigen::MatrixXd& M, int row0) const {
        for (int i = 0; i < K.n_nonneg; ++i) M(row0 + i, row0 + i) = -nonneg[i] * nonneg[i];
        std::size_t i = 0;
        K.for_each_soc([&](int off, int d) {
            M.block(row0 + off, row0 + off, d, d) = -(soc[i] * soc[i]);
            ++i;
        });
    }
};

inline NtScaling nt_scaling(const ConeStructure& K, const Eigen::VectorXd& s, const Eigen::VectorXd& z) {
    NtScaling W;
    W.lambda.resize(s.size());
    W.nonneg.resize(K.n_nonneg);
    for (int i = 0; i < K.n_nonneg; ++i) {
        if (!(s[i] > 0.0) || !(z[i] > 0.0)) W.ok = false;
        W.nonneg[i] = std::sqrt(s[i] / z[i]);
        W.lambda[i] = std::sqrt(s[i] * z[i]);
    }
    K.for_each_soc([&](int off, int d) {
        const auto sv = s.segment(off, d);
        const auto zv = z.segment(off, d);
        const double sdet = soc_residual(sv[0], sv.tail(d - 1).norm());
        const double zdet = soc_residual(zv[0], zv.tail(d - 1).norm());
        if (!(sdet > 0.0) || !(zdet > 0.0)) {
            W.ok = false;
            W.soc.emplace_back(Eigen::MatrixXd::Identity(d, d));
            W.soc_inv.emplace_back(Eigen::MatrixXd::Identity(d, d));
            W.lambda.segment(off, d) = sv;
            return;
        }
        const Eigen::VectorXd sb = sv / sdet;
        const Eigen::VectorXd zb = zv / zdet;
        const double gamma = std::sqrt((1.0 + sb.dot(zb)) / 2.0);
        Eigen::VectorXd wb = sb;
        wb[0] += zb[0];
        wb.tail(d - 1) -= zb.tail(d - 1);
        wb /= 2.0 * gamma;
        const double eta = std::sqrt(sdet / zdet);

        Eigen::MatrixXd H(d, d);
        H(0, 0) = wb[0];
        H.block(0, 1, 1, d - 1) = wb.tail(d - 1).transpose();
        H.block(1, 0, d - 1, 1) = wb.tail(d - 1);
        H.block(1, 1, d - 1, d - 1) = Eigen::MatrixXd::Identity(d - 1, d - 1) +
                                      wb.tail(d - 1) * wb.tail(d - 1).transpose() / (1.0 + wb[0]);
        Eigen::MatrixXd Hinv = H;
        Hinv.block(0, 1, 1, d - 1) *= -1.0;
        Hinv.block(1, 0, d - 1, 1) *= -1.0;

        W.soc.emplace_back(eta * H);
        W.soc_inv.emplace_back(Hinv / eta);
        W.lambda.segment(off, d) = W.soc.back() * zv;
    });
    return W;
}

}  // namespace screw_grasp::detail
