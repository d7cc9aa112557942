#pragma once

// Primal-dual interior-point solver for ConicProgram.
//
// The program is rewritten in the form
//
//   minimize c^T x   s.t.  A x = b,  G x + s = h,  s in K
//
// (K = orthant for box bounds x Lorentz cones) and solved on the homogeneous
// self-dual embedding with Nesterov-Todd scaling and Mehrotra
// predictor-corrector steps. The KKT system is dense and factored as a
// regularized quasi-definite LDL^T followed by iterative refinement.
// Infeasibility and unboundedness are read off the embedding's certificate
// rays (tau -> 0).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "screw_grasp/conic_program.hpp"
#include "screw_grasp/detail/cones.hpp"
#include "screw_grasp/detail/equilibration.hpp"
#include "screw_grasp/detail/ldl.hpp"
#include "screw_grasp/errors.hpp"

namespace screw_grasp {

struct IterationTrace {
    int iteration = 0;
    double primal_cost = 0.0;
    double dual_cost = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
    double mu = 0.0;
    double step = 0.0;
    double sigma = 0.0;
    double tau = 0.0;
    double kappa = 0.0;
};

struct SolveSettings {
    double feasibility_tol = 1e-8;
    double duality_gap_tol = 1e-6;  // relative
    int max_iterations = 200;
    double unboundedness_threshold = 1e10;
    bool equilibrate = true;
    /// Optional structured trace, called once per iteration.
    std::function<void(const IterationTrace&)> trace;

    void validate() const {
        if (!(feasibility_tol > 0.0)) throw InvalidArgument("feasibility_tol must be > 0");
        if (!(duality_gap_tol > 0.0)) throw InvalidArgument("duality_gap_tol must be > 0");
        if (max_iterations <= 0) throw InvalidArgument("max_iterations must be > 0");
        if (!(unboundedness_threshold > 0.0)) throw InvalidArgument("unboundedness_threshold must be > 0");
    }
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit, NumericalFailure };

inline std::string_view to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::IterationLimit: return "iteration_limit";
        case SolveStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

/// All three are relative measures, see evaluate_residuals().
struct Residuals {
    double primal_feasibility = kInf;
    double cone_violation = kInf;
    double duality_gap = kInf;
};

/// Farkas-type evidence attached to Infeasible / Unbounded results.
struct Certificate {
    std::string summary;
    double ray_residual = 0.0;  // ||A^T y + G^T z|| or ||(A x, G x + s)|| normalized by |value|
    double ray_value = 0.0;     // b^T y + h^T z < 0, or c^T x < 0
};

struct SolveResult {
    SolveStatus status = SolveStatus::NumericalFailure;
    double objective = std::numeric_limits<double>::quiet_NaN();  // maximized value, valid when Optimal
    Eigen::VectorXd primal;
    Residuals residuals;
    int iterations = 0;
    std::optional<Certificate> certificate;
    std::string message;
};

/// Relative primal residuals of `x` against the program data:
///   equalities:  ||F x - g||_inf / (1 + ||g||_inf)
///   cones:       max_i (||A_i x + b_i|| - c_i^T x - d_i)_+ / (1 + ||b_i|| + |d_i|)
///   bounds:      (x_j - u_j)_+ / (1 + |u_j|), (l_j - x_j)_+ / (1 + |l_j|)
/// cone_violation is the max over cones and bounds. duality_gap is left at 0.
inline Residuals evaluate_residuals(const ConicProgram& p, const Eigen::VectorXd& x) {
    Residuals r;
    r.duality_gap = 0.0;
    r.primal_feasibility = 0.0;
    if (p.num_eq() > 0) {
        const double gn = p.eq_rhs.size() ? p.eq_rhs.cwiseAbs().maxCoeff() : 0.0;
        r.primal_feasibility = (p.eq_matrix * x - p.eq_rhs).cwiseAbs().maxCoeff() / (1.0 + gn);
    }
    double viol = 0.0;
    for (const auto& k : p.cones) {
        const double lhs = (k.A * x + k.b).norm();
        const double rhs = k.c.dot(x) + k.d;
        viol = std::max(viol, std::max(0.0, lhs - rhs) / (1.0 + std::max(lhs, std::abs(rhs))));
    }
    for (int j = 0; j < p.num_vars(); ++j) {
        if (std::isfinite(p.upper[j])) viol = std::max(viol, std::max(0.0, x[j] - p.upper[j]) / (1.0 + std::abs(p.upper[j])));
        if (std::isfinite(p.lower[j])) viol = std::max(viol, std::max(0.0, p.lower[j] - x[j]) / (1.0 + std::abs(p.lower[j])));
    }
    r.cone_violation = viol;
    return r;
}

class ConicBackend {
public:
    virtual ~ConicBackend() = default;
    virtual std::string_view name() const = 0;
    virtual SolveResult solve(const ConicProgram& program, const SolveSettings& settings) const = 0;
};

namespace detail {

/// c, A, b, G, h, K of the minimization form, plus the map back to bounds.
struct StandardForm {
    Eigen::VectorXd c;
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::MatrixXd G;
    Eigen::VectorXd h;
    ConeStructure K;
    /// Set when the equality rows contradict each other: y with A^T y = 0 and
    /// b^T y < 0, over the original rows.
    std::optional<Eigen::VectorXd> inconsistent_rows;
};

/// Drops equality rows that are linear combinations of the others (the
/// quasi-definite KKT system needs A with full row rank).
inline void reduce_equalities(StandardForm& sf) {
    const Eigen::Index rows = sf.A.rows();
    if (rows == 0) return;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sf.A.transpose());
    qr.setThreshold(1e-10);
    const Eigen::Index rank = qr.rank();
    if (rank == rows) return;

    std::vector<Eigen::Index> keep, drop;
    for (Eigen::Index i = 0; i < rows; ++i) (i < rank ? keep : drop).push_back(qr.colsPermutation().indices()[i]);
    std::sort(keep.begin(), keep.end());
    Eigen::MatrixXd Ak(static_cast<Eigen::Index>(keep.size()), sf.A.cols());
    Eigen::VectorXd bk(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        Ak.row(static_cast<Eigen::Index>(k)) = sf.A.row(keep[k]);
        bk[static_cast<Eigen::Index>(k)] = sf.b[keep[k]];
    }
    const auto lsq = Ak.transpose().colPivHouseholderQr();
    const double bn = 1.0 + sf.b.cwiseAbs().maxCoeff();
    for (Eigen::Index d : drop) {
        const Eigen::VectorXd lambda = lsq.solve(sf.A.row(d).transpose());
        const double mismatch = sf.b[d] - lambda.dot(bk);
        if (std::abs(mismatch) > 1e-9 * bn) {
            Eigen::VectorXd y = Eigen::VectorXd::Zero(rows);
            y[d] = 1.0;
            for (std::size_t k = 0; k < keep.size(); ++k) y[keep[k]] = -lambda[static_cast<Eigen::Index>(k)];
            if (mismatch > 0.0) y = -y;
            sf.inconsistent_rows = y;
            return;
        }
    }
    sf.A = std::move(Ak);
    sf.b = std::move(bk);
}

inline void require_finite(const Eigen::MatrixXd& M, const char* what) {
    if (!M.allFinite()) throw DataError(std::string("non-finite value in ") + what);
}

inline StandardForm to_standard_form(const ConicProgram& p) {
    p.validate();
    require_finite(p.objective, "objective");
    require_finite(p.eq_matrix, "equality matrix");
    require_finite(p.eq_rhs, "equality rhs");
    for (const auto& k : p.cones) {
        require_finite(k.A, "cone matrix");
        require_finite(k.b, "cone offset");
        require_finite(k.c, "cone vector");
        if (!std::isfinite(k.d)) throw DataError("non-finite cone constant");
    }
    const int n = p.num_vars();
    for (int j = 0; j < n; ++j) {
        if (std::isnan(p.lower[j]) || std::isnan(p.upper[j])) throw DataError("NaN variable bound");
        if (p.lower[j] == kInf || p.upper[j] == -kInf) throw DataError("infinite bound on the wrong side");
    }

    StandardForm sf;
    sf.c = -p.objective;
    sf.A = p.eq_matrix.rows() > 0 ? p.eq_matrix : Eigen::MatrixXd(0, n);
    sf.b = p.eq_rhs;
    reduce_equalities(sf);

    std::vector<std::pair<int, double>> rows;  // (signed column + 1, rhs) for bounds
    for (int j = 0; j < n; ++j) {
        if (std::isfinite(p.upper[j])) rows.emplace_back(j + 1, p.upper[j]);
        if (std::isfinite(p.lower[j])) rows.emplace_back(-(j + 1), -p.lower[j]);
    }
    sf.K.n_nonneg = static_cast<int>(rows.size());
    int m = sf.K.n_nonneg;
    for (const auto& k : p.cones) {
        sf.K.soc_dims.push_back(static_cast<int>(k.A.rows()) + 1);
        m += static_cast<int>(k.A.rows()) + 1;
    }
    sf.G = Eigen::MatrixXd::Zero(m, n);
    sf.h = Eigen::VectorXd::Zero(m);
    int r = 0;
    for (const auto& [col, rhs] : rows) {
        sf.G(r, std::abs(col) - 1) = col > 0 ? 1.0 : -1.0;
        sf.h[r] = rhs;
        ++r;
    }
    for (const auto& k : p.cones) {
        sf.G.row(r) = -k.c.transpose();
        sf.h[r] = k.d;
        sf.G.middleRows(r + 1, k.A.rows()) = -k.A;
        sf.h.segment(r + 1, k.A.rows()) = k.b;
        r += static_cast<int>(k.A.rows()) + 1;
    }
    return sf;
}

class InteriorPoint {
public:
    InteriorPoint(const ConicProgram& program, const SolveSettings& settings)
        : program_(program), settings_(settings), orig_(to_standard_form(program)) {
        work_ = orig_;
        n_ = static_cast<int>(work_.c.size());
        p_ = static_cast<int>(work_.A.rows());
        m_ = static_cast<int>(work_.G.rows());
        if (settings_.equilibrate && n_ > 0) {
            scale_ = ruiz_equilibrate(work_.A, work_.G, work_.K);
        } else {
            scale_ = {Eigen::VectorXd::Ones(p_), Eigen::VectorXd::Ones(m_), Eigen::VectorXd::Ones(n_)};
        }
        work_.b = scale_.D.cwiseProduct(orig_.b);
        work_.h = scale_.E.cwiseProduct(orig_.h);
        work_.c = scale_.C.cwiseProduct(orig_.c);
        signs_.assign(static_cast<std::size_t>(m_), -1);
        signs_.insert(signs_.end(), static_cast<std::size_t>(n_), +1);
        signs_.insert(signs_.end(), static_cast<std::size_t>(p_), -1);
    }

    SolveResult run();

private:
    struct Direction {
        Eigen::VectorXd dx, dy, dz, ds;
        double dtau = 0.0;
        double dkappa = 0.0;
    };

    struct Metrics {
        double pres = kInf;
        double cone = kInf;
        double dres = kInf;
        double pcost = 0.0;
        double dcost = 0.0;
        double gap = 0.0;
        double relgap = kInf;
    };

    void assemble_kkt(const NtScaling* W);
    Eigen::VectorXd kkt_solve(const Eigen::VectorXd& rx, const Eigen::VectorXd& ry, const Eigen::VectorXd& rz) const;
    void initialize();
    Metrics metrics() const;
    Direction direction(const NtScaling& W, const Eigen::VectorXd& u1, const Eigen::VectorXd& ds_target,
                        double dkappa_target, double residual_weight) const;
    double step_to_boundary(const Direction& d) const;
    SolveResult finish(SolveStatus status, int iterations, std::string message = {}) const;

    Eigen::VectorXd unscaled_x() const { return scale_.C.cwiseProduct(x_); }
    Eigen::VectorXd unscaled_s() const { return s_.cwiseQuotient(scale_.E); }
    Eigen::VectorXd unscaled_y() const { return scale_.D.cwiseProduct(y_); }
    Eigen::VectorXd unscaled_z() const { return scale_.E.cwiseProduct(z_); }

    const ConicProgram& program_;
    SolveSettings settings_;
    StandardForm orig_;
    StandardForm work_;
    Equilibration scale_;
    int n_ = 0, p_ = 0, m_ = 0;
    std::vector<int> signs_;

    Eigen::MatrixXd kkt_;      // unregularized, ordered [z, x, y]
    QuasiDefiniteLdl ldl_;
    mutable std::optional<Eigen::FullPivLU<Eigen::MatrixXd>> lu_;  // built on demand per factorization

    Eigen::VectorXd x_, y_, z_, s_;
    double tau_ = 1.0, kappa_ = 1.0;

    static constexpr double kStaticReg = 1e-9;
    static constexpr double kDynamicReg = 1e-11;
    static constexpr int kRefinementSteps = 10;
    static constexpr double kFallbackTol = 1e-10;
};

inline void InteriorPoint::assemble_kkt(const NtScaling* W) {
    const int N = m_ + n_ + p_;
    kkt_ = Eigen::MatrixXd::Zero(N, N);
    if (W) {
        W->write_negative_squared(work_.K, kkt_, 0);
    } else {
        kkt_.topLeftCorner(m_, m_) = -Eigen::MatrixXd::Identity(m_, m_);
    }
    kkt_.block(m_, 0, n_, m_) = work_.G.transpose();
    kkt_.block(0, m_, m_, n_) = work_.G;
    kkt_.block(m_ + n_, m_, p_, n_) = work_.A;
    kkt_.block(m_, m_ + n_, n_, p_) = work_.A.transpose();

    Eigen::MatrixXd reg = kkt_;
    for (int i = 0; i < N; ++i) reg(i, i) += signs_[static_cast<std::size_t>(i)] * kStaticReg;
    ldl_.factor(reg, signs_, kDynamicReg);
    lu_.reset();
}

// Solves [[0, A^T, G^T], [A, 0, 0], [G, 0, -W^2]] (dx, dy, dz) = (rx, ry, rz).
inline Eigen::VectorXd InteriorPoint::kkt_solve(const Eigen::VectorXd& rx, const Eigen::VectorXd& ry,
                                                const Eigen::VectorXd& rz) const {
    Eigen::VectorXd rhs(m_ + n_ + p_);
    rhs << rz, rx, ry;
    Eigen::VectorXd sol = ldl_.solve(rhs);
    const double rhs_norm = rhs.size() ? rhs.cwiseAbs().maxCoeff() : 0.0;
    auto residual = [&](const Eigen::VectorXd& v) {
        const Eigen::VectorXd res = rhs - kkt_ * v;
        return res.size() ? res.cwiseAbs().maxCoeff() : 0.0;
    };
    double prev = kInf;
    for (int it = 0; it < kRefinementSteps; ++it) {
        const Eigen::VectorXd res = rhs - kkt_ * sol;
        const double rn = res.size() ? res.cwiseAbs().maxCoeff() : 0.0;
        if (rn <= 1e-14 * (1.0 + rhs_norm) || rn >= prev) break;
        prev = rn;
        sol += ldl_.solve(res);
    }
    // Near a degenerate optimum the regularization can swamp the smallest
    // pivots and refinement stops converging; fall back to full pivoting.
    if (!(residual(sol) <= kFallbackTol * (1.0 + rhs_norm))) {
        if (!lu_) lu_.emplace(kkt_);
        Eigen::VectorXd alt = lu_->solve(rhs);
        alt += lu_->solve(Eigen::VectorXd(rhs - kkt_ * alt));
        if (alt.allFinite() && !(residual(sol) <= residual(alt))) sol = alt;
    }
    Eigen::VectorXd out(m_ + n_ + p_);
    out << sol.segment(m_, n_), sol.tail(p_), sol.head(m_);  // (dx, dy, dz)
    return out;
}

inline void InteriorPoint::initialize() {
    assemble_kkt(nullptr);
    const Eigen::VectorXd zero_n = Eigen::VectorXd::Zero(n_);
    const Eigen::VectorXd zero_p = Eigen::VectorXd::Zero(p_);
    const Eigen::VectorXd zero_m = Eigen::VectorXd::Zero(m_);

    // Least-squares primal point: min ||s||^2 s.t. G x + s = h, A x = b.
    const Eigen::VectorXd prim = kkt_solve(zero_n, work_.b, work_.h);
    x_ = prim.head(n_);
    s_ = -prim.tail(m_);
    // Least-norm dual point: min ||z||^2 s.t. A^T y + G^T z + c = 0.
    const Eigen::VectorXd dual = kkt_solve(-work_.c, zero_p, zero_m);
    y_ = dual.segment(n_, p_);
    z_ = dual.tail(m_);

    const Eigen::VectorXd e = identity_element(work_.K);
    if (m_ > 0) {
        const double ap = -min_eigenvalue(work_.K, s_);
        if (ap >= 0.0) s_ += (1.0 + ap) * e;
        const double ad = -min_eigenvalue(work_.K, z_);
        if (ad >= 0.0) z_ += (1.0 + ad) * e;
    }
    tau_ = 1.0;
    kappa_ = 1.0;
}

inline InteriorPoint::Metrics InteriorPoint::metrics() const {
    Metrics mt;
    const Eigen::VectorXd x = unscaled_x() / tau_;
    const Eigen::VectorXd y = unscaled_y() / tau_;
    const Eigen::VectorXd z = unscaled_z() / tau_;
    const Eigen::VectorXd s = unscaled_s() / tau_;
    const Residuals r = evaluate_residuals(program_, x);
    double slack_res = 0.0;
    if (m_ > 0) {
        const double hn = orig_.h.cwiseAbs().maxCoeff();
        slack_res = (orig_.G * x + s - orig_.h).cwiseAbs().maxCoeff() / (1.0 + hn);
    }
    mt.pres = std::max(r.primal_feasibility, slack_res);
    mt.cone = r.cone_violation;
    Eigen::VectorXd dr = orig_.c;
    if (p_ > 0) dr += orig_.A.transpose() * y;
    if (m_ > 0) dr += orig_.G.transpose() * z;
    const double cn = orig_.c.size() ? orig_.c.cwiseAbs().maxCoeff() : 0.0;
    mt.dres = dr.size() ? dr.cwiseAbs().maxCoeff() / (1.0 + cn) : 0.0;
    mt.pcost = orig_.c.dot(x);
    mt.dcost = -orig_.b.dot(y) - orig_.h.dot(z);
    mt.gap = m_ > 0 ? s.dot(z) : 0.0;
    const double denom = std::max(1.0, std::min(std::abs(mt.pcost), std::abs(mt.dcost)));
    mt.relgap = std::max(std::abs(mt.gap), std::abs(mt.pcost - mt.dcost)) / denom;
    return mt;
}

inline InteriorPoint::Direction InteriorPoint::direction(const NtScaling& W, const Eigen::VectorXd& u1,
                                                        const Eigen::VectorXd& ds_target, double dkappa_target,
                                                        double residual_weight) const {
    // Residuals of the embedding at the current point (scaled data).
    Eigen::VectorXd rx = work_.c * tau_;
    if (p_ > 0) rx += work_.A.transpose() * y_;
    if (m_ > 0) rx += work_.G.transpose() * z_;
    const Eigen::VectorXd ry = work_.A * x_ - work_.b * tau_;
    const Eigen::VectorXd rz = work_.G * x_ + s_ - work_.h * tau_;
    const double rtau = kappa_ + work_.c.dot(x_) + work_.b.dot(y_) + work_.h.dot(z_);

    const Eigen::VectorXd ldiv = m_ > 0 ? jordan_divide(work_.K, W.lambda, ds_target) : Eigen::VectorXd();
    const Eigen::VectorXd Wl = m_ > 0 ? W.apply(work_.K, ldiv) : Eigen::VectorXd();
    const Eigen::VectorXd u0 = kkt_solve(-residual_weight * rx, -residual_weight * ry,
                                         m_ > 0 ? Eigen::VectorXd(-residual_weight * rz - Wl) : Eigen::VectorXd());

    auto inner = [&](const Eigen::VectorXd& u) {
        return work_.c.dot(u.head(n_)) + work_.b.dot(u.segment(n_, p_)) + work_.h.dot(u.tail(m_));
    };
    const double num = -residual_weight * rtau - dkappa_target / tau_ - inner(u0);
    const double den = inner(u1) - kappa_ / tau_;

    Direction d;
    d.dtau = num / den;
    const Eigen::VectorXd u = u0 + d.dtau * u1;
    d.dx = u.head(n_);
    d.dy = u.segment(n_, p_);
    d.dz = u.tail(m_);
    d.ds = m_ > 0 ? Eigen::VectorXd(W.apply(work_.K, ldiv - W.apply(work_.K, d.dz))) : Eigen::VectorXd();
    d.dkappa = (dkappa_target - kappa_ * d.dtau) / tau_;
    return d;
}

inline double InteriorPoint::step_to_boundary(const Direction& d) const {
    double a = kInf;
    if (m_ > 0) {
        a = std::min(a, max_step(work_.K, s_, d.ds));
        a = std::min(a, max_step(work_.K, z_, d.dz));
    }
    if (d.dtau < 0.0) a = std::min(a, -tau_ / d.dtau);
    if (d.dkappa < 0.0) a = std::min(a, -kappa_ / d.dkappa);
    return a;
}

inline SolveResult InteriorPoint::finish(SolveStatus status, int iterations, std::string message) const {
    SolveResult res;
    res.status = status;
    res.iterations = iterations;
    res.message = std::move(message);
    const double t = tau_ > 0.0 ? tau_ : 1.0;
    res.primal = unscaled_x() / t;
    res.residuals = evaluate_residuals(program_, res.primal);
    const Metrics mt = metrics();
    res.residuals.duality_gap = mt.relgap;
    if (status == SolveStatus::Optimal) res.objective = program_.objective.dot(res.primal);
    return res;
}

inline SolveResult InteriorPoint::run() {
    if (n_ == 0) throw UnsupportedProgram("program has no variables");
    if (orig_.inconsistent_rows) {
        SolveResult res;
        res.status = SolveStatus::Infeasible;
        res.message = "primal infeasible: equality rows are inconsistent";
        res.primal = Eigen::VectorXd::Zero(n_);
        res.residuals = evaluate_residuals(program_, res.primal);
        const Eigen::VectorXd& y = *orig_.inconsistent_rows;
        res.certificate = Certificate{"combination of equality rows with A^T y = 0 and b^T y < 0",
                                      (orig_.A.transpose() * y).cwiseAbs().maxCoeff(), orig_.b.dot(y)};
        return res;
    }
    initialize();
    const ConeStructure& K = work_.K;
    const Eigen::VectorXd e = identity_element(K);
    const double degree = K.degree() + 1.0;
    int stalls = 0;

    // Best iterate so far; failures report it instead of a diverged point.
    struct Snapshot {
        Eigen::VectorXd x, y, z, s;
        double tau = 1.0, kappa = 1.0, score = kInf;
    } best;
    auto fail = [&](SolveStatus status, int iterations, const char* message) {
        if (std::isfinite(best.score)) {
            x_ = best.x;
            y_ = best.y;
            z_ = best.z;
            s_ = best.s;
            tau_ = best.tau;
            kappa_ = best.kappa;
        }
        return finish(status, iterations, message);
    };

    for (int iter = 0;; ++iter) {
        const Metrics mt = metrics();
        const double score = std::max({mt.pres / settings_.feasibility_tol, mt.cone / settings_.feasibility_tol,
                                       mt.dres / settings_.feasibility_tol, mt.relgap / settings_.duality_gap_tol});
        if (score < best.score) best = Snapshot{x_, y_, z_, s_, tau_, kappa_, score};

        if (mt.pres <= settings_.feasibility_tol && mt.cone <= settings_.feasibility_tol &&
            mt.dres <= settings_.feasibility_tol && mt.relgap <= settings_.duality_gap_tol) {
            return finish(SolveStatus::Optimal, iter);
        }

        // Certificates on the raw (unnormalized by tau) iterate.
        {
            const Eigen::VectorXd y = unscaled_y();
            const Eigen::VectorXd z = unscaled_z();
            const double by_hz = orig_.b.dot(y) + orig_.h.dot(z);
            if (by_hz < 0.0) {
                Eigen::VectorXd ray = Eigen::VectorXd::Zero(n_);
                if (p_ > 0) ray += orig_.A.transpose() * y;
                if (m_ > 0) ray += orig_.G.transpose() * z;
                const double rr = ray.cwiseAbs().maxCoeff() / -by_hz;
                if (rr <= settings_.feasibility_tol) {
                    SolveResult res = finish(SolveStatus::Infeasible, iter, "primal infeasible");
                    res.certificate = Certificate{"dual ray with A^T y + G^T z ~ 0 and b^T y + h^T z < 0", rr, by_hz};
                    return res;
                }
            }
            const Eigen::VectorXd x = unscaled_x();
            const Eigen::VectorXd s = unscaled_s();
            const double cx = orig_.c.dot(x);
            if (cx < 0.0) {
                double rr = 0.0;
                if (p_ > 0) rr = std::max(rr, (orig_.A * x).cwiseAbs().maxCoeff());
                if (m_ > 0) rr = std::max(rr, (orig_.G * x + s).cwiseAbs().maxCoeff());
                rr /= -cx;
                if (rr <= settings_.feasibility_tol) {
                    SolveResult res = finish(SolveStatus::Unbounded, iter, "dual infeasible");
                    res.certificate = Certificate{"primal ray with A x ~ 0, G x + s ~ 0 and c^T x < 0", rr, cx};
                    return res;
                }
            }
            if (mt.pres <= settings_.feasibility_tol && -mt.pcost > settings_.unboundedness_threshold) {
                SolveResult res = finish(SolveStatus::Unbounded, iter, "objective exceeds unboundedness threshold");
                res.certificate = Certificate{"feasible iterate with objective above threshold", mt.pres, mt.pcost};
                return res;
            }
        }

        if (iter >= settings_.max_iterations) return fail(SolveStatus::IterationLimit, iter, "iteration limit");

        NtScaling W;
        if (m_ > 0) {
            W = nt_scaling(K, s_, z_);
            if (!W.ok) return fail(SolveStatus::NumericalFailure, iter, "iterate left the cone interior");
        }
        assemble_kkt(m_ > 0 ? &W : nullptr);
        const Eigen::VectorXd u1 = kkt_solve(-work_.c, work_.b, work_.h);

        const double mu = ((m_ > 0 ? s_.dot(z_) : 0.0) + tau_ * kappa_) / degree;

        // Predictor.
        const Eigen::VectorXd lam2 = m_ > 0 ? jordan_product(K, W.lambda, W.lambda) : Eigen::VectorXd();
        const Direction aff = direction(W, u1, m_ > 0 ? Eigen::VectorXd(-lam2) : Eigen::VectorXd(),
                                        -tau_ * kappa_, 1.0);
        const double a_aff = std::min(1.0, step_to_boundary(aff));
        double sigma = std::pow(1.0 - a_aff, 3);
        sigma = std::clamp(sigma, 0.0, 1.0);

        // Corrector.
        Eigen::VectorXd ds_target;
        if (m_ > 0) {
            const Eigen::VectorXd cross = jordan_product(K, W.apply_inverse(K, aff.ds), W.apply(K, aff.dz));
            ds_target = -lam2 - cross + sigma * mu * e;
        }
        const double dk_target = -tau_ * kappa_ - aff.dtau * aff.dkappa + sigma * mu;
        const Direction d = direction(W, u1, ds_target, dk_target, 1.0 - sigma);
        const double amax = step_to_boundary(d);
        const double alpha = std::min(1.0, 0.99 * amax);

        if (!d.dx.allFinite() || !std::isfinite(d.dtau) || !std::isfinite(alpha)) {
            return fail(SolveStatus::NumericalFailure, iter, "non-finite search direction");
        }

        x_ += alpha * d.dx;
        y_ += alpha * d.dy;
        if (m_ > 0) {
            z_ += alpha * d.dz;
            s_ += alpha * d.ds;
        }
        tau_ += alpha * d.dtau;
        kappa_ += alpha * d.dkappa;

        if (settings_.trace) {
            IterationTrace tr;
            tr.iteration = iter;
            tr.primal_cost = mt.pcost;
            tr.dual_cost = mt.dcost;
            tr.primal_residual = mt.pres;
            tr.dual_residual = mt.dres;
            tr.gap = mt.gap;
            tr.mu = mu;
            tr.step = alpha;
            tr.sigma = sigma;
            tr.tau = tau_;
            tr.kappa = kappa_;
            settings_.trace(tr);
        }

        stalls = alpha < 1e-10 ? stalls + 1 : 0;
        if (stalls >= 5) return fail(SolveStatus::NumericalFailure, iter + 1, "step length collapsed");
        if (!(tau_ > 0.0) || !(kappa_ >= 0.0)) {
            return fail(SolveStatus::NumericalFailure, iter + 1, "homogeneous variables left the positive orthant");
        }
        // Renormalize the embedding to keep magnitudes in range.
        const double scale = tau_ + kappa_;
        if (scale > 1e8 || scale < 1e-8) {
            x_ /= scale;
            y_ /= scale;
            z_ /= scale;
            s_ /= scale;
            tau_ /= scale;
            kappa_ /= scale;
        }
    }
}

}  // namespace detail

class InteriorPointBackend final : public ConicBackend {
public:
    std::string_view name() const override { return "interior-point (HSDE, dense)"; }
    SolveResult solve(const ConicProgram& program, const SolveSettings& settings) const override {
        settings.validate();
        detail::InteriorPoint ip(program, settings);
        return ip.run();
    }
};

/// Solves with the reference interior-point backend.
inline SolveResult solve(const ConicProgram& program, const SolveSettings& settings = {}) {
    return InteriorPointBackend{}.solve(program, settings);
}

}  // namespace screw_grasp
