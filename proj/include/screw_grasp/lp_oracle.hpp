#pragma once

// Independent validation path: every contact friction cone is replaced by the
// cone over a finite set of rays (inscribed polyhedral approximation) and the
// resulting linear program is solved with a dense two-phase simplex method.
// Shares no numerical code with the interior-point solver.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "screw_grasp/conic_program.hpp"
#include "screw_grasp/conic_solver.hpp"
#include "screw_grasp/contact_model.hpp"
#include "screw_grasp/errors.hpp"

namespace screw_grasp {
namespace lp {

/// maximize c^T x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  lower <= x <= upper.
struct LinearProgram {
    Eigen::VectorXd c;
    Eigen::MatrixXd A_eq;
    Eigen::VectorXd b_eq;
    Eigen::MatrixXd A_ub;
    Eigen::VectorXd b_ub;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpResult {
    LpStatus status = LpStatus::IterationLimit;
    double objective = std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXd x;
    int pivots = 0;
};

namespace detail {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-10;

// Tableau for: minimize d^T u, T u = rhs, u >= 0. Row `m` holds reduced costs,
// last column holds the right-hand side (and minus the objective in row m).
class Tableau {
public:
    Tableau(Eigen::MatrixXd T, std::vector<int> basis) : T_(std::move(T)), basis_(std::move(basis)) {}

    int rows() const { return static_cast<int>(T_.rows()) - 1; }
    int cols() const { return static_cast<int>(T_.cols()) - 1; }
    Eigen::MatrixXd& data() { return T_; }
    std::vector<int>& basis() { return basis_; }

    void pivot(int r, int e) {
        const double p = T_(r, e);
        T_.row(r) /= p;
        for (int i = 0; i <= rows(); ++i) {
            if (i == r) continue;
            const double f = T_(i, e);
            if (f != 0.0) T_.row(i) -= f * T_.row(r);
        }
        T_(r, e) = 1.0;
        basis_[static_cast<std::size_t>(r)] = e;
    }

    /// Prices out the basic columns of `cost` into the objective row.
    void set_cost(const Eigen::VectorXd& cost) {
        T_.row(rows()).setZero();
        T_.row(rows()).head(cols()) = cost.transpose();
        for (int i = 0; i < rows(); ++i) {
            const double cb = cost[basis_[static_cast<std::size_t>(i)]];
            if (cb != 0.0) T_.row(rows()) -= cb * T_.row(i);
        }
    }

    /// Runs the simplex method over columns with allowed[j]. Returns false on
    /// unboundedness.
    bool optimize(const std::vector<bool>& allowed, int& pivots, int max_pivots) {
        int degenerate_streak = 0;
        const Eigen::Index m = T_.rows() - 1;
        const Eigen::Index n = T_.cols() - 1;
        while (pivots < max_pivots) {
            const bool bland = degenerate_streak > 25;
            Eigen::Index e = -1;
            double best = -kCostTol;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (!allowed[static_cast<std::size_t>(j)]) continue;
                const double d = T_(m, j);
                if (d < best) {
                    e = j;
                    if (bland) break;
                    best = d;
                }
            }
            if (e < 0) return true;

            Eigen::Index r = -1;
            double ratio = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < m; ++i) {
                const double a = T_(i, e);
                if (a <= kPivotTol) continue;
                const double q = std::max(T_(i, n), 0.0) / a;
                if (q < ratio - 1e-12 ||
                    (q <= ratio + 1e-12 && r >= 0 && basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(r)])) {
                    ratio = std::min(ratio, q);
                    r = i;
                }
            }
            if (r < 0) return false;
            degenerate_streak = ratio <= 1e-12 ? degenerate_streak + 1 : 0;
            pivot(static_cast<int>(r), static_cast<int>(e));
            ++pivots;
        }
        return true;
    }

    void drop_row(int r) {
        const int total = static_cast<int>(T_.rows());
        Eigen::MatrixXd T(total - 1, T_.cols());
        T << T_.topRows(r), T_.bottomRows(total - r - 1);
        T_ = std::move(T);
        basis_.erase(basis_.begin() + r);
    }

private:
    Eigen::MatrixXd T_;
    std::vector<int> basis_;
};

}  // namespace detail

/// Dense two-phase primal simplex (Dantzig pricing, Bland's rule after a run
/// of degenerate pivots).
inline LpResult solve(const LinearProgram& lp, int max_pivots = 50000) {
    const int n = static_cast<int>(lp.c.size());
    const int me = static_cast<int>(lp.A_eq.rows());
    const int mu = static_cast<int>(lp.A_ub.rows());
    if (lp.lower.size() != n || lp.upper.size() != n) throw InvalidArgument("lp: bound vectors have wrong length");
    if ((me > 0 && lp.A_eq.cols() != n) || (mu > 0 && lp.A_ub.cols() != n)) {
        throw InvalidArgument("lp: constraint matrix has wrong column count");
    }

    // Substitute x_j = lower_j + u, x_j = upper_j - u, or x_j = u+ - u-.
    enum class Kind { Shift, Flip, Split };
    std::vector<Kind> kind(static_cast<std::size_t>(n));
    std::vector<int> col(static_cast<std::size_t>(n));
    Eigen::VectorXd offset = Eigen::VectorXd::Zero(n);
    int nu = 0;
    for (int j = 0; j < n; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        col[sj] = nu;
        if (std::isfinite(lp.lower[j])) {
            kind[sj] = Kind::Shift;
            offset[j] = lp.lower[j];
            nu += 1;
        } else if (std::isfinite(lp.upper[j])) {
            kind[sj] = Kind::Flip;
            offset[j] = lp.upper[j];
            nu += 1;
        } else {
            kind[sj] = Kind::Split;
            nu += 2;
        }
    }
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, nu);  // x = offset + S u
    for (int j = 0; j < n; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        switch (kind[sj]) {
            case Kind::Shift: S(j, col[sj]) = 1.0; break;
            case Kind::Flip: S(j, col[sj]) = -1.0; break;
            case Kind::Split:
                S(j, col[sj]) = 1.0;
                S(j, col[sj] + 1) = -1.0;
                break;
        }
    }

    // Rows: equalities, inequalities, finite upper bounds of shifted variables.
    std::vector<int> ub_vars;
    for (int j = 0; j < n; ++j) {
        if (kind[static_cast<std::size_t>(j)] == Kind::Shift && std::isfinite(lp.upper[j])) ub_vars.push_back(j);
    }
    const int n_ineq = mu + static_cast<int>(ub_vars.size());
    const int m = me + n_ineq;
    const int n_struct = nu + n_ineq;  // structural + slack columns
    const int n_total = n_struct + m;  // + artificials

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m + 1, n_total + 1);
    if (me > 0) {
        T.block(0, 0, me, nu) = lp.A_eq * S;
        T.block(0, n_total, me, 1) = lp.b_eq - lp.A_eq * offset;
    }
    if (mu > 0) {
        T.block(me, 0, mu, nu) = lp.A_ub * S;
        T.block(me, n_total, mu, 1) = lp.b_ub - lp.A_ub * offset;
    }
    for (std::size_t k = 0; k < ub_vars.size(); ++k) {
        const int j = ub_vars[k];
        const int r = me + mu + static_cast<int>(k);
        T(r, col[static_cast<std::size_t>(j)]) = 1.0;
        T(r, n_total) = lp.upper[j] - lp.lower[j];
    }
    for (int k = 0; k < n_ineq; ++k) T(me + k, nu + k) = 1.0;
    std::vector<int> basis(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        if (T(i, n_total) < 0.0) T.row(i) *= -1.0;
        T(i, n_struct + i) = 1.0;
        basis[static_cast<std::size_t>(i)] = n_struct + i;
    }

    LpResult res;
    detail::Tableau tab(std::move(T), std::move(basis));

    // Phase 1.
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n_total);
    phase1.tail(m).setOnes();
    tab.set_cost(phase1);
    std::vector<bool> allowed(static_cast<std::size_t>(n_total), true);
    tab.optimize(allowed, res.pivots, max_pivots);
    if (res.pivots >= max_pivots) return res;

    auto rhs_scale = [&]() {
        double s = 1.0;
        if (me > 0) s = std::max(s, lp.b_eq.cwiseAbs().maxCoeff());
        if (mu > 0) s = std::max(s, lp.b_ub.cwiseAbs().maxCoeff());
        return s;
    }();
    const double infeas = -tab.data()(tab.rows(), tab.cols());
    if (infeas > 1e-9 * rhs_scale) {
        res.status = LpStatus::Infeasible;
        return res;
    }

    // Drive artificials out of the basis; rows where that is impossible are redundant.
    for (int i = tab.rows() - 1; i >= 0; --i) {
        if (tab.basis()[static_cast<std::size_t>(i)] < n_struct) continue;
        int e = -1;
        double best = detail::kPivotTol;
        for (int j = 0; j < n_struct; ++j) {
            if (std::abs(tab.data()(i, j)) > best) {
                best = std::abs(tab.data()(i, j));
                e = j;
            }
        }
        if (e >= 0) {
            tab.pivot(i, e);
            ++res.pivots;
        } else {
            tab.drop_row(i);
        }
    }

    // Phase 2 (minimize -c).
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(n_total);
    cost.head(nu) = -(S.transpose() * lp.c);
    tab.set_cost(cost);
    for (int j = n_struct; j < n_total; ++j) allowed[static_cast<std::size_t>(j)] = false;
    const bool bounded = tab.optimize(allowed, res.pivots, max_pivots);
    if (!bounded) {
        res.status = LpStatus::Unbounded;
        return res;
    }
    if (res.pivots >= max_pivots) return res;

    Eigen::VectorXd u = Eigen::VectorXd::Zero(n_total);
    for (int i = 0; i < tab.rows(); ++i) u[tab.basis()[static_cast<std::size_t>(i)]] = tab.data()(i, tab.cols());
    res.x = offset + S * u.head(nu);
    res.objective = lp.c.dot(res.x);
    res.status = LpStatus::Optimal;
    return res;
}

}  // namespace lp

/// Ray generators (one per column) of the polyhedral inner approximation of a
/// contact cone, expressed in the slice's variable order.
inline Eigen::MatrixXd contact_cone_rays(const ContactConeTag& tag, const VariableSlice& slice, int facets) {
    std::vector<LocalContactWrench> rays;
    if (tag.kind == ContactConeKind::Sfce) {
        rays = discretize_sfce(SfceParams{tag.mu, tag.e_t, tag.e_o, tag.e_n, false}, 1.0, facets);
    } else {
        rays = discretize_pcwf(PcwfParams{tag.mu, tag.e_t, tag.e_o, false}, 1.0, facets);
    }
    Eigen::MatrixXd R(slice.length, static_cast<Eigen::Index>(rays.size()));
    for (std::size_t k = 0; k < rays.size(); ++k) {
        const Vec6 v = rays[k].vector();
        for (int i = 0; i < slice.length; ++i) R(i, static_cast<Eigen::Index>(k)) = v[slice.components[static_cast<std::size_t>(i)]];
    }
    return R;
}

/// Solves `program` with every contact cone replaced by its inscribed
/// polyhedral approximation at `facets`. The result is a lower bound on the
/// conic optimum. Throws UnsupportedProgram for cones that are not contact
/// friction cones.
inline SolveResult solve_with_oracle(const ConicProgram& program, int facets) {
    if (facets < 4) throw InvalidArgument("oracle facets must be >= 4");
    program.validate();
    const int n = program.num_vars();

    // x = M v, where v holds the untouched variables and the ray weights.
    std::vector<int> owner(static_cast<std::size_t>(n), -1);  // cone index per coned variable
    std::vector<Eigen::MatrixXd> rays(program.cones.size());
    for (std::size_t k = 0; k < program.cones.size(); ++k) {
        const auto& cone = program.cones[k];
        if (!cone.contact) throw UnsupportedProgram("cone '" + cone.label + "' is not a contact friction cone");
        const auto& tag = *cone.contact;
        if (tag.slice < 0 || tag.slice >= static_cast<int>(program.layout.slices.size())) {
            throw UnsupportedProgram("cone '" + cone.label + "' refers to an unknown slice");
        }
        const auto& sl = program.layout.slices[static_cast<std::size_t>(tag.slice)];
        for (int i = sl.offset; i < sl.offset + sl.length; ++i) {
            if (owner[static_cast<std::size_t>(i)] != -1) throw UnsupportedProgram("variable in two contact cones");
            owner[static_cast<std::size_t>(i)] = static_cast<int>(k);
        }
        rays[k] = contact_cone_rays(tag, sl, facets);
    }

    int nv = 0;
    for (int j = 0; j < n; ++j) nv += owner[static_cast<std::size_t>(j)] == -1 ? 1 : 0;
    std::vector<int> ray_offset(program.cones.size());
    for (std::size_t k = 0; k < rays.size(); ++k) {
        ray_offset[k] = nv;
        nv += static_cast<int>(rays[k].cols());
    }

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, nv);
    lp::LinearProgram lp;
    lp.lower = Eigen::VectorXd::Zero(nv);
    lp.upper = Eigen::VectorXd::Constant(nv, kInf);
    {
        int v = 0;
        for (int j = 0; j < n; ++j) {
            if (owner[static_cast<std::size_t>(j)] != -1) continue;
            M(j, v) = 1.0;
            lp.lower[v] = program.lower[j];
            lp.upper[v] = program.upper[j];
            ++v;
        }
    }
    for (std::size_t k = 0; k < rays.size(); ++k) {
        const auto& sl = program.layout.slices[static_cast<std::size_t>(program.cones[k].contact->slice)];
        M.block(sl.offset, ray_offset[k], sl.length, rays[k].cols()) = rays[k];
    }

    lp.c = M.transpose() * program.objective;
    lp.A_eq = program.num_eq() > 0 ? Eigen::MatrixXd(program.eq_matrix * M) : Eigen::MatrixXd(0, nv);
    lp.b_eq = program.eq_rhs;

    // Bounds on coned variables become rows on the ray weights.
    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> rhs;
    for (int j = 0; j < n; ++j) {
        if (owner[static_cast<std::size_t>(j)] == -1) continue;
        const Eigen::RowVectorXd r = M.row(j);
        if (std::isfinite(program.upper[j])) {
            rows.push_back(r);
            rhs.push_back(program.upper[j]);
        }
        const bool implied = program.lower[j] <= 0.0 && r.minCoeff() >= 0.0;
        if (std::isfinite(program.lower[j]) && !implied) {
            rows.push_back(-r);
            rhs.push_back(-program.lower[j]);
        }
    }
    lp.A_ub.resize(static_cast<Eigen::Index>(rows.size()), nv);
    lp.b_ub.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        lp.A_ub.row(static_cast<Eigen::Index>(i)) = rows[i];
        lp.b_ub[static_cast<Eigen::Index>(i)] = rhs[i];
    }

    const lp::LpResult r = lp::solve(lp);
    SolveResult out;
    out.iterations = r.pivots;
    switch (r.status) {
        case lp::LpStatus::Optimal: out.status = SolveStatus::Optimal; break;
        case lp::LpStatus::Infeasible: out.status = SolveStatus::Infeasible; break;
        case lp::LpStatus::Unbounded: out.status = SolveStatus::Unbounded; break;
        case lp::LpStatus::IterationLimit: out.status = SolveStatus::IterationLimit; break;
    }
    if (r.status == lp::LpStatus::Optimal) {
        out.primal = M * r.x;
        out.objective = program.objective.dot(out.primal);
        out.residuals = evaluate_residuals(program, out.primal);
    } else {
        out.primal = Eigen::VectorXd::Zero(n);
        out.message = "lp oracle: " + std::string(to_string(out.status));
    }
    return out;
}

}  // namespace screw_grasp
