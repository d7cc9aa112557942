#pragma once

// A complete grasp scenario (manipulator contacts, environment contacts,
// external loads, optional joint-torque limits, task screw) and its
// compilation into a ConicProgram:
//
//   maximize eta
//   s.t.  sum_i G_i f_i + f_ext = eta * dir * w_task
//         tau + J^T f_c = tau_g
//         friction cones, normal-force bounds, torque bounds

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "screw_grasp/conic_program.hpp"
#include "screw_grasp/conic_solver.hpp"
#include "screw_grasp/contact_model.hpp"
#include "screw_grasp/errors.hpp"
#include "screw_grasp/screw_algebra.hpp"

namespace screw_grasp {

/// Load [force; application_point x force + moment] acting on the object.
struct ExternalWrench {
    std::string label = "ext";
    Vec3 force = Vec3::Zero();
    Vec3 moment = Vec3::Zero();
    Vec3 application_point = Vec3::Zero();

    void validate(const std::string& where) const {
        if (!force.allFinite() || !moment.allFinite() || !application_point.allFinite()) {
            throw PhysicalInvariantError(where, "external wrench must be finite");
        }
    }
};

/// Joint-torque limits: tau = tau_g - J^T f_c with tau_min <= tau <= tau_max.
/// `jacobian` is 6n x l and maps joint velocities to contact twists expressed
/// in the contact frames; f_c stacks the local contact wrenches.
struct TorqueModel {
    Eigen::MatrixXd jacobian;
    Eigen::VectorXd tau_g;
    Eigen::VectorXd tau_min;
    Eigen::VectorXd tau_max;
    /// Joint count of each manipulator contact's chain. Optional; when given,
    /// the jacobian must be block diagonal with 6 x l_i blocks.
    std::vector<int> dofs_per_manipulator;

    int dofs() const { return static_cast<int>(jacobian.cols()); }

    void validate(int n_manipulator) const {
        const int l = dofs();
        if (jacobian.rows() != 6 * n_manipulator) {
            throw CompileError("torque model jacobian needs " + std::to_string(6 * n_manipulator) + " rows, has " +
                               std::to_string(jacobian.rows()));
        }
        if (tau_g.size() != l || tau_min.size() != l || tau_max.size() != l) {
            throw CompileError("torque model vectors must have one entry per joint");
        }
        if (!jacobian.allFinite() || !tau_g.allFinite()) throw PhysicalInvariantError("torque_model", "must be finite");
        for (int i = 0; i < l; ++i) {
            if (std::isnan(tau_min[i]) || std::isnan(tau_max[i])) throw PhysicalInvariantError("torque_model", "NaN torque limit");
            if (tau_min[i] > tau_max[i]) {
                throw PhysicalInvariantError("torque_model.tau_min[" + std::to_string(i) + "]", "exceeds tau_max");
            }
        }
        if (dofs_per_manipulator.empty()) return;
        if (static_cast<int>(dofs_per_manipulator.size()) != n_manipulator) {
            throw CompileError("dofs_per_manipulator needs one entry per manipulator contact");
        }
        int col = 0;
        for (int i = 0; i < n_manipulator; ++i) {
            const int li = dofs_per_manipulator[static_cast<std::size_t>(i)];
            if (li < 0) throw CompileError("negative joint count");
            Eigen::MatrixXd off = jacobian.middleRows(6 * i, 6);
            if (col + li > l) throw CompileError("dofs_per_manipulator exceeds jacobian columns");
            off.middleCols(col, li).setZero();
            if (off.cwiseAbs().maxCoeff() > 0.0) throw CompileError("jacobian is not block diagonal per manipulator");
            col += li;
        }
        if (col != l) throw CompileError("dofs_per_manipulator does not sum to the jacobian column count");
    }
};

enum class Direction { Positive, Negative };

inline double sign(Direction d) { return d == Direction::Positive ? 1.0 : -1.0; }
inline std::string_view to_string(Direction d) { return d == Direction::Positive ? "+" : "-"; }

struct GraspProblem {
    std::string name;
    std::string body_frame = "b";
    std::vector<ManipulatorContact> manipulator_contacts;
    std::vector<EnvironmentContact> environment_contacts;
    std::vector<ExternalWrench> external;
    std::optional<TorqueModel> torque_model;
    TaskScrew task;

    void validate() const {
        for (std::size_t i = 0; i < manipulator_contacts.size(); ++i) {
            manipulator_contacts[i].validate("manipulator_contacts[" + std::to_string(i) + "]");
        }
        for (std::size_t i = 0; i < environment_contacts.size(); ++i) {
            environment_contacts[i].validate("environment_contacts[" + std::to_string(i) + "]");
        }
        bool any_load = false;
        for (std::size_t i = 0; i < external.size(); ++i) {
            external[i].validate("external[" + std::to_string(i) + "]");
            any_load = any_load || external[i].force.norm() > 0.0 || external[i].moment.norm() > 0.0;
        }
        if (manipulator_contacts.empty() && environment_contacts.empty() && !any_load) {
            throw PhysicalInvariantError("contacts", "problem needs at least one contact or a nonzero external wrench");
        }
        if (torque_model) torque_model->validate(static_cast<int>(manipulator_contacts.size()));
        task.validate();
    }
};

struct ContactPose {
    Mat3 rotation = Mat3::Identity();
    Vec3 position = Vec3::Zero();
};

/// [G_1 ... G_k]: column block i maps local wrench i into the body frame.
inline Eigen::MatrixXd grasp_map(const std::vector<ContactPose>& poses) {
    Eigen::MatrixXd G(6, 6 * static_cast<Eigen::Index>(poses.size()));
    for (std::size_t i = 0; i < poses.size(); ++i) {
        require_rotation(poses[i].rotation);
        G.middleCols(6 * static_cast<Eigen::Index>(i), 6) = adjoint_matrix(poses[i].rotation, poses[i].position);
    }
    return G;
}

template <class Contact>
std::vector<ContactPose> poses_of(const std::vector<Contact>& contacts) {
    std::vector<ContactPose> out;
    out.reserve(contacts.size());
    for (const auto& c : contacts) out.push_back({c.rotation, c.position});
    return out;
}

inline Wrench external_wrench_in_b(const ExternalWrench& e) {
    return {e.force, e.application_point.cross(e.force) + e.moment};
}

/// Sum of all external loads in the body frame.
inline Wrench total_external_wrench(const GraspProblem& p) {
    Wrench w;
    for (const auto& e : p.external) w = w + external_wrench_in_b(e);
    return w;
}

namespace detail {

inline const std::array<const char*, 6> kComponentNames = {"f_t", "f_o", "f_n", "m_t", "m_o", "m_n"};

inline std::vector<int> manipulator_components(const ManipulatorContact& c) {
    if (c.cone.frictionless) return {2};
    return {0, 1, 2, 5};
}

inline std::vector<int> environment_components(const EnvironmentContact& c) {
    if (const auto* fs = std::get_if<FixedSupport>(&c.model)) {
        std::vector<int> comps;
        for (int k = 0; k < 6; ++k) {
            if (!fs->prescribed[static_cast<std::size_t>(k)]) comps.push_back(k);
        }
        return comps;
    }
    if (std::get<PcwfParams>(c.model).frictionless) return {2};
    return {0, 1, 2};
}

inline int position_of(const std::vector<int>& comps, int component) {
    for (std::size_t i = 0; i < comps.size(); ++i) {
        if (comps[i] == component) return static_cast<int>(i);
    }
    return -1;
}

}  // namespace detail

/// Builds the conic program for `p` with the task wrench oriented by `direction`.
inline ConicProgram compile(const GraspProblem& p, Direction direction = Direction::Positive) {
    p.validate();
    const int n_c = static_cast<int>(p.manipulator_contacts.size());
    const int n_e = static_cast<int>(p.environment_contacts.size());

    ConicProgram prog;
    VariableLayout& layout = prog.layout;
    int offset = 0;
    auto add_slice = [&](VariableRole role, std::string label, int contact, std::vector<int> comps, int length) {
        VariableSlice s;
        s.role = role;
        s.label = std::move(label);
        s.contact = contact;
        s.offset = offset;
        s.length = length;
        s.components = std::move(comps);
        offset += length;
        layout.slices.push_back(std::move(s));
        return static_cast<int>(layout.slices.size()) - 1;
    };

    std::vector<int> c_slice(static_cast<std::size_t>(n_c));
    for (int i = 0; i < n_c; ++i) {
        const auto& c = p.manipulator_contacts[static_cast<std::size_t>(i)];
        auto comps = detail::manipulator_components(c);
        const int len = static_cast<int>(comps.size());
        c_slice[static_cast<std::size_t>(i)] = add_slice(VariableRole::ManipulatorWrench, c.label, i, std::move(comps), len);
    }
    std::vector<int> e_slice(static_cast<std::size_t>(n_e));
    for (int j = 0; j < n_e; ++j) {
        const auto& e = p.environment_contacts[static_cast<std::size_t>(j)];
        auto comps = detail::environment_components(e);
        const int len = static_cast<int>(comps.size());
        e_slice[static_cast<std::size_t>(j)] = add_slice(VariableRole::EnvironmentWrench, e.label, j, std::move(comps), len);
    }
    int tau_slice = -1;
    if (p.torque_model) tau_slice = add_slice(VariableRole::JointTorque, "tau", -1, {}, p.torque_model->dofs());
    const int eta_slice = add_slice(VariableRole::Eta, "eta", -1, {}, 1);
    layout.total = offset;
    layout.eta_index = layout.slices[static_cast<std::size_t>(eta_slice)].offset;
    const int n = layout.total;

    prog.objective = Eigen::VectorXd::Zero(n);
    prog.objective[layout.eta_index] = 1.0;
    prog.lower = Eigen::VectorXd::Constant(n, -kInf);
    prog.upper = Eigen::VectorXd::Constant(n, kInf);

    const int n_tau = p.torque_model ? p.torque_model->dofs() : 0;
    prog.eq_matrix = Eigen::MatrixXd::Zero(6 + n_tau, n);
    prog.eq_rhs = Eigen::VectorXd::Zero(6 + n_tau);
    for (const char* name : {"fx", "fy", "fz", "mx", "my", "mz"}) prog.eq_labels.push_back(std::string("balance.") + name);
    for (int k = 0; k < n_tau; ++k) prog.eq_labels.push_back("torque[" + std::to_string(k) + "]");

    // Wrench balance.
    const Wrench f_ext = total_external_wrench(p);
    prog.eq_rhs.head<6>() = -f_ext.vector();
    prog.eq_matrix.block(0, layout.eta_index, 6, 1) = -sign(direction) * screw_to_unit_wrench(p.task).vector();

    auto cone_for = [&](const std::string& label, const VariableSlice& sl, int slice_index, ContactConeKind kind, double mu,
                        double e_t, double e_o, double e_n) {
        const bool sfce = kind == ContactConeKind::Sfce;
        SocBlock k;
        k.label = label + ".cone";
        k.A = Eigen::MatrixXd::Zero(sfce ? 3 : 2, n);
        k.b = Eigen::VectorXd::Zero(k.A.rows());
        k.c = Eigen::VectorXd::Zero(n);
        k.A(0, sl.offset + detail::position_of(sl.components, 0)) = 1.0 / e_t;
        k.A(1, sl.offset + detail::position_of(sl.components, 1)) = 1.0 / e_o;
        if (sfce) k.A(2, sl.offset + detail::position_of(sl.components, 5)) = 1.0 / e_n;
        k.c[sl.offset + detail::position_of(sl.components, 2)] = mu;
        k.contact = ContactConeTag{kind, slice_index, mu, e_t, e_o, sfce ? e_n : 1.0};
        prog.cones.push_back(std::move(k));
    };

    for (int i = 0; i < n_c; ++i) {
        const auto& c = p.manipulator_contacts[static_cast<std::size_t>(i)];
        const int si = c_slice[static_cast<std::size_t>(i)];
        const auto& sl = layout.slices[static_cast<std::size_t>(si)];
        const Mat6 G = adjoint_matrix(c.rotation, c.position);
        for (int k = 0; k < sl.length; ++k) prog.eq_matrix.block(0, sl.offset + k, 6, 1) = G.col(sl.components[static_cast<std::size_t>(k)]);
        const int fn = sl.offset + detail::position_of(sl.components, 2);
        prog.lower[fn] = 0.0;
        prog.upper[fn] = c.f_n_max;
        if (!c.cone.frictionless) cone_for(c.label, sl, si, ContactConeKind::Sfce, c.cone.mu, c.cone.e_t, c.cone.e_o, c.cone.e_n);
    }

    for (int j = 0; j < n_e; ++j) {
        const auto& e = p.environment_contacts[static_cast<std::size_t>(j)];
        const int si = e_slice[static_cast<std::size_t>(j)];
        const auto& sl = layout.slices[static_cast<std::size_t>(si)];
        const Mat6 G = adjoint_matrix(e.rotation, e.position);
        for (int k = 0; k < sl.length; ++k) prog.eq_matrix.block(0, sl.offset + k, 6, 1) = G.col(sl.components[static_cast<std::size_t>(k)]);
        const int fn_pos = detail::position_of(sl.components, 2);
        if (const auto* fs = std::get_if<FixedSupport>(&e.model)) {
            for (int k = 0; k < 6; ++k) {
                if (const auto& v = fs->prescribed[static_cast<std::size_t>(k)]) prog.eq_rhs.head<6>() -= G.col(k) * *v;
            }
            if (fn_pos >= 0) {
                if (e.f_n_min) prog.lower[sl.offset + fn_pos] = *e.f_n_min;
                if (e.f_n_max) prog.upper[sl.offset + fn_pos] = *e.f_n_max;
            }
        } else {
            const auto& pc = std::get<PcwfParams>(e.model);
            const int fn = sl.offset + fn_pos;
            prog.lower[fn] = std::max(0.0, e.f_n_min.value_or(0.0));
            if (e.f_n_max) prog.upper[fn] = *e.f_n_max;
            if (!pc.frictionless) cone_for(e.label, sl, si, ContactConeKind::Pcwf, pc.mu, pc.e_t, pc.e_o, 1.0);
        }
    }

    if (p.torque_model) {
        const auto& tm = *p.torque_model;
        const auto& ts = layout.slices[static_cast<std::size_t>(tau_slice)];
        prog.eq_matrix.block(6, ts.offset, n_tau, n_tau) = Eigen::MatrixXd::Identity(n_tau, n_tau);
        prog.eq_rhs.tail(n_tau) = tm.tau_g;
        for (int i = 0; i < n_c; ++i) {
            const auto& sl = layout.slices[static_cast<std::size_t>(c_slice[static_cast<std::size_t>(i)])];
            for (int k = 0; k < sl.length; ++k) {
                const int row = 6 * i + sl.components[static_cast<std::size_t>(k)];
                prog.eq_matrix.block(6, sl.offset + k, n_tau, 1) = tm.jacobian.row(row).transpose();
            }
        }
        prog.lower.segment(ts.offset, n_tau) = tm.tau_min;
        prog.upper.segment(ts.offset, n_tau) = tm.tau_max;
    }

    prog.validate();
    return prog;
}

/// Local contact wrench of a slice, with eliminated components filled in
/// (zero, or the prescribed value for fixed supports).
inline LocalContactWrench local_wrench(const GraspProblem& p, const VariableSlice& sl, const Eigen::VectorXd& x) {
    Vec6 v = Vec6::Zero();
    if (sl.role == VariableRole::EnvironmentWrench) {
        if (const auto* fs = std::get_if<FixedSupport>(&p.environment_contacts[static_cast<std::size_t>(sl.contact)].model)) {
            for (int k = 0; k < 6; ++k) {
                if (const auto& val = fs->prescribed[static_cast<std::size_t>(k)]) v[k] = *val;
            }
        }
    }
    for (int k = 0; k < sl.length; ++k) v[sl.components[static_cast<std::size_t>(k)]] = x[sl.offset + k];
    return LocalContactWrench::from_vector(v);
}

/// Applies the rigid re-framing (R, t) to every pose, load and the task screw.
/// Contact-local data (cone parameters, prescribed components, jacobian) is
/// unaffected, so the metric is unchanged.
inline GraspProblem transform_problem(const GraspProblem& p, const Mat3& R, const Vec3& t) {
    require_rotation(R);
    GraspProblem out = p;
    for (auto& c : out.manipulator_contacts) {
        c.rotation = R * c.rotation;
        c.position = R * c.position + t;
    }
    for (auto& c : out.environment_contacts) {
        c.rotation = R * c.rotation;
        c.position = R * c.position + t;
    }
    for (auto& e : out.external) {
        e.force = R * e.force;
        e.moment = R * e.moment;
        e.application_point = R * e.application_point + t;
    }
    out.task = transform_screw(R, t, p.task);
    return out;
}

struct GwsSample {
    TaskScrew direction;
    SolveStatus status = SolveStatus::NumericalFailure;
    std::optional<double> eta;
    std::string error;
};

/// Support value of the grasp wrench space along each direction screw.
/// Failed rays are tagged, never thrown.
inline std::vector<GwsSample> gws_sample(const GraspProblem& p, const std::vector<TaskScrew>& directions,
                                         const SolveSettings& settings = {}) {
    std::vector<GwsSample> out;
    out.reserve(directions.size());
    for (const auto& d : directions) {
        GwsSample s;
        s.direction = d;
        try {
            GraspProblem q = p;
            q.task = d;
            const SolveResult r = solve(compile(q, Direction::Positive), settings);
            s.status = r.status;
            if (r.status == SolveStatus::Optimal) s.eta = r.objective;
        } catch (const Error& e) {
            s.error = e.what();
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace screw_grasp
