#pragma once

// Standard-form second-order cone program:
//
//   maximize    objective^T x
//   subject to  eq_matrix x = eq_rhs
//               || A_i x + b_i || <= c_i^T x + d_i     for every SocBlock i
//               lower <= x <= upper                    (entries may be +-inf)

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "screw_grasp/errors.hpp"

namespace screw_grasp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VariableRole { ManipulatorWrench, EnvironmentWrench, JointTorque, Eta };

/// Contiguous run of variables belonging to one physical quantity.
struct VariableSlice {
    VariableRole role = VariableRole::Eta;
    std::string label;
    int contact = -1;  // contact index within its list, -1 when not a contact
    int offset = 0;
    int length = 0;
    /// For contact slices: local wrench component (0..5) held by each variable.
    /// Components absent here were eliminated (pinned to zero or prescribed).
    std::vector<int> components;
};

struct VariableLayout {
    std::vector<VariableSlice> slices;
    int eta_index = -1;
    int total = 0;

    /// Slices must be disjoint and cover [0, total).
    void validate() const {
        std::vector<int> owner(static_cast<std::size_t>(total), -1);
        for (std::size_t s = 0; s < slices.size(); ++s) {
            const auto& sl = slices[s];
            if (sl.offset < 0 || sl.length < 0 || sl.offset + sl.length > total) {
                throw CompileError("layout slice '" + sl.label + "' out of range");
            }
            if (!sl.components.empty() && static_cast<int>(sl.components.size()) != sl.length) {
                throw CompileError("layout slice '" + sl.label + "' component map has wrong length");
            }
            for (int i = sl.offset; i < sl.offset + sl.length; ++i) {
                if (owner[static_cast<std::size_t>(i)] != -1) throw CompileError("layout slices overlap at variable " + std::to_string(i));
                owner[static_cast<std::size_t>(i)] = static_cast<int>(s);
            }
        }
        for (int i = 0; i < total; ++i) {
            if (owner[static_cast<std::size_t>(i)] == -1) throw CompileError("variable " + std::to_string(i) + " not covered by layout");
        }
        if (eta_index < 0 || eta_index >= total) throw CompileError("layout has no eta variable");
    }

    const VariableSlice* find(VariableRole role, int contact) const {
        for (const auto& s : slices) {
            if (s.role == role && s.contact == contact) return &s;
        }
        return nullptr;
    }
};

enum class ContactConeKind { Sfce, Pcwf };

/// Identifies a cone block as the friction cone of one contact slice. The
/// slice variables are the non-eliminated local components, in the order
/// (f_t, f_o, f_n, m_n) for SFCE and (f_t, f_o, f_n) for PCWF.
struct ContactConeTag {
    ContactConeKind kind = ContactConeKind::Sfce;
    int slice = -1;
    double mu = 0.0;
    double e_t = 1.0;
    double e_o = 1.0;
    double e_n = 1.0;  // unused for PCWF
};

struct SocBlock {
    std::string label;
    Eigen::MatrixXd A;  // k x n
    Eigen::VectorXd b;  // k
    Eigen::VectorXd c;  // n
    double d = 0.0;
    std::optional<ContactConeTag> contact;
};

struct ConicProgram {
    Eigen::VectorXd objective;
    Eigen::MatrixXd eq_matrix;
    Eigen::VectorXd eq_rhs;
    std::vector<std::string> eq_labels;
    std::vector<SocBlock> cones;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    VariableLayout layout;

    int num_vars() const { return static_cast<int>(objective.size()); }
    int num_eq() const { return static_cast<int>(eq_matrix.rows()); }

    /// Dimension checks only; numeric content is checked by the solver.
    void validate() const {
        const auto n = objective.size();
        if (eq_matrix.cols() != n && eq_matrix.rows() > 0) throw CompileError("equality matrix has wrong column count");
        if (eq_rhs.size() != eq_matrix.rows()) throw CompileError("equality rhs has wrong length");
        if (lower.size() != n || upper.size() != n) throw CompileError("bound vectors have wrong length");
        for (const auto& k : cones) {
            if (k.A.cols() != n || k.c.size() != n) throw CompileError("cone '" + k.label + "' has wrong column count");
            if (k.b.size() != k.A.rows()) throw CompileError("cone '" + k.label + "' offset has wrong length");
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            if (lower[i] > upper[i]) throw CompileError("variable " + std::to_string(i) + " has lower > upper");
        }
        if (layout.total != n) throw CompileError("layout does not match variable count");
        layout.validate();
    }
};

}  // namespace screw_grasp
