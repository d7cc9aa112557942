#pragma once

// Rigid-body screw algebra: wrench frame changes and the wrench <-> screw
// coordinate map (Poinsot decomposition).

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "screw_grasp/errors.hpp"

namespace screw_grasp {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline constexpr double kRotationTol = 1e-9;
inline constexpr double kUnitTol = 1e-9;
/// Relative threshold on |f| below which a wrench is classified as a pure moment.
inline constexpr double kPureMomentEps = 1e-9;

inline Mat3 skew(const Vec3& v) {
    Mat3 S;
    S << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
         -v.y(), v.x(), 0.0;
    return S;
}

/// Largest absolute entry of R^T R - I, or +inf when det R <= 0.
inline double rotation_error(const Mat3& R) {
    if (!R.allFinite()) return std::numeric_limits<double>::infinity();
    if (R.determinant() <= 0.0) return std::numeric_limits<double>::infinity();
    return (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
}

inline bool is_rotation(const Mat3& R, double tol = kRotationTol) {
    return rotation_error(R) <= tol && std::abs(R.determinant() - 1.0) <= 10.0 * tol;
}

inline void require_rotation(const Mat3& R, double tol = kRotationTol) {
    if (!is_rotation(R, tol)) {
        throw InvalidRotation("matrix is not a rotation (|R^T R - I| = " +
                              std::to_string(rotation_error(R)) + ")");
    }
}

/// Closest rotation in the Frobenius sense (polar factor of R).
inline Mat3 orthonormalize(const Mat3& R) {
    Eigen::JacobiSVD<Mat3> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 U = svd.matrixU();
    const Mat3 V = svd.matrixV();
    if ((U * V.transpose()).determinant() < 0.0) U.col(2) *= -1.0;
    return U * V.transpose();
}

inline Mat3 rotation_about(const Vec3& axis, double angle) {
    return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

struct Wrench {
    Vec3 force = Vec3::Zero();
    Vec3 moment = Vec3::Zero();
    std::string frame = "b";

    Wrench() = default;
    Wrench(Vec3 f, Vec3 m, std::string fr = "b")
        : force(std::move(f)), moment(std::move(m)), frame(std::move(fr)) {}

    static Wrench from_vector(const Vec6& v, std::string fr = "b") {
        return {v.head<3>(), v.tail<3>(), std::move(fr)};
    }

    Vec6 vector() const {
        Vec6 v;
        v << force, moment;
        return v;
    }

    bool is_finite() const { return force.allFinite() && moment.allFinite(); }

    Wrench operator+(const Wrench& o) const { return {force + o.force, moment + o.moment, frame}; }
    Wrench operator-(const Wrench& o) const { return {force - o.force, moment - o.moment, frame}; }
    Wrench operator*(double k) const { return {force * k, moment * k, frame}; }
    Wrench operator-() const { return {-force, -moment, frame}; }
};

inline Wrench operator*(double k, const Wrench& w) { return w * k; }

struct Twist {
    Vec3 linear = Vec3::Zero();
    Vec3 angular = Vec3::Zero();
};

/// Screw pitch: a finite real or the distinguished value Infinite.
/// Reading the numeric value of an infinite pitch is an error, never a NaN.
class Pitch {
public:
    static Pitch finite(double h) {
        if (!std::isfinite(h)) throw InvalidScrew("finite pitch must be a finite number");
        return Pitch(h, false);
    }
    static Pitch infinite() { return Pitch(0.0, true); }

    bool is_infinite() const noexcept { return infinite_; }
    double value() const {
        if (infinite_) throw InvalidScrew("infinite pitch has no numeric value");
        return h_;
    }

    friend bool operator==(const Pitch& a, const Pitch& b) {
        return a.infinite_ == b.infinite_ && (a.infinite_ || a.h_ == b.h_);
    }

private:
    Pitch(double h, bool inf) : h_(h), infinite_(inf) {}
    double h_;
    bool infinite_;
};

/// Task screw: unit direction `l`, axis point `q`, pitch. For infinite pitch `q` is ignored.
struct TaskScrew {
    Vec3 l = Vec3::UnitZ();
    Vec3 q = Vec3::Zero();
    Pitch pitch = Pitch::finite(0.0);

    void validate() const {
        if (!l.allFinite() || !q.allFinite()) throw InvalidScrew("screw axis has non-finite components");
        if (std::abs(l.norm() - 1.0) > kUnitTol) {
            throw InvalidScrew("screw direction must be a unit vector (|l| = " + std::to_string(l.norm()) + ")");
        }
    }
};

struct ScrewCoordinates {
    TaskScrew axis;
    double magnitude = 0.0;
};

/// [[R, 0], [p_x R, R]] : maps a wrench expressed in {c} into {b}, with (R, p) the pose of {c} in {b}.
inline Mat6 adjoint_matrix(const Mat3& R, const Vec3& p) {
    Mat6 G = Mat6::Zero();
    G.topLeftCorner<3, 3>() = R;
    G.bottomLeftCorner<3, 3>() = skew(p) * R;
    G.bottomRightCorner<3, 3>() = R;
    return G;
}

inline Wrench adjoint_transform(const Mat3& R, const Vec3& p, const Wrench& w, std::string target_frame = "b") {
    require_rotation(R);
    const Vec3 f = R * w.force;
    return {f, p.cross(f) + R * w.moment, std::move(target_frame)};
}

inline ScrewCoordinates wrench_to_screw(const Wrench& w) {
    if (!w.is_finite()) throw DegenerateWrench("wrench has non-finite components");
    const double nf = w.force.norm();
    const double nm = w.moment.norm();
    ScrewCoordinates sc;
    if (nf <= kPureMomentEps * std::max(1.0, nm)) {
        if (nm == 0.0) throw DegenerateWrench("zero wrench has no screw axis");
        sc.axis.l = w.moment / nm;
        sc.axis.q = Vec3::Zero();
        sc.axis.pitch = Pitch::infinite();
        sc.magnitude = nm;
        return sc;
    }
    const double nf2 = nf * nf;
    sc.axis.l = w.force / nf;
    sc.axis.q = w.force.cross(w.moment) / nf2;
    sc.axis.pitch = Pitch::finite(w.force.dot(w.moment) / nf2);
    sc.magnitude = nf;
    return sc;
}

/// Unit wrench along the screw: [l; q x l + h l] (unit force) or [0; l] (unit moment).
inline Wrench screw_to_unit_wrench(const TaskScrew& s) {
    s.validate();
    if (s.pitch.is_infinite()) return {Vec3::Zero(), s.l};
    return {s.l, s.q.cross(s.l) + s.pitch.value() * s.l};
}

/// Moves a screw axis through the rigid transform (R, p).
inline TaskScrew transform_screw(const Mat3& R, const Vec3& p, const TaskScrew& s) {
    TaskScrew out = s;
    out.l = R * s.l;
    if (s.pitch.is_infinite()) {
        out.q = Vec3::Zero();
    } else {
        const Vec3 q = R * s.q + p;
        out.q = q - q.dot(out.l) * out.l;  // closest axis point to the origin
    }
    return out;
}

}  // namespace screw_grasp
