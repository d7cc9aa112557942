#pragma once

// Problem manipulations shared by the property tests and the acceptance run.

#include <string>

#include "generators.hpp"
#include "screw_grasp/grasp_problem.hpp"

namespace sg_test {

using namespace screw_grasp;

/// Scales every force/torque bound and every load by k. The optimal eta
/// must scale by k as well.
inline GraspProblem scaled(const GraspProblem& p, double k) {
    GraspProblem q = p;
    for (auto& c : q.manipulator_contacts) c.f_n_max *= k;
    for (auto& e : q.environment_contacts) {
        if (e.f_n_min) *e.f_n_min *= k;
        if (e.f_n_max) *e.f_n_max *= k;
        if (auto* fs = std::get_if<FixedSupport>(&e.model)) {
            for (auto& v : fs->prescribed) {
                if (v) *v *= k;
            }
        }
    }
    for (auto& w : q.external) {
        w.force *= k;
        w.moment *= k;
    }
    if (q.torque_model) {
        q.torque_model->tau_g *= k;
        q.torque_model->tau_min *= k;
        q.torque_model->tau_max *= k;
    }
    return q;
}

inline TaskScrew random_screw(Gen& g) {
    TaskScrew s;
    s.l = g.unit3();
    s.q = g.vec3(0.2);
    const int kind = g.integer(0, 2);
    if (kind == 0) s.pitch = Pitch::infinite();
    else s.pitch = Pitch::finite(kind == 1 ? 0.0 : g.uniform(-0.1, 0.1));
    return s;
}

/// A random bounded grasp built around an antipodal pinch: two soft fingers
/// pressing on opposite sides of the object, up to two extra contacts, an
/// optional small load, all placed under a random rigid motion.
inline GraspProblem random_problem(Gen& g) {
    GraspProblem p;
    p.name = "random";
    const Mat3 R0 = g.rotation();
    const Vec3 p0 = g.vec3(0.3);
    const double half = g.uniform(0.02, 0.1);
    auto finger = [&](const std::string& label, const Mat3& R, const Vec3& pos) {
        ManipulatorContact c;
        c.label = label;
        c.rotation = R0 * R;
        c.position = p0 + R0 * pos;
        c.cone.mu = g.uniform(0.2, 0.8);
        c.cone.e_t = g.uniform(0.5, 1.5);
        c.cone.e_o = g.uniform(0.5, 1.5);
        c.cone.e_n = g.uniform(0.01, 0.08);
        c.f_n_max = g.uniform(5.0, 30.0);
        return c;
    };
    // Contact normals (local z) point into the object.
    const Mat3 flip = Eigen::AngleAxisd(M_PI, Vec3::UnitX()).toRotationMatrix();
    p.manipulator_contacts.push_back(finger("c1", Mat3::Identity(), Vec3(0, 0, -half)));
    p.manipulator_contacts.push_back(finger("c2", flip, Vec3(0, 0, half)));
    if (g.integer(0, 1) == 1) {
        const Mat3 side = Eigen::AngleAxisd(M_PI / 2, Vec3::UnitY()).toRotationMatrix();
        p.manipulator_contacts.push_back(finger("c3", side, Vec3(-half, 0, 0)));
    }
    if (g.integer(0, 1) == 1) {
        EnvironmentContact e;
        e.label = "e1";
        e.rotation = R0 * Eigen::AngleAxisd(-M_PI / 2, Vec3::UnitY()).toRotationMatrix();
        e.position = p0 + R0 * Vec3(half, 0, 0);
        PcwfParams m;
        m.mu = g.uniform(0.1, 0.8);
        e.model = m;
        e.f_n_max = g.uniform(5.0, 50.0);
        p.environment_contacts.push_back(e);
    }
    if (g.integer(0, 1) == 1) {
        ExternalWrench w;
        w.label = "gravity";
        w.force = g.vec3(1.0);
        w.application_point = p0 + R0 * g.vec3(0.01);
        p.external.push_back(w);
    }
    p.task = random_screw(g);
    p.task.q = p0 + R0 * p.task.q * 0.2;
    return p;
}

/// One soft finger pushing up on the object against a load it cannot hold.
inline GraspProblem unreachable_load() {
    GraspProblem p;
    ManipulatorContact c;
    c.label = "c1";
    c.f_n_max = 1.0;
    p.manipulator_contacts = {c};
    ExternalWrench w;
    w.label = "load";
    w.force = Vec3(0, 0, -50.0);
    p.external = {w};
    p.task.l = Vec3(1, 0, 0);
    return p;
}

/// A support with unbounded normal force directly along the task.
inline GraspProblem uncapped_support() {
    GraspProblem p;
    ManipulatorContact c;
    c.label = "c1";
    c.f_n_max = 1.0;
    p.manipulator_contacts = {c};
    EnvironmentContact e;
    e.label = "floor";
    e.model = PcwfParams{};
    p.environment_contacts = {e};
    p.task.l = Vec3(0, 0, 1);
    return p;
}

}  // namespace sg_test
