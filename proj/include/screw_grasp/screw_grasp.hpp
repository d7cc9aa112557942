#pragma once

#include "screw_grasp/errors.hpp"
#include "screw_grasp/screw_algebra.hpp"
#include "screw_grasp/contact_model.hpp"
#include "screw_grasp/conic_program.hpp"
#include "screw_grasp/conic_solver.hpp"
#include "screw_grasp/lp_oracle.hpp"
#include "screw_grasp/grasp_problem.hpp"
#include "screw_grasp/metric_engine.hpp"
#include "screw_grasp/scenarios.hpp"
