#pragma once

#include "yankflow/elasticity.hpp"
#include "yankflow/kernel.hpp"
#include "yankflow/mesh.hpp"
#include "yankflow/varifold.hpp"
#include "yankflow/yank.hpp"

#include <variant>
#include <vector>

namespace yankflow::dynamics {

struct SolverConfig {
  double omega = 0.1;      // RKHS regularization weight
  int steps = 10;          // forward Euler steps
  double final_time = 1.0;

  void validate() const;
  double dt() const { return final_time / steps; }
};

/// A registered layer of the template and the observed surface it is matched to.
struct LayerTarget {
  int layer = 0;
  varifold::BoundarySurface surface;
};

/// Everything except the control: template, material, kernel, time grid and
/// matching targets.
struct Problem {
  mesh::LayeredMesh mesh;
  elasticity::ElasticParams elastic;
  kernel::KernelConfig kernel;
  SolverConfig solver;
  varifold::VarifoldConfig varifold;
  std::vector<LayerTarget> targets;

  void validate() const;
};

using Control = std::variant<yank::PotentialParams, yank::FreeYank>;

/// Yank covector j at configuration q for one time interval.
Field assemble_yank(const Problem& problem, const Field& q, const Control& control, int interval);

struct StepResult {
  Field yank;
  Field velocity;
  kernel::VelocityOperator op;
};

/// Velocity v = (omega K_q^{-1} + A_q)^{-1} j_q for one interval.
StepResult step_velocity(const Problem& problem, const Field& q, const Control& control, int interval);

struct Trajectory {
  std::vector<Field> states;      // q_0 .. q_N
  std::vector<Field> velocities;  // v_0 .. v_{N-1}
  std::vector<Field> yanks;       // j_0 .. j_{N-1}
  std::vector<kernel::VelocityOperator> operators;  // factorizations reused by the adjoint
};

/// Explicit Euler flow from the template. Throws FlowBreakdown naming the
/// step at which a simplex inverts or flattens.
Trajectory forward_flow(const Problem& problem, const Control& control, bool keep_operators = true);

struct Costate {
  std::vector<Field> p;  // p_0 .. p_N, p_N = -grad of the final discrepancy
};

/// Discrete adjoint of the Euler recursion (including the running cost for
/// free yanks). Requires a trajectory produced with keep_operators = true.
Costate backward_costate(const Problem& problem, const Trajectory& traj, const Control& control,
                         const Field& grad_rho);

/// Sum of layer discrepancies at configuration q.
double total_discrepancy(const Problem& problem, const Field& q);
Field total_discrepancy_gradient(const Problem& problem, const Field& q);

/// Running cost sum_k dt (j_k | v_k); zero for parametric controls.
double running_cost(const Problem& problem, const Trajectory& traj, const Control& control);

struct Objective {
  double value = 0.0;
  double discrepancy = 0.0;
  double running_cost = 0.0;
  Eigen::VectorXd gradient;  // (c, h) or the flat free-yank coefficients
};

/// Objective and its exact discrete gradient.
Objective objective_gradient(const Problem& problem, const Control& control);

/// Objective without the gradient.
Objective objective_value(const Problem& problem, const Control& control);

}  // namespace yankflow::dynamics
