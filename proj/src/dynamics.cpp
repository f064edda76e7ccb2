#include "yankflow/dynamics.hpp"

#include "yankflow/errors.hpp"

#include <cmath>
#include <string>

namespace yankflow::dynamics {

namespace {

bool is_free(const Control& control) { return std::holds_alternative<yank::FreeYank>(control); }

void check_control(const Problem& problem, const Control& control) {
  if (const auto* theta = std::get_if<yank::PotentialParams>(&control)) {
    theta->validate();
    if (theta->dim() != problem.mesh.dimension) throw ValidationError("potential dimension does not match the mesh");
  } else {
    const auto& free = std::get<yank::FreeYank>(control);
    if (free.intervals() != problem.solver.steps || free.simplices() != problem.mesh.simplex_count() ||
        free.dim() != problem.mesh.dimension)
      throw ValidationError("free yank shape does not match (steps, simplices, dimension)");
  }
}

// Gradient in q of a' J_q with a held fixed.
Field dq_yank_pairing(const Problem& problem, const Field& q, const Control& control, int interval, const Field& a) {
  if (const auto* theta = std::get_if<yank::PotentialParams>(&control)) return yank::dq_work(problem.mesh, q, *theta, a);
  return yank::free_dq_work(problem.mesh, q, std::get<yank::FreeYank>(control), interval, a);
}

}  // namespace

void SolverConfig::validate() const {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw ValidationError("omega must be > 0");
  if (steps < 1) throw ValidationError("steps must be >= 1");
  if (!(final_time > 0.0) || !std::isfinite(final_time)) throw ValidationError("final time must be > 0");
}

void Problem::validate() const {
  elastic.validate();
  kernel.validate();
  solver.validate();
  varifold.validate();
  for (const auto& target : targets) {
    if (target.layer < 0 || target.layer >= mesh.layers) throw ValidationError("target layer out of range");
    if (target.surface.dimension != mesh.dimension) throw ValidationError("target dimension mismatch");
    target.surface.validate();
  }
}

Field assemble_yank(const Problem& problem, const Field& q, const Control& control, int interval) {
  if (const auto* theta = std::get_if<yank::PotentialParams>(&control)) return yank::yank_vector(problem.mesh, q, *theta);
  return yank::free_yank_vector(problem.mesh, q, std::get<yank::FreeYank>(control), interval);
}

StepResult step_velocity(const Problem& problem, const Field& q, const Control& control, int interval) {
  const int d = problem.mesh.dimension;
  try {
    Field j = assemble_yank(problem, q, control, interval);
    kernel::VelocityOperator op(kernel::KernelMatrix(q, d, problem.kernel),
                                elasticity::assemble_operator(problem.mesh, q, problem.elastic), problem.solver.omega);
    Field v = op.solve(j);
    return {std::move(j), std::move(v), std::move(op)};
  } catch (const DegenerateSimplexError& e) {
    throw FlowBreakdown(interval, e.what());
  } catch (const FactorizationError& e) {
    throw FactorizationError("step " + std::to_string(interval) + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError("step " + std::to_string(interval) + ": " + e.what());
  }
}

Trajectory forward_flow(const Problem& problem, const Control& control, bool keep_operators) {
  problem.validate();
  check_control(problem, control);
  const int steps = problem.solver.steps;
  const double dt = problem.solver.dt();
  Trajectory traj;
  traj.states.reserve(steps + 1);
  traj.states.push_back(problem.mesh.vertices);
  for (int k = 0; k < steps; ++k) {
    StepResult step = step_velocity(problem, traj.states.back(), control, k);
    Field next = traj.states.back() + dt * step.velocity;
    const Index bad = mesh::first_inverted_simplex(problem.mesh, next);
    if (bad >= 0) throw FlowBreakdown(k + 1, "simplex " + std::to_string(bad) + " inverted or flattened");
    traj.states.push_back(std::move(next));
    traj.velocities.push_back(std::move(step.velocity));
    traj.yanks.push_back(std::move(step.yank));
    if (keep_operators) traj.operators.push_back(std::move(step.op));
  }
  return traj;
}

double total_discrepancy(const Problem& problem, const Field& q) {
  double total = 0.0;
  for (const auto& target : problem.targets)
    total += varifold::discrepancy(varifold::layer_surface(problem.mesh, q, target.layer), target.surface,
                                   problem.varifold);
  return total;
}

Field total_discrepancy_gradient(const Problem& problem, const Field& q) {
  const int d = problem.mesh.dimension;
  Field grad = Field::Zero(q.size());
  for (const auto& target : problem.targets) {
    const Field g = varifold::discrepancy_gradient(varifold::layer_surface(problem.mesh, q, target.layer),
                                                   target.surface, problem.varifold);
    grad.segment(problem.mesh.vertex(target.layer, 0) * d, g.size()) += g;
  }
  return grad;
}

double running_cost(const Problem& problem, const Trajectory& traj, const Control& control) {
  if (!is_free(control)) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < traj.velocities.size(); ++k) total += problem.solver.dt() * traj.yanks[k].dot(traj.velocities[k]);
  return total;
}

namespace {

// Backward sweep in the gradient convention lambda = -p. Optionally
// accumulates the control gradient.
std::vector<Field> adjoint_sweep(const Problem& problem, const Trajectory& traj, const Control& control,
                                 const Field& grad_final, Eigen::VectorXd* control_gradient) {
  const int steps = problem.solver.steps;
  if (static_cast<int>(traj.operators.size()) != steps || static_cast<int>(traj.states.size()) != steps + 1)
    throw Error("backward sweep: trajectory caches do not match the solver configuration");
  const int d = problem.mesh.dimension;
  const double dt = problem.solver.dt();
  const double omega = problem.solver.omega;
  const bool free = is_free(control);
  const yank::PotentialParams* theta = std::get_if<yank::PotentialParams>(&control);

  std::vector<Field> lambda(steps + 1);
  lambda[steps] = grad_final;
  for (int k = steps - 1; k >= 0; --k) {
    const Field& q = traj.states[k];
    const Field& v = traj.velocities[k];
    const auto& op = traj.operators[k];
    Field beta = op.solve(lambda[k + 1]);
    const Field kinv_v = op.kernel_inverse_solution(traj.yanks[k], v);
    Field kinv_beta = op.kernel_inverse_solution(lambda[k + 1], beta);
    if (free) {
      beta += v;
      kinv_beta += kinv_v;
    }
    // weight of the yank pairing: the running cost adds a second copy of v
    const Field pairing = free ? Field(beta + v) : beta;

    Field inner = omega * kernel::kernel_pairing_gradient(q, d, problem.kernel, kinv_beta, kinv_v);
    inner -= elasticity::shape_derivative(problem.mesh, q, problem.elastic, beta, v);
    inner += dq_yank_pairing(problem, q, control, k, pairing);
    lambda[k] = lambda[k + 1] + dt * inner;

    if (control_gradient) {
      if (theta) {
        control_gradient->noalias() += dt * yank::dtheta_work(problem.mesh, q, *theta, pairing);
      } else {
        const auto& yank = std::get<yank::FreeYank>(control);
        control_gradient->segment(k * yank.simplices() * d, yank.simplices() * d) +=
            dt * yank::free_dcoefficient_work(problem.mesh, q, pairing);
      }
    }
  }
  return lambda;
}

}  // namespace

Costate backward_costate(const Problem& problem, const Trajectory& traj, const Control& control, const Field& grad_rho) {
  check_control(problem, control);
  Costate costate;
  costate.p = adjoint_sweep(problem, traj, control, grad_rho, nullptr);
  for (Field& p : costate.p) p = -p;
  return costate;
}

Objective objective_value(const Problem& problem, const Control& control) {
  const Trajectory traj = forward_flow(problem, control, false);
  Objective out;
  out.discrepancy = total_discrepancy(problem, traj.states.back());
  out.running_cost = running_cost(problem, traj, control);
  out.value = out.discrepancy + out.running_cost;
  return out;
}

Objective objective_gradient(const Problem& problem, const Control& control) {
  const Trajectory traj = forward_flow(problem, control, true);
  Objective out;
  out.discrepancy = total_discrepancy(problem, traj.states.back());
  out.running_cost = running_cost(problem, traj, control);
  out.value = out.discrepancy + out.running_cost;
  if (const auto* theta = std::get_if<yank::PotentialParams>(&control))
    out.gradient = Eigen::VectorXd::Zero(theta->dim() + 1);
  else
    out.gradient = Eigen::VectorXd::Zero(std::get<yank::FreeYank>(control).coefficients().size());
  adjoint_sweep(problem, traj, control, total_discrepancy_gradient(problem, traj.states.back()), &out.gradient);
  return out;
}

}  // namespace yankflow::dynamics
