#pragma once

#include "yankflow/dynamics.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace yankflow::inverse {

/// Axis-aligned box [lo, hi] per coordinate.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  void validate() const;
  Index dim() const { return lo.size(); }
  bool contains(const Eigen::VectorXd& x) const;
  Eigen::VectorXd project(const Eigen::VectorXd& x) const;
};

/// The parameter box c in [0,3] x [0,1], h in [0,4].
Box default_theta_box();

struct OptimizerConfig {
  int max_iters = 500;
  double grad_tol = 1e-8;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int lbfgs_memory = 10;
  int n_starts = 8;
  Box theta_box = default_theta_box();
  std::uint64_t rng_seed = 0;
  int threads = 0;  // 0: hardware concurrency

  void validate() const;
};

/// n stratified samples: every coordinate has exactly one sample per
/// equal-width stratum of [lo, hi]. Deterministic for a fixed seed.
Eigen::MatrixXd latin_hypercube(const Box& box, int n, std::uint64_t seed);

struct Evaluation {
  double f = 0.0;
  Eigen::VectorXd g;
};

/// Objective and gradient. May throw FlowBreakdown; the optimizers treat that
/// as an infinite value and shorten the step.
using ObjectiveFn = std::function<Evaluation(const Eigen::VectorXd&)>;

enum class Status { converged, stationary_start, max_iters, stalled, failed };
std::string to_string(Status status);

struct MinimizeResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd g;
  int iterations = 0;
  int evaluations = 0;
  Status status = Status::failed;
  std::vector<double> trace;  // f at x0 and every accepted iterate
  std::string message;

  /// True when the run ended without meeting the gradient tolerance.
  bool degraded() const { return status == Status::stalled || status == Status::max_iters; }
};

/// BFGS with a strong-Wolfe line search. With a box, iterates are kept
/// feasible: coordinates pinned at an active bound are frozen, steps are capped
/// at the boundary, and curvature pairs are skipped when the active set
/// changes or s'y <= 0.
MinimizeResult minimize_bfgs(const ObjectiveFn& fn, const Eigen::VectorXd& x0, const OptimizerConfig& cfg,
                             const Box* box = nullptr);

/// Limited-memory BFGS (two-loop recursion), unconstrained.
MinimizeResult minimize_lbfgs(const ObjectiveFn& fn, const Eigen::VectorXd& x0, const OptimizerConfig& cfg);

struct StartResult {
  Eigen::VectorXd theta0;
  Eigen::VectorXd theta_star;
  double f_star = 0.0;
  int iterations = 0;
  std::string status;
  std::vector<double> trace;
};

struct ParametricResult {
  yank::PotentialParams theta;
  double f = 0.0;
  int best_index = -1;
  std::vector<StartResult> starts;
};

/// Multistart projected BFGS over (c, h) with the radius fixed. Starts come
/// from a Latin hypercube over cfg.theta_box.
ParametricResult solve_parametric(const dynamics::Problem& problem, double radius, const OptimizerConfig& cfg);

/// Same with explicit starting points (rows).
ParametricResult solve_parametric(const dynamics::Problem& problem, double radius, const OptimizerConfig& cfg,
                                  const Eigen::MatrixXd& starts);

struct FreeResult {
  yank::FreeYank yank;
  double f = 0.0;
  double f_initial = 0.0;
  MinimizeResult run;
};

/// L-BFGS over the free-yank coefficients starting from j = 0 (or `initial`).
FreeResult solve_free(const dynamics::Problem& problem, const OptimizerConfig& cfg,
                      const yank::FreeYank* initial = nullptr);

/// Least-squares slope of log(y) against log(x).
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct SweepPoint {
  double radius = 0.0;
  ParametricResult result;
  std::string status;  // "ok" or the failure message
};

/// Re-solves the parametric problem for each radius.
std::vector<SweepPoint> radius_sweep(const dynamics::Problem& problem, const std::vector<double>& radii,
                                     const OptimizerConfig& cfg);

}  // namespace yankflow::inverse
