#pragma once

#include "yankflow/types.hpp"

#include <optional>

namespace yankflow::kernel {

struct KernelConfig {
  double sigma = 0.2;    // kernel width
  double jitter = 1e-10; // added to the diagonal of the scalar kernel matrix

  void validate() const;
};

/// Matern profile of order 3: (1 + t + 2t^2/15 + t^3/15) e^{-t}, t >= 0.
double matern3(double t);

/// d/dt of matern3; equals -(t/15)(t^2 - t + 11) e^{-t}.
double matern3_derivative(double t);

/// Dense kernel matrix of a point cloud. The vector-valued kernel is
/// kappa(|x-y|/sigma) I_d, so only the n x n scalar factor is stored; the
/// nd x nd matrix is its Kronecker product with I_d.
class KernelMatrix {
 public:
  KernelMatrix(const Field& points, int dim, const KernelConfig& cfg);

  Index size() const { return scalar_.rows(); }
  int dim() const { return dim_; }
  const Eigen::MatrixXd& scalar() const { return scalar_; }

  /// Full nd x nd matrix (vertex-major ordering).
  Eigen::MatrixXd entries() const;

  Field apply(const Field& x) const;

  /// Cholesky factorization of the scalar block; throws FactorizationError.
  void factorize();
  bool factorized() const { return chol_.has_value(); }
  Field solve(const Field& x) const;
  Eigen::MatrixXd inverse_scalar() const;
  /// Lower Cholesky factor of the scalar block.
  Eigen::MatrixXd factor() const;
  /// L x and L' x for the Cholesky factor K = L L'.
  Field apply_factor(const Field& x) const;
  Field apply_factor_transpose(const Field& x) const;

 private:
  int dim_;
  Eigen::MatrixXd scalar_;
  std::optional<Eigen::LLT<Eigen::MatrixXd>> chol_;
};

KernelMatrix kernel_matrix(const Field& points, int dim, const KernelConfig& cfg);

/// Factored operator omega K^{-1} + A used to solve for velocities.
/// With K = L L', the operator equals L^{-T} (omega I + L' A L) L^{-1}; only
/// the well-conditioned middle matrix is factored, so K^{-1} is never formed.
class VelocityOperator {
 public:
  /// Throws FactorizationError when K or M cannot be factored and
  /// ValidationError when A fails the PSD probe.
  VelocityOperator(KernelMatrix kernel, const Eigen::MatrixXd& elastic, double omega);

  /// v = (omega K^{-1} + A)^{-1} j
  Field solve(const Field& rhs) const;
  /// K^{-1} x
  Field kernel_solve(const Field& x) const { return kernel_.solve(x); }
  /// K^{-1} v for v = solve(rhs), from omega K^{-1} v = rhs - A v.
  Field kernel_inverse_solution(const Field& rhs, const Field& v) const;
  const Eigen::MatrixXd& elastic() const { return elastic_; }
  const KernelMatrix& kernel() const { return kernel_; }
  double omega() const { return omega_; }

 private:
  KernelMatrix kernel_;
  Eigen::MatrixXd elastic_;
  double omega_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
};

Field solve_velocity(const KernelMatrix& kernel, const Eigen::MatrixXd& elastic, const Field& rhs,
                     double omega);

/// Rejects A when some probe v gives v'Av < -1e-8 |A| |v|^2 (16 seeded probes).
void check_psd(const Eigen::MatrixXd& a);

/// Gradient in the point positions of a' K_q b, with a and b held fixed.
Field kernel_pairing_gradient(const Field& points, int dim, const KernelConfig& cfg, const Field& a,
                              const Field& b);

}  // namespace yankflow::kernel
