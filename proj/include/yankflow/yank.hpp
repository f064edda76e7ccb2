#pragma once

#include "yankflow/mesh.hpp"

namespace yankflow::yank {

/// Parameters of the compactly supported potential
/// g(x) = h (|x - c|^2 / r^2 - 1)^2 for |x - c| <= r, 0 otherwise.
/// The radius is fixed; (c, h) are the optimization parameters.
struct PotentialParams {
  SmallVec center;
  double height = 0.0;
  double radius = 0.25;

  void validate() const;
  int dim() const { return static_cast<int>(center.size()); }

  /// Packs (c, h) into a (d+1)-vector.
  Eigen::VectorXd theta() const;
  static PotentialParams from_theta(const Eigen::VectorXd& theta, double radius);
};

double potential_eval(const PotentialParams& theta, const SmallVec& x);

/// Gradient of the potential in x.
SmallVec potential_gradient(const PotentialParams& theta, const SmallVec& x);

/// Derivative of the potential value in (c, h).
Eigen::VectorXd potential_parameter_gradient(const PotentialParams& theta, const SmallVec& x);

/// Centroids of the template simplices; the transported potential is sampled there.
Field template_centroids(const mesh::LayeredMesh& mesh);

/// j_{q,theta}' w = -sum_T g(template centroid of T) tr(W Q^{-1}) vol(T).
double work_form(const mesh::LayeredMesh& mesh, const Field& q, const PotentialParams& theta, const Field& w);

/// The covector j_{q,theta}.
Field yank_vector(const mesh::LayeredMesh& mesh, const Field& q, const PotentialParams& theta);

/// Gradient in q of j_{q,theta}' w with w fixed.
Field dq_work(const mesh::LayeredMesh& mesh, const Field& q, const PotentialParams& theta, const Field& w);

/// Gradient in (c, h) of j_{q,theta}' w.
Eigen::VectorXd dtheta_work(const mesh::LayeredMesh& mesh, const Field& q, const PotentialParams& theta,
                            const Field& w);

/// Piecewise constant in time, per-simplex yank coefficients j_k.
class FreeYank {
 public:
  FreeYank() = default;
  FreeYank(int intervals, Index simplices, int dim);

  int intervals() const { return intervals_; }
  Index simplices() const { return simplices_; }
  int dim() const { return dim_; }

  /// Flat coefficient vector ordered [interval][simplex][component].
  Eigen::VectorXd& coefficients() { return coefficients_; }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }

  auto coefficient(int interval, Index simplex) {
    return coefficients_.segment((interval * simplices_ + simplex) * dim_, dim_);
  }
  auto coefficient(int interval, Index simplex) const {
    return coefficients_.segment((interval * simplices_ + simplex) * dim_, dim_);
  }
  auto interval(int k) { return coefficients_.segment(k * simplices_ * dim_, simplices_ * dim_); }
  auto interval(int k) const { return coefficients_.segment(k * simplices_ * dim_, simplices_ * dim_); }

 private:
  int intervals_ = 0;
  Index simplices_ = 0;
  int dim_ = 2;
  Eigen::VectorXd coefficients_;
};

/// sum_T j_k(T)' mean_T(w) |T|, with |T| measured at q.
double free_work_form(const mesh::LayeredMesh& mesh, const Field& q, const FreeYank& yank, int interval,
                      const Field& w);

/// Covector of free_work_form for one interval.
Field free_yank_vector(const mesh::LayeredMesh& mesh, const Field& q, const FreeYank& yank, int interval);

/// Gradient in q of free_work_form with w fixed.
Field free_dq_work(const mesh::LayeredMesh& mesh, const Field& q, const FreeYank& yank, int interval,
                   const Field& w);

/// Gradient of free_work_form in the coefficients of one interval (K x d, flat).
Eigen::VectorXd free_dcoefficient_work(const mesh::LayeredMesh& mesh, const Field& q, const Field& w);

}  // namespace yankflow::yank
