#pragma once

#include "yankflow/mesh.hpp"

namespace yankflow::elasticity {

enum class Model { isotropic, layered };

struct ElasticParams {
  Model model = Model::isotropic;
  // isotropic Lame parameters
  double lambda = 0.0;
  double mu = 0.5;
  // layered moduli: tangential, transversal and angular terms
  double lambda_tan = 0.0;
  double mu_tan = 1.0;
  double mu_tsv = 1.0;
  double mu_ang = 1.0;
  // weight of the normal-motion penalty on the bottom layer
  double beta = 1.0;

  void validate() const;
};

/// Linear strain: the symmetric part of a displacement gradient.
SmallMat strain(const SmallMat& gradient);

/// Symmetric tensor sigma(eps_w) with E(eps_u, eps_w) = <sigma(eps_w), eps_u>.
/// `frame` is ignored by the isotropic model.
SmallMat stress(const ElasticParams& params, const SmallMat& eps, const mesh::SimplexFrame& frame);

/// Stiffness bilinear form E(eps_u, eps_w) evaluated pointwise.
double stiffness_form(const ElasticParams& params, const SmallMat& eps_u, const SmallMat& eps_w,
                      const mesh::SimplexFrame& frame);

/// u' A_q w: elastic energy form summed over simplices of the current
/// configuration, plus beta * sum over bottom cells of (u.n)(w.n) |cell|
/// with midpoint values of u and w.
double energy_form(const mesh::LayeredMesh& mesh, const Field& q, const ElasticParams& params, const Field& u,
                   const Field& w);

/// A_q w, the covector with g'u = energy_form(u, w).
Field elastic_force(const mesh::LayeredMesh& mesh, const Field& q, const ElasticParams& params, const Field& w);

/// Gradient in q of u' A_q w with u and w held fixed.
Field shape_derivative(const mesh::LayeredMesh& mesh, const Field& q, const ElasticParams& params, const Field& u,
                       const Field& w);

/// Dense nd x nd matrix of A_q.
Eigen::MatrixXd assemble_operator(const mesh::LayeredMesh& mesh, const Field& q, const ElasticParams& params);

}  // namespace yankflow::elasticity
