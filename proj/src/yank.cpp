#include "yankflow/yank.hpp"

#include "yankflow/errors.hpp"

#include <cmath>

namespace yankflow::yank {

namespace {

using mesh::LayeredMesh;

void check_field(const LayeredMesh& mesh, const Field& f) {
  if (f.size() != mesh.vertex_count() * mesh.dimension) throw ValidationError("yank: field has the wrong size");
}

void check_theta(const LayeredMesh& mesh, const PotentialParams& theta) {
  theta.validate();
  if (theta.dim() != mesh.dimension) throw ValidationError("yank: potential center dimension mismatch");
}

void check_free(const LayeredMesh& mesh, const FreeYank& yank, int interval) {
  if (yank.simplices() != mesh.simplex_count() || yank.dim() != mesh.dimension)
    throw ValidationError("free yank: dimensions do not match the mesh");
  if (interval < 0 || interval >= yank.intervals()) throw ValidationError("free yank: interval out of range");
}

SmallVec cell_mean(const Field& f, const mesh::Cell& cell, int d) {
  SmallVec mean = SmallVec::Zero(d);
  for (Index v : cell) mean += point(f, v, d);
  return mean / static_cast<double>(cell.size());
}

// Per-simplex potential values at template centroids.
Eigen::VectorXd sampled_potential(const LayeredMesh& mesh, const PotentialParams& theta) {
  const Field centroids = template_centroids(mesh);
  Eigen::VectorXd g(mesh.simplex_count());
  for (Index s = 0; s < mesh.simplex_count(); ++s) g(s) = potential_eval(theta, point(centroids, s, mesh.dimension));
  return g;
}

}  // namespace

void PotentialParams::validate() const {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ValidationError("potential radius must be > 0");
  if (center.size() != 2 && center.size() != 3) throw ValidationError("potential center must have 2 or 3 entries");
  if (!center.allFinite() || !std::isfinite(height)) throw ValidationError("potential parameters must be finite");
}

Eigen::VectorXd PotentialParams::theta() const {
  Eigen::VectorXd t(center.size() + 1);
  t << center, height;
  return t;
}

PotentialParams PotentialParams::from_theta(const Eigen::VectorXd& theta, double radius) {
  PotentialParams p;
  p.center = theta.head(theta.size() - 1);
  p.height = theta(theta.size() - 1);
  p.radius = radius;
  return p;
}

double potential_eval(const PotentialParams& theta, const SmallVec& x) {
  const double s = (x - theta.center).squaredNorm() / (theta.radius * theta.radius);
  if (s > 1.0) return 0.0;
  return theta.height * (s - 1.0) * (s - 1.0);
}

SmallVec potential_gradient(const PotentialParams& theta, const SmallVec& x) {
  const double r2 = theta.radius * theta.radius;
  const SmallVec diff = x - theta.center;
  const double s = diff.squaredNorm() / r2;
  if (s > 1.0) return SmallVec::Zero(x.size());
  return (4.0 * theta.height * (s - 1.0) / r2) * diff;
}

Eigen::VectorXd potential_parameter_gradient(const PotentialParams& theta, const SmallVec& x) {
  const int d = theta.dim();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(d + 1);
  const double s = (x - theta.center).squaredNorm() / (theta.radius * theta.radius);
  if (s > 1.0) return g;
  g.head(d) = -potential_gradient(theta, x);
  g(d) = (s - 1.0) * (s - 1.0);
  return g;
}

Field template_centroids(const LayeredMesh& mesh) {
  const int d = mesh.dimension;
  Field c(mesh.simplex_count() * d);
  for (Index s = 0; s < mesh.simplex_count(); ++s) point(c, s, d) = cell_mean(mesh.vertices, mesh.simplices[s], d);
  return c;
}

double work_form(const LayeredMesh& mesh, const Field& q, const PotentialParams& theta, const Field& w) {
  check_theta(mesh, theta);
  check_field(mesh, q);
  check_field(mesh, w);
  const Eigen::VectorXd g = sampled_potential(mesh, theta);
  double total = 0.0;
  for (Index s = 0; s < mesh.simplex_count(); ++s) {
    if (g(s) == 0.0) continue;
    const auto geo = mesh::simplex_geometry(mesh, q, s);
    const SmallMat dw = mesh::edge_matrix(mesh::gather(w, mesh.simplices[s], mesh.dimension)) * geo.inverse;
    total -= g(s) * dw.trace() * geo.volume;
  }
  return total;
}

Field yank_vector(const LayeredMesh& mesh, const Field& q, const PotentialParams& theta) {
  check_theta(mesh, theta);
  check_field(mesh, q);
  const int d = mesh.dimension;
  const Eigen::VectorXd g = sampled_potential(mesh, theta);
  Field j = Field::Zero(q.size());
  for (Index s = 0; s < mesh.simplex_count(); ++s) {
    if (g(s) == 0.0) continue;
    const auto geo = mesh::simplex_geometry(mesh, q, s);
    // d tr(W Q^{-1}) / dW = Q^{-T}
    mesh::scatter_edge_gradient(-g(s) * geo.volume * geo.inverse.transpose(), mesh.simplices[s], d, j);
  }
  return j;
}

Field dq_work(const LayeredMesh& mesh, const Field& q, const PotentialParams& theta, const Field& w) {
  check_theta(mesh, theta);
  check_field(mesh, q);
  check_field(mesh, w);
  const int d = mesh.dimension;
  const Eigen::VectorXd g = sampled_potential(mesh, theta);
  Field grad = Field::Zero(q.size());
  for (Index s = 0; s < mesh.simplex_count(); ++s) {
    if (g(s) == 0.0) continue;
    const auto geo = mesh::simplex_geometry(mesh, q, s);
    const SmallMat wq = mesh::edge_matrix(mesh::gather(w, mesh.simplices[s], d)) * geo.inverse;
    const SmallMat inv_t = geo.inverse.transpose();
    // d tr(W Q^{-1}) = -tr(Q^{-1} W Q^{-1} dQ), d vol = vol tr(Q^{-1} dQ)
    const SmallMat dq = -(geo.inverse * wq).transpose() + wq.trace() * inv_t;
    mesh::scatter_edge_gradient(-g(s) * geo.volume * dq, mesh.simplices[s], d, grad);
  }
  return grad;
}

Eigen::VectorXd dtheta_work(const LayeredMesh& mesh, const Field& q, const PotentialParams& theta, const Field& w) {
  check_theta(mesh, theta);
  check_field(mesh, q);
  check_field(mesh, w);
  const int d = mesh.dimension;
  const Field centroids = template_centroids(mesh);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(d + 1);
  for (Index s = 0; s < mesh.simplex_count(); ++s) {
    const Eigen::VectorXd dg = potential_parameter_gradient(theta, point(centroids, s, d));
    if (dg.isZero(0.0)) continue;
    const auto geo = mesh::simplex_geometry(mesh, q, s);
    const SmallMat dw = mesh::edge_matrix(mesh::gather(w, mesh.simplices[s], d)) * geo.inverse;
    grad -= dg * (dw.trace() * geo.volume);
  }
  return grad;
}

FreeYank::FreeYank(int intervals, Index simplices, int dim)
    : intervals_(intervals), simplices_(simplices), dim_(dim),
      coefficients_(Eigen::VectorXd::Zero(static_cast<Index>(intervals) * simplices * dim)) {
  if (intervals < 1 || simplices < 1 || (dim != 2 && dim != 3))
    throw ValidationError("free yank: invalid dimensions");
}

double free_work_form(const LayeredMesh& mesh, const Field& q, const FreeYank& yank, int interval, const Field& w) {
  check_free(mesh, yank, interval);
  check_field(mesh, q);
  check_field(mesh, w);
  const int d = mesh.dimension;
  double total = 0.0;
  for (Index s = 0; s < mesh.simplex_count(); ++s) {
    const auto geo = mesh::simplex_geometry(mesh, q, s);
    total += yank.coefficient(interval, s).dot(cell_mean(w, mesh.simplices[s], d)) * geo.volume;
  }
  return total;
}

Field free_yank_vector(const LayeredMesh& mesh, const Field& q, const FreeYank& yank, int interval) {
  check_free(mesh, yank, interval);
  check_field(mesh, q);
  const int d = mesh.dimension;
  Field j = Field::Zero(q.size());
  for (Index s = 0; s < mesh.simplex_count(); ++s) {
    const auto geo = mesh::simplex_geometry(mesh, q, s);
    const SmallVec share = yank.coefficient(interval, s) * (geo.volume / (d + 1));
    for (Index v : mesh.simplices[s]) point(j, v, d) += share;
  }
  return j;
}

Field free_dq_work(const LayeredMesh& mesh, const Field& q, const FreeYank& yank, int interval, const Field& w) {
  check_free(mesh, yank, interval);
  check_field(mesh, q);
  check_field(mesh, w);
  const int d = mesh.dimension;
  Field grad = Field::Zero(q.size());
  for (Index s = 0; s < mesh.simplex_count(); ++s) {
    const auto geo = mesh::simplex_geometry(mesh, q, s);
    const double pairing = yank.coefficient(interval, s).dot(cell_mean(w, mesh.simplices[s], d));
    mesh::scatter_edge_gradient(pairing * geo.volume * geo.inverse.transpose(), mesh.simplices[s], d, grad);
  }
  return grad;
}

Eigen::VectorXd free_dcoefficient_work(const LayeredMesh& mesh, const Field& q, const Field& w) {
  check_field(mesh, q);
  check_field(mesh, w);
  const int d = mesh.dimension;
  Eigen::VectorXd grad(mesh.simplex_count() * d);
  for (Index s = 0; s < mesh.simplex_count(); ++s) {
    const auto geo = mesh::simplex_geometry(mesh, q, s);
    grad.segment(s * d, d) = cell_mean(w, mesh.simplices[s], d) * geo.volume;
  }
  return grad;
}

}  // namespace yankflow::yank
