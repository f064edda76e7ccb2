#include "yankflow/elasticity.hpp"

#include "yankflow/errors.hpp"

#include <cmath>
#include <string>

namespace yankflow::elasticity {

namespace {

using mesh::Cell;
using mesh::LayeredMesh;
using mesh::SimplexFrame;

void check_field(const LayeredMesh& mesh, const Field& f, const char* name) {
  if (f.size() != mesh.vertex_count() * mesh.dimension)
    throw ValidationError(std::string("elasticity: field '") + name + "' has the wrong size");
}

// Rows are gradients of the barycentric coordinates of the simplex.
VertexBlock barycentric_gradients(const SmallMat& inverse) {
  const Index d = inverse.rows();
  VertexBlock grads(d + 1, d);
  grads.row(0) = -inverse.colwise().sum();
  grads.bottomRows(d) = inverse;
  return grads;
}

SmallMat field_gradient(const LayeredMesh& mesh, const Field& f, Index s, const SmallMat& inverse) {
  return mesh::edge_matrix(mesh::gather(f, mesh.simplices[s], mesh.dimension)) * inverse;
}

std::vector<SimplexFrame> frames_if_needed(const LayeredMesh& mesh, const Field& q, const ElasticParams& params) {
  if (params.model == Model::layered) return mesh::simplex_frames(mesh, q);
  return {};
}

const SimplexFrame& frame_of(const std::vector<SimplexFrame>& frames, Index s) {
  static const SimplexFrame none{};
  return frames.empty() ? none : frames[s];
}

SmallVec cell_mean(const Field& f, const Cell& cell, int d) {
  SmallVec mean = SmallVec::Zero(d);
  for (Index v : cell) mean += point(f, v, d);
  return mean / static_cast<double>(cell.size());
}

double penalty_scale(int d) { return d == 2 ? 1.0 : 0.5; }  // 1/(d-1)!

}  // namespace

void ElasticParams::validate() const {
  const double moduli[] = {lambda, mu, lambda_tan, mu_tan, mu_tsv, mu_ang};
  for (double m : moduli)
    if (!(m >= 0.0) || !std::isfinite(m)) throw ValidationError("elastic moduli must be finite and >= 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be finite and >= 0");
  const bool any = model == Model::isotropic ? (lambda > 0 || mu > 0)
                                             : (lambda_tan > 0 || mu_tan > 0 || mu_tsv > 0 || mu_ang > 0);
  if (!any) throw ValidationError("at least one elastic modulus must be positive");
}

SmallMat strain(const SmallMat& gradient) { return 0.5 * (gradient + gradient.transpose()); }

SmallMat stress(const ElasticParams& params, const SmallMat& eps, const SimplexFrame& frame) {
  const Index d = eps.rows();
  const SmallMat identity = SmallMat::Identity(d, d);
  if (params.model == Model::isotropic) return params.lambda * eps.trace() * identity + 2.0 * params.mu * eps;
  const SmallVec& n = frame.normal;
  const SmallVec& s = frame.transversal;
  const SmallMat proj = identity - n * n.transpose();
  const SmallMat tangential = proj * eps * proj;
  const SmallVec shear = proj * eps * s;
  SmallMat sigma = params.lambda_tan * tangential.trace() * proj + params.mu_tan * tangential;
  sigma += params.mu_tsv * s.dot(eps * s) * (s * s.transpose());
  sigma += params.mu_ang * (shear * s.transpose() + s * shear.transpose());
  return sigma;
}

double stiffness_form(const ElasticParams& params, const SmallMat& eu, const SmallMat& ew, const SimplexFrame& frame) {
  if (params.model == Model::isotropic)
    return params.lambda * eu.trace() * ew.trace() + 2.0 * params.mu * (eu.transpose() * ew).trace();
  const SmallVec& n = frame.normal;
  const SmallVec& s = frame.transversal;
  const double nun = n.dot(eu * n);
  const double nwn = n.dot(ew * n);
  const SmallMat uw = eu * ew;
  double value = params.lambda_tan * (eu.trace() - nun) * (ew.trace() - nwn);
  value += params.mu_tan * (uw.trace() - 2.0 * n.dot(uw * n) + nun * nwn);
  value += params.mu_tsv * s.dot(eu * s) * s.dot(ew * s);
  value += 2.0 * params.mu_ang * (s.dot(uw * s) - n.dot(eu * s) * n.dot(ew * s));
  return value;
}

double energy_form(const LayeredMesh& mesh, const Field& q, const ElasticParams& params, const Field& u,
                   const Field& w) {
  params.validate();
  check_field(mesh, q, "q");
  check_field(mesh, u, "u");
  check_field(mesh, w, "w");
  const int d = mesh.dimension;
  const auto frames = frames_if_needed(mesh, q, params);
  double total = 0.0;
  for (Index s = 0; s < mesh.simplex_count(); ++s) {
    const auto geo = mesh::simplex_geometry(mesh, q, s);
    const SmallMat eu = strain(field_gradient(mesh, u, s, geo.inverse));
    const SmallMat ew = strain(field_gradient(mesh, w, s, geo.inverse));
    total += stiffness_form(params, eu, ew, frame_of(frames, s)) * geo.volume;
  }
  if (params.beta > 0.0) {
    for (const Cell& cell : mesh.bottom_elements) {
      const SmallVec c = mesh::cell_normal(q, cell, d);
      total += params.beta * penalty_scale(d) * cell_mean(u, cell, d).dot(c) * cell_mean(w, cell, d).dot(c) / c.norm();
    }
  }
  return total;
}

Field elastic_force(const LayeredMesh& mesh, const Field& q, const ElasticParams& params, const Field& w) {
  params.validate();
  check_field(mesh, q, "q");
  check_field(mesh, w, "w");
  const int d = mesh.dimension;
  const auto frames = frames_if_needed(mesh, q, params);
  Field force = Field::Zero(q.size());
  for (Index s = 0; s < mesh.simplex_count(); ++s) {
    const auto geo = mesh::simplex_geometry(mesh, q, s);
    const SmallMat sigma = stress(params, strain(field_gradient(mesh, w, s, geo.inverse)), frame_of(frames, s));
    mesh::scatter_edge_gradient(geo.volume * sigma * geo.inverse.transpose(), mesh.simplices[s], d, force);
  }
  if (params.beta > 0.0) {
    for (const Cell& cell : mesh.bottom_elements) {
      const SmallVec c = mesh::cell_normal(q, cell, d);
      const SmallVec g =
          params.beta * penalty_scale(d) * cell_mean(w, cell, d).dot(c) / c.norm() / static_cast<double>(cell.size()) * c;
      for (Index v : cell) point(force, v, d) += g;
    }
  }
  return force;
}

Field shape_derivative(const LayeredMesh& mesh, const Field& q, const ElasticParams& params, const Field& u,
                       const Field& w) {
  params.validate();
  check_field(mesh, q, "q");
  check_field(mesh, u, "u");
  check_field(mesh, w, "w");
  const int d = mesh.dimension;
  const bool layered = params.model == Model::layered;
  const auto frames = frames_if_needed(mesh, q, params);
  Field grad = Field::Zero(q.size());
  std::vector<SmallVec> g_normal, g_transversal;
  if (layered) {
    g_normal.assign(mesh.prisms.size(), SmallVec::Zero(d));
    g_transversal.assign(mesh.prisms.size(), SmallVec::Zero(d));
  }
  for (Index s = 0; s < mesh.simplex_count(); ++s) {
    const auto geo = mesh::simplex_geometry(mesh, q, s);
    const SmallMat gu = field_gradient(mesh, u, s, geo.inverse);
    const SmallMat gw = field_gradient(mesh, w, s, geo.inverse);
    const SmallMat eu = strain(gu);
    const SmallMat ew = strain(gw);
    const SimplexFrame& frame = frame_of(frames, s);
    const SmallMat su = stress(params, eu, frame);
    const SmallMat sw = stress(params, ew, frame);
    const double form = (sw.transpose() * eu).trace();
    const SmallMat inv_t = geo.inverse.transpose();
    // volume change, then the dependence of both strains on Q
    SmallMat dq = form * inv_t - gu.transpose() * sw * inv_t - gw.transpose() * su * inv_t;
    mesh::scatter_edge_gradient(geo.volume * dq, mesh.simplices[s], d, grad);

    if (layered) {
      const SmallVec& n = frame.normal;
      const SmallVec& t = frame.transversal;
      const SmallVec eun = eu * n, ewn = ew * n, eut = eu * t, ewt = ew * t;
      const SmallMat sym = eu * ew + ew * eu;
      const double cu = eu.trace() - n.dot(eun);
      const double cw = ew.trace() - n.dot(ewn);
      const double nut = n.dot(eut), nwt = n.dot(ewt);
      SmallVec dn = -2.0 * params.lambda_tan * (cw * eun + cu * ewn);
      dn += params.mu_tan * (-2.0 * sym * n + 2.0 * n.dot(ewn) * eun + 2.0 * n.dot(eun) * ewn);
      dn += -2.0 * params.mu_ang * (nwt * eut + nut * ewt);
      SmallVec dt = 2.0 * params.mu_tsv * (t.dot(ewt) * eut + t.dot(eut) * ewt);
      dt += params.mu_ang * (2.0 * sym * t - 2.0 * nwt * eun - 2.0 * nut * ewn);
      const Index p = mesh.simplex_prism[s];
      g_normal[p] += geo.volume * dn;
      g_transversal[p] += geo.volume * dt;
    }
  }
  if (layered)
    for (Index p = 0; p < static_cast<Index>(mesh.prisms.size()); ++p)
      mesh::frame_pullback(mesh, q, p, g_normal[p], g_transversal[p], grad);

  if (params.beta > 0.0) {
    for (const Cell& cell : mesh.bottom_elements) {
      const SmallVec c = mesh::cell_normal(q, cell, d);
      const SmallVec ub = cell_mean(u, cell, d);
      const SmallVec wb = cell_mean(w, cell, d);
      const double len = c.norm();
      const double uc = ub.dot(c), wc = wb.dot(c);
      const SmallVec gc =
          params.beta * penalty_scale(d) * ((wc * ub + uc * wb) / len - uc * wc / (len * len * len) * c);
      mesh::cell_normal_pullback(q, cell, d, gc, grad);
    }
  }
  return grad;
}

Eigen::MatrixXd assemble_operator(const LayeredMesh& mesh, const Field& q, const ElasticParams& params) {
  params.validate();
  check_field(mesh, q, "q");
  const int d = mesh.dimension;
  const Index ndof = q.size();
  const auto frames = frames_if_needed(mesh, q, params);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(ndof, ndof);
  const int local = (d + 1) * d;
  std::vector<SmallMat> strains(local), stresses(local);
  for (Index s = 0; s < mesh.simplex_count(); ++s) {
    const auto geo = mesh::simplex_geometry(mesh, q, s);
    const VertexBlock bary = barycentric_gradients(geo.inverse);
    const SimplexFrame& frame = frame_of(frames, s);
    for (int k = 0; k <= d; ++k)
      for (int c = 0; c < d; ++c) {
        SmallMat g = SmallMat::Zero(d, d);
        g.row(c) = bary.row(k);
        strains[k * d + c] = strain(g);
        stresses[k * d + c] = stress(params, strains[k * d + c], frame);
      }
    const Cell& simplex = mesh.simplices[s];
    for (int i = 0; i < local; ++i) {
      const Index row = simplex[i / d] * d + i % d;
      for (int j = 0; j < local; ++j) {
        const Index col = simplex[j / d] * d + j % d;
        a(row, col) += geo.volume * (stresses[j].transpose() * strains[i]).trace();
      }
    }
  }
  if (params.beta > 0.0) {
    for (const Cell& cell : mesh.bottom_elements) {
      const SmallVec c = mesh::cell_normal(q, cell, d);
      const double k = static_cast<double>(cell.size());
      const SmallMat block = params.beta * penalty_scale(d) / (c.norm() * k * k) * (c * c.transpose());
      for (Index vi : cell)
        for (Index vj : cell) a.block(vi * d, vj * d, d, d) += block;
    }
  }
  // exact symmetry
  a = 0.5 * (a + a.transpose()).eval();
  return a;
}

}  // namespace yankflow::elasticity
