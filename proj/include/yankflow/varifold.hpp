#pragma once

#include "yankflow/mesh.hpp"

#include <vector>

namespace yankflow::varifold {

/// Oriented polyline (d=2, segments) or triangulated surface (d=3).
struct BoundarySurface {
  int dimension = 2;
  Field vertices;
  std::vector<mesh::Cell> elements;

  Index vertex_count() const { return vertices.size() / dimension; }
  void validate() const;
};

struct VarifoldConfig {
  double tau = 0.3;  // spatial kernel scale
  void validate() const;
};

/// (1 + t^2)^{-2}
double cauchy_kernel(double t);

/// Per-element centroid, unit normal and measure of a surface.
struct ElementData {
  SmallVec centroid;
  SmallVec normal;
  double measure = 0.0;
};
std::vector<ElementData> element_data(const BoundarySurface& surface);

/// Double sum over element pairs of chi(|m - m'|/tau) (n.n')^2 |e| |e'| with
/// centroid quadrature. Symmetric in its arguments bit for bit.
double varifold_product(const BoundarySurface& a, const BoundarySurface& b, const VarifoldConfig& cfg);

/// nu(S,S) - 2 nu(S,S') + nu(S',S')
double discrepancy(const BoundarySurface& s, const BoundarySurface& target, const VarifoldConfig& cfg);

/// Gradient of the discrepancy in the vertices of `s` (the target is static).
Field discrepancy_gradient(const BoundarySurface& s, const BoundarySurface& target, const VarifoldConfig& cfg);

/// Surface of one layer of a layered mesh at configuration q; vertex i of the
/// surface is mesh vertex (layer, i).
BoundarySurface layer_surface(const mesh::LayeredMesh& mesh, const Field& q, int layer);

}  // namespace yankflow::varifold
