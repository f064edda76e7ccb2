#pragma once

#include "yankflow/types.hpp"

#include <array>
#include <functional>
#include <vector>

namespace yankflow::mesh {

using Cell = std::vector<Index>;

/// One prism (d=3) or quad (d=2) of the layered structure. `bottom` and `top`
/// hold matching global vertex indices of a layer cell and its copy on the
/// next layer.
struct Prism {
  Cell bottom;
  Cell top;
  int layer = 0;
  // +1 or -1 so that orientation * (cell normal) points toward increasing layer index
  double orientation = 1.0;
};

/// Layered simplicial template. Vertex (layer, i) has global index
/// layer * points_per_layer + i; every layer shares the connectivity
/// `layer_cells` (segments for d=2, triangles for d=3) in local indices.
struct LayeredMesh {
  int dimension = 2;
  int layers = 0;
  Index points_per_layer = 0;
  Field vertices;
  std::vector<Cell> layer_cells;
  std::vector<Cell> simplices;       // d+1 global indices, positively oriented on the template
  std::vector<Index> simplex_prism;  // prism each simplex was split from
  std::vector<Prism> prisms;
  std::vector<Cell> bottom_elements;
  std::vector<Cell> top_elements;
  std::vector<std::vector<Index>> vertex_simplices;  // incidence, rebuilt by finalize()

  Index vertex_count() const { return static_cast<Index>(layers) * points_per_layer; }
  Index simplex_count() const { return static_cast<Index>(simplices.size()); }
  Index vertex(int layer, Index i) const { return layer * points_per_layer + i; }

  /// Cells of one layer in global vertex indices.
  std::vector<Cell> layer_elements(int layer) const;

  /// Rebuilds vertex_simplices and checks index ranges.
  void finalize();
};

struct SimplexFrame {
  SmallVec normal;       // unit normal to the deformed layers
  SmallVec transversal;  // unit transversal direction
};

/// Displacement of point `i` on layer `layer` relative to its bottom-layer base point.
using TransversalRule = std::function<SmallVec(int layer, Index i)>;

/// Builds a layered template from bottom-layer points (flattened N x d) and
/// the layer connectivity. Throws DegenerateSimplexError naming the offending
/// simplex when a split element is flat.
LayeredMesh build_layered_template(const Field& base, int dim, const std::vector<Cell>& cells,
                                   const TransversalRule& rule, int layers);

/// 2D convenience overload: `base_curve` is a polyline traversed in index order.
LayeredMesh build_layered_template(const Field& base_curve, const TransversalRule& rule, int layers);

struct PrismSplit {
  std::vector<Cell> simplices;
  std::vector<Index> simplex_prism;
  std::vector<Prism> prisms;
};

/// Splits the prisms (quads in 2D) between consecutive layers into simplices
/// without new vertices. Each quad face is cut by the diagonal through its
/// smallest global index, so shared faces match across neighbours; the pattern
/// of the first layer pair is replicated upward.
PrismSplit split_prisms(int dim, const std::vector<Cell>& cells, Index points_per_layer, int layers);

/// Split of a single triangular prism; v[0..2] is the bottom triangle and
/// v[3..5] the top vertices above v[0..2].
std::array<std::array<Index, 4>, 3> split_prism(const std::array<Index, 6>& v);

/// Edge matrix Q = [q1 - q0, ..., qd - q0] of a (d+1) x d block of vertex rows.
SmallMat edge_matrix(const VertexBlock& q);

/// Displacement gradient U Q^{-1} of the affine interpolant of u on a simplex.
/// Throws DegenerateSimplexError when |det Q| <= 1e-14 * (max edge)^d.
SmallMat simplex_gradient(const VertexBlock& q, const VertexBlock& u);

/// |det Q| / d!
double simplex_volume(const VertexBlock& q);

/// Degeneracy threshold 1e-14 * (max edge length)^d for a simplex.
double degeneracy_tolerance(const VertexBlock& q);

VertexBlock gather(const Field& f, const Cell& cell, int dim);

/// Cached per-simplex quantities at a configuration.
struct SimplexGeometry {
  SmallMat edges;    // Q
  SmallMat inverse;  // Q^{-1}
  double det = 0.0;
  double volume = 0.0;
};

/// Throws DegenerateSimplexError(index) when the simplex is flat at q.
SimplexGeometry simplex_geometry(const LayeredMesh& mesh, const Field& q, Index simplex);

/// Adds a gradient with respect to the edge matrix Q (column k belongs to
/// vertex k+1) to the per-vertex covector `out`.
void scatter_edge_gradient(const SmallMat& dq, const Cell& cell, int dim, Field& out);

/// Unnormalized normal of a layer cell (segment in 2D, triangle in 3D): the
/// +90 degree rotation of the edge, or the cross product of the two edges.
/// Its length is (d-1)! times the cell measure.
SmallVec cell_normal(const Field& q, const Cell& cell, int dim);

/// Adds the pull-back of g through cell_normal to the cell vertices in `out`.
void cell_normal_pullback(const Field& q, const Cell& cell, int dim, const SmallVec& g, Field& out);

/// Frame of each prism at configuration q.
std::vector<SimplexFrame> prism_frames(const LayeredMesh& mesh, const Field& q);
SimplexFrame prism_frame(const LayeredMesh& mesh, const Field& q, Index prism);

/// Per-simplex frames; every simplex inherits the frame of its prism.
std::vector<SimplexFrame> simplex_frames(const LayeredMesh& mesh, const Field& q);

/// Adds (dN)^T g_normal + (dS)^T g_transversal, the pull-back of covectors on a
/// prism frame to the prism vertices, into `out`.
void frame_pullback(const LayeredMesh& mesh, const Field& q, Index prism, const SmallVec& g_normal,
                    const SmallVec& g_transversal, Field& out);

/// Index of the first simplex whose signed determinant is not above the
/// degeneracy tolerance at q, or -1 when all simplices keep their orientation.
Index first_inverted_simplex(const LayeredMesh& mesh, const Field& q);

}  // namespace yankflow::mesh
