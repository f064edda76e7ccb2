#include "yankflow/mesh.hpp"

#include "yankflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace yankflow::mesh {

namespace {

double factorial(int d) { return d == 2 ? 2.0 : 6.0; }

SmallVec cross3(const SmallVec& a, const SmallVec& b) {
  SmallVec c(3);
  c << a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2), a(0) * b(1) - a(1) * b(0);
  return c;
}

}  // namespace

SmallVec cell_normal(const Field& q, const Cell& cell, int dim) {
  if (dim == 2) {
    const SmallVec t = point(q, cell[1], 2) - point(q, cell[0], 2);
    SmallVec n(2);
    n << -t(1), t(0);
    return n;
  }
  const SmallVec p0 = point(q, cell[0], 3);
  return cross3(point(q, cell[1], 3) - p0, point(q, cell[2], 3) - p0);
}

void cell_normal_pullback(const Field& q, const Cell& cell, int dim, const SmallVec& g, Field& out) {
  if (dim == 2) {
    SmallVec gt(2);
    gt << g(1), -g(0);
    point(out, cell[1], 2) += gt;
    point(out, cell[0], 2) -= gt;
    return;
  }
  const SmallVec p0 = point(q, cell[0], 3);
  const SmallVec e1 = point(q, cell[1], 3) - p0;
  const SmallVec e2 = point(q, cell[2], 3) - p0;
  const SmallVec g1 = cross3(e2, g);
  const SmallVec g2 = cross3(g, e1);
  point(out, cell[1], 3) += g1;
  point(out, cell[2], 3) += g2;
  point(out, cell[0], 3) -= g1 + g2;
}

namespace {

// Pull-back of g through x -> x / |x|.
SmallVec normalize_pullback(const SmallVec& x, const SmallVec& g) {
  const double len = x.norm();
  const SmallVec unit = x / len;
  return (g - unit * unit.dot(g)) / len;
}

SmallVec normalized_or_throw(const SmallVec& x, Index prism, const char* what) {
  const double len = x.norm();
  if (!(len > 1e-300) || !std::isfinite(len))
    throw DegenerateSimplexError(static_cast<std::size_t>(prism), std::string("degenerate prism frame: ") + what);
  return x / len;
}

}  // namespace

std::vector<Cell> LayeredMesh::layer_elements(int layer) const {
  std::vector<Cell> out;
  out.reserve(layer_cells.size());
  for (const auto& cell : layer_cells) {
    Cell global(cell.size());
    for (std::size_t k = 0; k < cell.size(); ++k) global[k] = vertex(layer, cell[k]);
    out.push_back(std::move(global));
  }
  return out;
}

void LayeredMesh::finalize() {
  const Index n = vertex_count();
  if (vertices.size() != n * dimension) throw ValidationError("mesh: vertex array size mismatch");
  vertex_simplices.assign(static_cast<std::size_t>(n), {});
  for (Index s = 0; s < simplex_count(); ++s) {
    const auto& simplex = simplices[s];
    if (static_cast<int>(simplex.size()) != dimension + 1)
      throw ValidationError("mesh: simplex " + std::to_string(s) + " has the wrong vertex count");
    for (Index v : simplex) {
      if (v < 0 || v >= n) throw ValidationError("mesh: simplex index out of range");
      vertex_simplices[v].push_back(s);
    }
  }
  if (simplex_prism.size() != simplices.size()) throw ValidationError("mesh: prism map size mismatch");
  for (Index p : simplex_prism)
    if (p < 0 || p >= static_cast<Index>(prisms.size())) throw ValidationError("mesh: prism index out of range");
}

std::array<std::array<Index, 4>, 3> split_prism(const std::array<Index, 6>& v) {
  // Renumbering that moves the smallest vertex to position 0 while keeping
  // the prism structure (bottom i <-> top i+3).
  static constexpr int kRenumber[6][6] = {{0, 1, 2, 3, 4, 5}, {1, 2, 0, 4, 5, 3}, {2, 0, 1, 5, 3, 4},
                                          {3, 5, 4, 0, 2, 1}, {4, 3, 5, 1, 0, 2}, {5, 4, 3, 2, 1, 0}};
  const int first = static_cast<int>(std::min_element(v.begin(), v.end()) - v.begin());
  std::array<Index, 6> r{};
  for (int k = 0; k < 6; ++k) r[k] = v[kRenumber[first][k]];
  if (std::min(r[1], r[5]) < std::min(r[2], r[4])) {
    return {{{r[0], r[1], r[2], r[5]}, {r[0], r[1], r[5], r[4]}, {r[0], r[4], r[5], r[3]}}};
  }
  return {{{r[0], r[1], r[2], r[4]}, {r[0], r[4], r[2], r[5]}, {r[0], r[4], r[5], r[3]}}};
}

PrismSplit split_prisms(int dim, const std::vector<Cell>& cells, Index points_per_layer, int layers) {
  if (dim != 2 && dim != 3) throw ValidationError("split_prisms: dimension must be 2 or 3");
  if (layers < 2) throw ValidationError("split_prisms: at least two layers are required");
  // Pattern between layers 0 and 1.
  std::vector<Cell> pattern;
  std::vector<Index> pattern_cell;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Cell& cell = cells[c];
    if (static_cast<int>(cell.size()) != dim) throw ValidationError("split_prisms: layer cell has the wrong size");
    for (Index v : cell)
      if (v < 0 || v >= points_per_layer) throw ValidationError("split_prisms: cell index out of range");
    if (dim == 2) {
      const Index a = cell[0], b = cell[1], c_ = cell[0] + points_per_layer, e = cell[1] + points_per_layer;
      if (a < b) {
        pattern.push_back({a, b, e});
        pattern.push_back({a, e, c_});
      } else {
        pattern.push_back({a, b, c_});
        pattern.push_back({b, e, c_});
      }
      pattern_cell.push_back(static_cast<Index>(c));
      pattern_cell.push_back(static_cast<Index>(c));
    } else {
      const std::array<Index, 6> prism = {cell[0], cell[1], cell[2], cell[0] + points_per_layer,
                                          cell[1] + points_per_layer, cell[2] + points_per_layer};
      for (const auto& tet : split_prism(prism)) {
        pattern.push_back(Cell(tet.begin(), tet.end()));
        pattern_cell.push_back(static_cast<Index>(c));
      }
    }
  }

  PrismSplit out;
  const Index ncells = static_cast<Index>(cells.size());
  for (int layer = 0; layer + 1 < layers; ++layer) {
    const Index offset = layer * points_per_layer;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      Prism prism;
      prism.layer = layer;
      for (Index v : cells[c]) {
        prism.bottom.push_back(v + offset);
        prism.top.push_back(v + offset + points_per_layer);
      }
      out.prisms.push_back(std::move(prism));
    }
    for (std::size_t s = 0; s < pattern.size(); ++s) {
      Cell simplex = pattern[s];
      for (Index& v : simplex) v += offset;
      out.simplices.push_back(std::move(simplex));
      out.simplex_prism.push_back(layer * ncells + pattern_cell[s]);
    }
  }
  return out;
}

LayeredMesh build_layered_template(const Field& base, int dim, const std::vector<Cell>& cells,
                                   const TransversalRule& rule, int layers) {
  if (dim != 2 && dim != 3) throw ValidationError("template: dimension must be 2 or 3");
  if (layers < 2) throw ValidationError("template: layer count must be >= 2");
  if (base.size() % dim != 0) throw ValidationError("template: base array size is not a multiple of d");
  const Index n = base.size() / dim;
  if (n < dim + 1) throw ValidationError("template: need at least d+1 points per layer");
  if (cells.empty()) throw ValidationError("template: empty layer connectivity");

  LayeredMesh mesh;
  mesh.dimension = dim;
  mesh.layers = layers;
  mesh.points_per_layer = n;
  mesh.layer_cells = cells;
  mesh.vertices.resize(layers * n * dim);
  for (int layer = 0; layer < layers; ++layer) {
    for (Index i = 0; i < n; ++i) {
      SmallVec p = point(base, i, dim);
      if (layer > 0) {
        const SmallVec shift = rule(layer, i);
        if (shift.size() != dim) throw ValidationError("template: transversal rule returned wrong dimension");
        p += shift;
      }
      point(mesh.vertices, mesh.vertex(layer, i), dim) = p;
    }
  }
  if (!mesh.vertices.allFinite()) throw ValidationError("template: non-finite vertex coordinates");

  PrismSplit split = split_prisms(dim, cells, n, layers);
  mesh.simplices = std::move(split.simplices);
  mesh.simplex_prism = std::move(split.simplex_prism);
  mesh.prisms = std::move(split.prisms);
  mesh.bottom_elements = mesh.layer_elements(0);
  mesh.top_elements = mesh.layer_elements(layers - 1);

  // Orient every simplex positively and reject flat ones.
  for (Index s = 0; s < mesh.simplex_count(); ++s) {
    auto& simplex = mesh.simplices[s];
    const VertexBlock block = gather(mesh.vertices, simplex, dim);
    const double det = edge_matrix(block).determinant();
    if (std::abs(det) <= degeneracy_tolerance(block))
      throw DegenerateSimplexError(static_cast<std::size_t>(s), "degenerate simplex in layered template");
    if (det < 0) std::swap(simplex[dim - 1], simplex[dim]);
  }
  // Orient base normals toward the next layer.
  for (auto& prism : mesh.prisms) {
    SmallVec side = SmallVec::Zero(dim);
    for (std::size_t k = 0; k < prism.bottom.size(); ++k)
      side += point(mesh.vertices, prism.top[k], dim) - point(mesh.vertices, prism.bottom[k], dim);
    prism.orientation = cell_normal(mesh.vertices, prism.bottom, dim).dot(side) >= 0.0 ? 1.0 : -1.0;
  }
  mesh.finalize();
  return mesh;
}

LayeredMesh build_layered_template(const Field& base_curve, const TransversalRule& rule, int layers) {
  const Index n = base_curve.size() / 2;
  std::vector<Cell> cells;
  for (Index i = 0; i + 1 < n; ++i) cells.push_back({i, i + 1});
  return build_layered_template(base_curve, 2, cells, rule, layers);
}

VertexBlock gather(const Field& f, const Cell& cell, int dim) {
  VertexBlock block(static_cast<Index>(cell.size()), dim);
  for (std::size_t k = 0; k < cell.size(); ++k) block.row(static_cast<Index>(k)) = point(f, cell[k], dim).transpose();
  return block;
}

SmallMat edge_matrix(const VertexBlock& q) {
  const Index d = q.cols();
  SmallMat edges(d, d);
  for (Index k = 0; k < d; ++k) edges.col(k) = (q.row(k + 1) - q.row(0)).transpose();
  return edges;
}

double degeneracy_tolerance(const VertexBlock& q) {
  double longest = 0.0;
  for (Index a = 0; a < q.rows(); ++a)
    for (Index b = a + 1; b < q.rows(); ++b) longest = std::max(longest, (q.row(a) - q.row(b)).norm());
  return 1e-14 * std::pow(longest, static_cast<double>(q.cols()));
}

SmallMat simplex_gradient(const VertexBlock& q, const VertexBlock& u) {
  const Index d = q.cols();
  if (q.rows() != d + 1 || u.rows() != d + 1 || u.cols() != d)
    throw ValidationError("simplex_gradient: expected (d+1) x d blocks");
  const SmallMat edges = edge_matrix(q);
  const double det = edges.determinant();
  if (std::abs(det) <= degeneracy_tolerance(q)) throw DegenerateSimplexError(0, "simplex_gradient on a flat simplex");
  return edge_matrix(u) * edges.inverse();
}

double simplex_volume(const VertexBlock& q) { return std::abs(edge_matrix(q).determinant()) / factorial(static_cast<int>(q.cols())); }

SimplexGeometry simplex_geometry(const LayeredMesh& mesh, const Field& q, Index simplex) {
  const int d = mesh.dimension;
  const VertexBlock block = gather(q, mesh.simplices[simplex], d);
  SimplexGeometry g;
  g.edges = edge_matrix(block);
  g.det = g.edges.determinant();
  if (std::abs(g.det) <= degeneracy_tolerance(block))
    throw DegenerateSimplexError(static_cast<std::size_t>(simplex), "flat simplex");
  g.inverse = g.edges.inverse();
  g.volume = std::abs(g.det) / factorial(d);
  return g;
}

void scatter_edge_gradient(const SmallMat& dq, const Cell& cell, int dim, Field& out) {
  for (int k = 0; k < dim; ++k) {
    point(out, cell[k + 1], dim) += dq.col(k);
    point(out, cell[0], dim) -= dq.col(k);
  }
}

SimplexFrame prism_frame(const LayeredMesh& mesh, const Field& q, Index p) {
  const int d = mesh.dimension;
  const Prism& prism = mesh.prisms[p];
  const SmallVec n1 = normalized_or_throw(cell_normal(q, prism.bottom, d), p, "bottom base") * prism.orientation;
  const SmallVec n2 = normalized_or_throw(cell_normal(q, prism.top, d), p, "top base") * prism.orientation;
  SmallVec sides = SmallVec::Zero(d);
  for (std::size_t k = 0; k < prism.bottom.size(); ++k)
    sides += normalized_or_throw(point(q, prism.top[k], d) - point(q, prism.bottom[k], d), p, "side");
  return {normalized_or_throw(n1 + n2, p, "normal sum"), normalized_or_throw(sides, p, "transversal sum")};
}

std::vector<SimplexFrame> prism_frames(const LayeredMesh& mesh, const Field& q) {
  std::vector<SimplexFrame> frames;
  frames.reserve(mesh.prisms.size());
  for (Index p = 0; p < static_cast<Index>(mesh.prisms.size()); ++p) frames.push_back(prism_frame(mesh, q, p));
  return frames;
}

std::vector<SimplexFrame> simplex_frames(const LayeredMesh& mesh, const Field& q) {
  const auto per_prism = prism_frames(mesh, q);
  std::vector<SimplexFrame> frames;
  frames.reserve(mesh.simplices.size());
  for (Index p : mesh.simplex_prism) frames.push_back(per_prism[p]);
  return frames;
}

void frame_pullback(const LayeredMesh& mesh, const Field& q, Index p, const SmallVec& g_normal,
                    const SmallVec& g_transversal, Field& out) {
  const int d = mesh.dimension;
  const Prism& prism = mesh.prisms[p];

  const SmallVec c1 = cell_normal(q, prism.bottom, d);
  const SmallVec c2 = cell_normal(q, prism.top, d);
  const SmallVec n1 = c1.normalized() * prism.orientation;
  const SmallVec n2 = c2.normalized() * prism.orientation;
  const SmallVec g_sum = normalize_pullback(n1 + n2, g_normal);
  cell_normal_pullback(q, prism.bottom, d, normalize_pullback(c1, g_sum) * prism.orientation, out);
  cell_normal_pullback(q, prism.top, d, normalize_pullback(c2, g_sum) * prism.orientation, out);

  SmallVec sides = SmallVec::Zero(d);
  for (std::size_t k = 0; k < prism.bottom.size(); ++k)
    sides += (point(q, prism.top[k], d) - point(q, prism.bottom[k], d)).normalized();
  const SmallVec g_sides = normalize_pullback(sides, g_transversal);
  for (std::size_t k = 0; k < prism.bottom.size(); ++k) {
    const SmallVec side = point(q, prism.top[k], d) - point(q, prism.bottom[k], d);
    const SmallVec g = normalize_pullback(side, g_sides);
    point(out, prism.top[k], d) += g;
    point(out, prism.bottom[k], d) -= g;
  }
}

Index first_inverted_simplex(const LayeredMesh& mesh, const Field& q) {
  const int d = mesh.dimension;
  for (Index s = 0; s < mesh.simplex_count(); ++s) {
    const VertexBlock block = gather(q, mesh.simplices[s], d);
    if (!block.allFinite()) return s;
    if (!(edge_matrix(block).determinant() > degeneracy_tolerance(block))) return s;
  }
  return -1;
}

}  // namespace yankflow::mesh
