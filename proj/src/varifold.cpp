#include "yankflow/varifold.hpp"

#include "yankflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <span>

namespace yankflow::varifold {

namespace {

// 1 / ((d-1)!)^2: converts |c||c'| into measure products.
double measure_scale(int d) { return d == 2 ? 1.0 : 0.25; }

struct RawElement {
  SmallVec centroid;
  SmallVec normal;  // cell_normal, length (d-1)! * measure
  double length = 0.0;
};

std::vector<RawElement> raw_elements(const BoundarySurface& s) {
  s.validate();
  const int d = s.dimension;
  std::vector<RawElement> out;
  out.reserve(s.elements.size());
  for (std::size_t e = 0; e < s.elements.size(); ++e) {
    const auto& cell = s.elements[e];
    RawElement raw;
    raw.centroid = SmallVec::Zero(d);
    for (Index v : cell) raw.centroid += point(s.vertices, v, d);
    raw.centroid /= static_cast<double>(cell.size());
    raw.normal = mesh::cell_normal(s.vertices, cell, d);
    raw.length = raw.normal.norm();
    if (!(raw.length > 0.0))
      throw DegenerateSimplexError(e, "varifold: zero-measure surface element");
    out.push_back(std::move(raw));
  }
  return out;
}

double pair_term(const RawElement& a, const RawElement& b, double inv_tau2) {
  const double s = (a.centroid - b.centroid).squaredNorm() * inv_tau2;
  const double dot = a.normal.dot(b.normal);
  const double k = 1.0 / ((1.0 + s) * (1.0 + s));
  return k * dot * dot / (a.length * b.length);
}

double product(const std::vector<RawElement>& a, const std::vector<RawElement>& b, double tau, int d) {
  const double inv_tau2 = 1.0 / (tau * tau);
  double total = 0.0;
  for (const auto& ea : a) {
    double row = 0.0;
    for (const auto& eb : b) row += pair_term(ea, eb, inv_tau2);
    total += row;
  }
  return total * measure_scale(d);
}

// Strict weak order on surfaces, used to fix the summation order.
bool canonical_less(const BoundarySurface& a, const BoundarySurface& b) {
  if (a.elements.size() != b.elements.size()) return a.elements.size() < b.elements.size();
  if (a.vertices.size() != b.vertices.size()) return a.vertices.size() < b.vertices.size();
  const std::span<const double> va(a.vertices.data(), static_cast<std::size_t>(a.vertices.size()));
  const std::span<const double> vb(b.vertices.data(), static_cast<std::size_t>(b.vertices.size()));
  if (!std::equal(va.begin(), va.end(), vb.begin()))
    return std::lexicographical_compare(va.begin(), va.end(), vb.begin(), vb.end());
  return std::lexicographical_compare(a.elements.begin(), a.elements.end(), b.elements.begin(), b.elements.end());
}

// Adds d/d(elements of a) of sum_{ea, eb} pair_term(ea, eb), scaled by `weight`.
void accumulate_gradient(const BoundarySurface& sa, const std::vector<RawElement>& a, const std::vector<RawElement>& b,
                         double tau, double weight, Field& out) {
  const int d = sa.dimension;
  const double inv_tau2 = 1.0 / (tau * tau);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const RawElement& ea = a[i];
    SmallVec g_centroid = SmallVec::Zero(d);
    SmallVec g_normal = SmallVec::Zero(d);
    for (const RawElement& eb : b) {
      const SmallVec diff = ea.centroid - eb.centroid;
      const double s = diff.squaredNorm() * inv_tau2;
      const double k = 1.0 / ((1.0 + s) * (1.0 + s));
      const double dk = -2.0 / ((1.0 + s) * (1.0 + s) * (1.0 + s));
      const double dot = ea.normal.dot(eb.normal);
      const double lengths = ea.length * eb.length;
      const double binet = dot * dot / lengths;
      g_centroid += (dk * binet * 2.0 * inv_tau2) * diff;
      g_normal += k * ((2.0 * dot / lengths) * eb.normal - (dot * dot / (lengths * ea.length * ea.length)) * ea.normal);
    }
    const double scale = weight * measure_scale(d);
    const auto& cell = sa.elements[i];
    for (Index v : cell) point(out, v, d) += scale * g_centroid / static_cast<double>(cell.size());
    mesh::cell_normal_pullback(sa.vertices, cell, d, scale * g_normal, out);
  }
}

}  // namespace

void BoundarySurface::validate() const {
  if (dimension != 2 && dimension != 3) throw ValidationError("surface: dimension must be 2 or 3");
  if (vertices.size() % dimension != 0) throw ValidationError("surface: vertex array size mismatch");
  if (elements.empty()) throw ValidationError("surface: no elements");
  if (!vertices.allFinite()) throw ValidationError("surface: non-finite coordinates");
  const Index n = vertex_count();
  for (const auto& cell : elements) {
    if (static_cast<int>(cell.size()) != dimension) throw ValidationError("surface: element has the wrong size");
    for (Index v : cell)
      if (v < 0 || v >= n) throw ValidationError("surface: element index out of range");
  }
}

void VarifoldConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("varifold tau must be > 0");
}

double cauchy_kernel(double t) {
  const double base = 1.0 + t * t;
  return 1.0 / (base * base);
}

std::vector<ElementData> element_data(const BoundarySurface& surface) {
  const double scale = surface.dimension == 2 ? 1.0 : 0.5;
  std::vector<ElementData> out;
  for (const auto& raw : raw_elements(surface))
    out.push_back({raw.centroid, raw.normal / raw.length, raw.length * scale});
  return out;
}

double varifold_product(const BoundarySurface& a, const BoundarySurface& b, const VarifoldConfig& cfg) {
  cfg.validate();
  if (a.dimension != b.dimension) throw ValidationError("varifold: dimension mismatch");
  if (canonical_less(b, a)) return product(raw_elements(b), raw_elements(a), cfg.tau, a.dimension);
  return product(raw_elements(a), raw_elements(b), cfg.tau, a.dimension);
}

double discrepancy(const BoundarySurface& s, const BoundarySurface& target, const VarifoldConfig& cfg) {
  return varifold_product(s, s, cfg) - 2.0 * varifold_product(s, target, cfg) +
         varifold_product(target, target, cfg);
}

Field discrepancy_gradient(const BoundarySurface& s, const BoundarySurface& target, const VarifoldConfig& cfg) {
  cfg.validate();
  if (s.dimension != target.dimension) throw ValidationError("varifold: dimension mismatch");
  const auto own = raw_elements(s);
  const auto other = raw_elements(target);
  Field grad = Field::Zero(s.vertices.size());
  accumulate_gradient(s, own, own, cfg.tau, 2.0, grad);
  accumulate_gradient(s, own, other, cfg.tau, -2.0, grad);
  return grad;
}

BoundarySurface layer_surface(const mesh::LayeredMesh& mesh, const Field& q, int layer) {
  if (layer < 0 || layer >= mesh.layers) throw ValidationError("layer index out of range");
  const int d = mesh.dimension;
  BoundarySurface s;
  s.dimension = d;
  s.vertices = q.segment(mesh.vertex(layer, 0) * d, mesh.points_per_layer * d);
  s.elements = mesh.layer_cells;
  return s;
}

}  // namespace yankflow::varifold
