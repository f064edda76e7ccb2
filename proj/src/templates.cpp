#include "yankflow/templates.hpp"

#include "yankflow/errors.hpp"

#include <cmath>

namespace yankflow::mesh {

namespace {

double lerp(double a, double b, Index i, Index n) {
  return n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
}

void require(bool ok, const char* message) {
  if (!ok) throw ValidationError(message);
}

}  // namespace

double sine_middle_curve(double x) { return 0.25 * std::cos(2.5 * (x - 0.1)) + 0.6; }

LayeredMesh build_sine_template(const SineTemplate& spec) {
  require(spec.points >= 3, "sine template: need at least 3 points per layer");
  require(spec.layers >= 2, "sine template: layer count must be >= 2");
  require(spec.step > 0.0 && spec.x_max > spec.x_min, "sine template: invalid step or range");
  const Index n = spec.points;
  Field base(2 * n);
  Field normals(2 * n);
  const double middle = 0.5 * (spec.layers - 1);
  for (Index i = 0; i < n; ++i) {
    const double x = lerp(spec.x_min, spec.x_max, i, n);
    const double slope = -0.625 * std::sin(2.5 * (x - 0.1));
    const double len = std::hypot(slope, 1.0);
    normals(2 * i) = -slope / len;
    normals(2 * i + 1) = 1.0 / len;
    base(2 * i) = x - middle * spec.step * normals(2 * i);
    base(2 * i + 1) = sine_middle_curve(x) - middle * spec.step * normals(2 * i + 1);
  }
  const double step = spec.step;
  return build_layered_template(
      base, [&](int layer, Index i) -> SmallVec { return layer * step * point(normals, i, 2); }, spec.layers);
}

double mixsin_structure(double nu, double x) {
  return nu / 20.0 * (20.0 + std::sin(6.0 * x) + 0.5 * std::sin(10.0 * x) + std::sin(14.0 * x) + 0.3 * std::sin(18.0 * x));
}

LayeredMesh build_mixsin_template(const MixSinTemplate& spec) {
  require(spec.points >= 3, "mixsin template: need at least 3 points per layer");
  require(spec.layers >= 2, "mixsin template: layer count must be >= 2");
  require(spec.x_max > spec.x_min, "mixsin template: invalid range");
  const Index n = spec.points;
  Field base(2 * n);
  for (Index i = 0; i < n; ++i) {
    base(2 * i) = lerp(spec.x_min, spec.x_max, i, n);
    base(2 * i + 1) = mixsin_structure(0.0, base(2 * i));
  }
  const int layers = spec.layers;
  return build_layered_template(
      base,
      [&](int layer, Index i) -> SmallVec {
        SmallVec shift(2);
        shift << 0.0, mixsin_structure(static_cast<double>(layer) / (layers - 1), base(2 * i));
        return shift;
      },
      layers);
}

LayeredMesh build_flat_template(const FlatTemplate& spec) {
  require(spec.dimension == 2 || spec.dimension == 3, "flat template: dimension must be 2 or 3");
  require(spec.points >= 2, "flat template: need at least 2 points per side");
  require(spec.layers >= 2, "flat template: layer count must be >= 2");
  require(spec.width > 0 && spec.depth > 0 && spec.height > 0, "flat template: extents must be positive");
  const int d = spec.dimension;
  const Index n = spec.points;
  const double dz = spec.height / (spec.layers - 1);
  const double skew = spec.skew;
  if (d == 2) {
    Field base(2 * n);
    for (Index i = 0; i < n; ++i) {
      base(2 * i) = lerp(0.0, spec.width, i, n);
      base(2 * i + 1) = 0.0;
    }
    return build_layered_template(
        base,
        [&](int layer, Index) -> SmallVec {
          SmallVec shift(2);
          shift << skew * layer * dz, layer * dz;
          return shift;
        },
        spec.layers);
  }
  Field base(3 * n * n);
  std::vector<Cell> cells;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      const Index v = j * n + i;
      base(3 * v) = lerp(0.0, spec.width, i, n);
      base(3 * v + 1) = lerp(0.0, spec.depth, j, n);
      base(3 * v + 2) = 0.0;
      if (i + 1 < n && j + 1 < n) {
        cells.push_back({v, v + 1, v + n + 1});
        cells.push_back({v, v + n + 1, v + n});
      }
    }
  return build_layered_template(
      base, 3, cells,
      [&](int layer, Index) -> SmallVec {
        SmallVec shift(3);
        shift << skew * layer * dz, 0.0, layer * dz;
        return shift;
      },
      spec.layers);
}

}  // namespace yankflow::mesh
