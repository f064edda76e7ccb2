#pragma once

#include "yankflow/mesh.hpp"

#include <string>

namespace yankflow::mesh {

/// Layers stacked by normal displacement around the middle curve
/// y = 0.25 cos(2.5 (x - 0.1)) + 0.6 on [x_min, x_max].
struct SineTemplate {
  Index points = 60;
  int layers = 5;
  double step = 0.05;
  double x_min = 0.0;
  double x_max = 3.0;
};

double sine_middle_curve(double x);
LayeredMesh build_sine_template(const SineTemplate& spec);

/// Layered structure (x, nu/20 (20 + sin 6x + sin(10x)/2 + sin 14x + 0.3 sin 18x))
/// sampled at nu = l / (layers - 1).
struct MixSinTemplate {
  Index points = 60;
  int layers = 5;
  double x_min = 0.0;
  double x_max = 3.0;
};

double mixsin_structure(double nu, double x);
LayeredMesh build_mixsin_template(const MixSinTemplate& spec);

/// Flat slab [0, width] (x [0, depth] in 3D) x [0, height] with straight
/// transversals (skew, 1) (or (skew, 0, 1) in 3D).
struct FlatTemplate {
  int dimension = 2;
  Index points = 11;  // per side of the bottom grid
  int layers = 3;
  double width = 1.0;
  double depth = 1.0;
  double height = 1.0;
  double skew = 0.0;
};

LayeredMesh build_flat_template(const FlatTemplate& spec);

}  // namespace yankflow::mesh
