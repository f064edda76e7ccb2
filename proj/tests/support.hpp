#pragma once

#include "yankflow/dynamics.hpp"
#include "yankflow/templates.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace yankflow::testing {

using Rng = std::mt19937_64;

inline Eigen::VectorXd random_vector(Index n, double scale, Rng& rng) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

inline double uniform(double lo, double hi, Rng& rng) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

/// Flat layered slab with jittered vertices (still positively oriented for small noise).
inline mesh::LayeredMesh jittered_slab(int dim, Index points, int layers, double noise, Rng& rng, double skew = 0.1) {
  mesh::FlatTemplate spec;
  spec.dimension = dim;
  spec.points = points;
  spec.layers = layers;
  spec.skew = skew;
  spec.height = 0.6;
  mesh::LayeredMesh m = mesh::build_flat_template(spec);
  const double spacing = 1.0 / static_cast<double>(points - 1);
  m.vertices += random_vector(m.vertices.size(), noise * spacing, rng);
  return m;
}

/// Central finite-difference gradient.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                   double h) {
  Eigen::VectorXd g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

/// Fourth-order central finite-difference gradient.
inline Eigen::VectorXd fd_gradient4(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                    double h) {
  Eigen::VectorXd g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    auto at = [&](double step) {
      Eigen::VectorXd y = x;
      y[i] += step;
      return f(y);
    };
    g[i] = (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
  }
  return g;
}

/// Sixth-order central differences.
inline Eigen::VectorXd fd_gradient6(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                    double h) {
  Eigen::VectorXd g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    auto at = [&](double step) {
      Eigen::VectorXd y = x;
      y[i] += step;
      return f(y);
    };
    g[i] = (45.0 * (at(h) - at(-h)) - 9.0 * (at(2.0 * h) - at(-2.0 * h)) + (at(3.0 * h) - at(-3.0 * h))) / (60.0 * h);
  }
  return g;
}

/// Largest per-coordinate relative error. Coordinates whose reference value
/// is negligible against the whole gradient are measured against 1e-6 of its
/// largest entry instead of their own magnitude.
inline double max_relative_error(const Eigen::VectorXd& value, const Eigen::VectorXd& reference) {
  const double floor = 1e-6 * std::max(reference.lpNorm<Eigen::Infinity>(), 1e-300);
  double worst = 0.0;
  for (Index i = 0; i < value.size(); ++i)
    worst = std::max(worst, std::abs(value[i] - reference[i]) / std::max(std::abs(reference[i]), floor));
  return worst;
}

inline double relative_difference(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace yankflow::testing
