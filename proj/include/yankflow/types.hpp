#pragma once

#include <Eigen/Dense>

#include <span>

namespace yankflow {

using Index = Eigen::Index;

// Vertex fields (positions, velocities, covectors) are stored flattened in
// vertex-major order: component a of vertex i lives at entry i*d + a.
using Field = Eigen::VectorXd;

// Small per-simplex blocks; the fixed upper bounds keep them off the heap.
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
// (d+1) x d array of vertex rows for one simplex.
using VertexBlock = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 3>;

inline auto point(const Field& f, Index i, int d) { return f.segment(i * d, d); }
inline auto point(Field& f, Index i, int d) { return f.segment(i * d, d); }

}  // namespace yankflow
