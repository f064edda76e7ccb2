#include "yankflow/kernel.hpp"

#include "yankflow/errors.hpp"

#include <cmath>
#include <random>

namespace yankflow::kernel {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> as_rows(const Field& f, int dim) {
  return {f.data(), f.size() / dim, dim};
}

}  // namespace

void KernelConfig::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("kernel sigma must be > 0");
  if (!(jitter >= 0.0) || !std::isfinite(jitter)) throw ValidationError("kernel jitter must be >= 0");
}

double matern3(double t) {
  if (!(t >= 0.0)) throw DomainError("matern3: argument must be nonnegative");
  return (1.0 + t + 2.0 * t * t / 15.0 + t * t * t / 15.0) * std::exp(-t);
}

double matern3_derivative(double t) {
  if (!(t >= 0.0)) throw DomainError("matern3_derivative: argument must be nonnegative");
  return -(t / 15.0) * (t * t - t + 11.0) * std::exp(-t);
}

KernelMatrix::KernelMatrix(const Field& points, int dim, const KernelConfig& cfg) : dim_(dim) {
  cfg.validate();
  if (dim != 2 && dim != 3) throw ValidationError("kernel: dimension must be 2 or 3");
  if (points.size() == 0 || points.size() % dim != 0)
    throw ValidationError("kernel: point array size must be a positive multiple of the dimension");
  if (!points.allFinite()) throw ValidationError("kernel: non-finite coordinates");
  const auto q = as_rows(points, dim);
  const Index n = q.rows();
  scalar_.resize(n, n);
  const double inv_sigma = 1.0 / cfg.sigma;
  for (Index i = 0; i < n; ++i) {
    scalar_(i, i) = 1.0 + cfg.jitter;
    for (Index j = i + 1; j < n; ++j) {
      const double value = matern3((q.row(i) - q.row(j)).norm() * inv_sigma);
      scalar_(i, j) = value;
      scalar_(j, i) = value;
    }
  }
}

Eigen::MatrixXd KernelMatrix::entries() const {
  const Index n = size();
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(n * dim_, n * dim_);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (int a = 0; a < dim_; ++a) full(i * dim_ + a, j * dim_ + a) = scalar_(i, j);
  return full;
}

Field KernelMatrix::apply(const Field& x) const {
  if (x.size() != size() * dim_) throw ValidationError("kernel apply: size mismatch");
  Field out(x.size());
  Eigen::Map<RowMajor>(out.data(), size(), dim_).noalias() = scalar_ * as_rows(x, dim_);
  return out;
}

void KernelMatrix::factorize() {
  if (chol_) return;
  Eigen::LLT<Eigen::MatrixXd> llt(scalar_);
  if (llt.info() != Eigen::Success)
    throw FactorizationError("kernel matrix is not positive definite (duplicate points?)");
  chol_ = std::move(llt);
}

Field KernelMatrix::solve(const Field& x) const {
  if (!chol_) throw FactorizationError("kernel matrix has not been factorized");
  if (x.size() != size() * dim_) throw ValidationError("kernel solve: size mismatch");
  Field out(x.size());
  Eigen::Map<RowMajor>(out.data(), size(), dim_) = chol_->solve(RowMajor(as_rows(x, dim_)));
  return out;
}

Eigen::MatrixXd KernelMatrix::inverse_scalar() const {
  if (!chol_) throw FactorizationError("kernel matrix has not been factorized");
  return chol_->solve(Eigen::MatrixXd::Identity(size(), size()));
}

Eigen::MatrixXd KernelMatrix::factor() const {
  if (!chol_) throw FactorizationError("kernel matrix has not been factorized");
  return chol_->matrixL();
}

Field KernelMatrix::apply_factor(const Field& x) const {
  if (!chol_) throw FactorizationError("kernel matrix has not been factorized");
  if (x.size() != size() * dim_) throw ValidationError("kernel factor: size mismatch");
  Field out(x.size());
  Eigen::Map<RowMajor>(out.data(), size(), dim_).noalias() = chol_->matrixL() * as_rows(x, dim_);
  return out;
}

Field KernelMatrix::apply_factor_transpose(const Field& x) const {
  if (!chol_) throw FactorizationError("kernel matrix has not been factorized");
  if (x.size() != size() * dim_) throw ValidationError("kernel factor: size mismatch");
  Field out(x.size());
  Eigen::Map<RowMajor>(out.data(), size(), dim_).noalias() = chol_->matrixU() * as_rows(x, dim_);
  return out;
}

KernelMatrix kernel_matrix(const Field& points, int dim, const KernelConfig& cfg) {
  return KernelMatrix(points, dim, cfg);
}

void check_psd(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw ValidationError("elastic operator must be square");
  const double scale = a.norm();
  if (scale == 0.0) return;
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(a.rows());
  for (int probe = 0; probe < 16; ++probe) {
    for (Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
    if (v.dot(a * v) < -1e-8 * scale * v.squaredNorm())
      throw ValidationError("elastic operator failed the positive semidefinite probe");
  }
}

VelocityOperator::VelocityOperator(KernelMatrix kernel, const Eigen::MatrixXd& elastic, double omega)
    : kernel_(std::move(kernel)), elastic_(elastic), omega_(omega) {
  if (!(omega > 0.0)) throw ValidationError("omega must be > 0");
  const Index n = kernel_.size();
  const int d = kernel_.dim();
  if (elastic.rows() != n * d || elastic.cols() != n * d)
    throw ValidationError("elastic operator size does not match the kernel matrix");
  check_psd(elastic);
  kernel_.factorize();
  // In coordinate-major order the factor is block diagonal with d copies of L.
  const Eigen::MatrixXd ls = kernel_.factor();
  const Index nd = n * d;
  Eigen::MatrixXd coord(nd, nd);
  for (Index i = 0; i < n; ++i)
    for (int a = 0; a < d; ++a)
      for (Index j = 0; j < n; ++j)
        for (int b = 0; b < d; ++b) coord(a * n + i, b * n + j) = elastic(i * d + a, j * d + b);
  for (int b = 0; b < d; ++b)
    coord.middleCols(b * n, n) = (coord.middleCols(b * n, n) * ls.triangularView<Eigen::Lower>()).eval();
  for (int a = 0; a < d; ++a)
    coord.middleRows(a * n, n) = (ls.transpose().triangularView<Eigen::Upper>() * coord.middleRows(a * n, n)).eval();
  Eigen::MatrixXd middle(nd, nd);
  for (Index i = 0; i < n; ++i)
    for (int a = 0; a < d; ++a)
      for (Index j = 0; j < n; ++j)
        for (int b = 0; b < d; ++b) middle(i * d + a, j * d + b) = coord(a * n + i, b * n + j);
  middle = 0.5 * (middle + middle.transpose()).eval();
  middle.diagonal().array() += omega;
  chol_.compute(middle);
  if (chol_.info() != Eigen::Success)
    throw FactorizationError("omega I + L'AL is not positive definite");
}

Field VelocityOperator::solve(const Field& rhs) const {
  if (rhs.size() != kernel_.size() * kernel_.dim())
    throw ValidationError("velocity solve: size mismatch");
  return kernel_.apply_factor(chol_.solve(kernel_.apply_factor_transpose(rhs)));
}

Field VelocityOperator::kernel_inverse_solution(const Field& rhs, const Field& v) const {
  return (rhs - elastic_ * v) / omega_;
}

Field solve_velocity(const KernelMatrix& kernel, const Eigen::MatrixXd& elastic, const Field& rhs,
                     double omega) {
  return VelocityOperator(kernel, elastic, omega).solve(rhs);
}

Field kernel_pairing_gradient(const Field& points, int dim, const KernelConfig& cfg, const Field& a,
                              const Field& b) {
  cfg.validate();
  const Index n = points.size() / dim;
  if (a.size() != points.size() || b.size() != points.size())
    throw ValidationError("kernel pairing gradient: size mismatch");
  const auto q = as_rows(points, dim);
  const auto ar = as_rows(a, dim);
  const auto br = as_rows(b, dim);
  RowMajor grad = RowMajor::Zero(n, dim);
  const double inv_sigma = 1.0 / cfg.sigma;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const Eigen::RowVectorXd diff = q.row(i) - q.row(j);
      const double dist = diff.norm();
      if (dist == 0.0) continue;  // kappa'(0) = 0
      const double coupling = ar.row(i).dot(br.row(j)) + ar.row(j).dot(br.row(i));
      const Eigen::RowVectorXd g =
          (coupling * matern3_derivative(dist * inv_sigma) * inv_sigma / dist) * diff;
      grad.row(i) += g;
      grad.row(j) -= g;
    }
  }
  return Eigen::Map<const Field>(grad.data(), n * dim);
}

}  // namespace yankflow::kernel
