// Acceptance suite: one pass/fail line per criterion.
// Usage: acceptance [criterion numbers...]   (default: all)

#include "support.hpp"

#include "yankflow/elasticity.hpp"
#include "yankflow/errors.hpp"
#include "yankflow/inverse.hpp"
#include "yankflow/kernel.hpp"
#include "yankflow/varifold.hpp"
#include "yankflow/yank.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

using namespace yankflow;
using namespace yankflow::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

// Sine template with the layered operator and bottom/top targets generated
// by the forward model at theta = (1.5, 0.5, 2), r = 0.25.
dynamics::Problem sine_problem() {
  dynamics::Problem p;
  p.mesh = mesh::build_sine_template({});
  p.elastic.model = elasticity::Model::layered;
  p.elastic.lambda_tan = 0.0;
  p.elastic.mu_tan = p.elastic.mu_tsv = p.elastic.mu_ang = 1.0;
  p.kernel.sigma = 0.2;
  p.varifold.tau = 0.3;
  p.solver.final_time = 1.0;
  p.solver.steps = 10;
  yank::PotentialParams truth;
  truth.center = Eigen::Vector2d(1.5, 0.5);
  truth.height = 2.0;
  truth.radius = 0.25;
  const Field q_final = dynamics::forward_flow(p, truth, false).states.back();
  for (int l : {0, p.mesh.layers - 1}) p.targets.push_back({l, varifold::layer_surface(p.mesh, q_final, l)});
  return p;
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const dynamics::Problem p = sine_problem();
  inverse::OptimizerConfig cfg;
  cfg.n_starts = 8;
  cfg.rng_seed = 1;
  const auto result = inverse::solve_parametric(p, 0.25, cfg);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double err = (result.theta.theta() - Eigen::Vector3d(1.5, 0.5, 2.0)).lpNorm<Eigen::Infinity>();
  return {err <= 1e-2 && seconds < 600.0,
          fmt("|theta*-theta_true|_inf = %.3e (<= 1e-2), f* = %.3e, %.1f s (< 600 s)", err, result.f, seconds)};
}

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  const dynamics::Problem p = sine_problem();
  inverse::OptimizerConfig cfg;
  cfg.n_starts = 8;
  cfg.rng_seed = 2;
  std::vector<double> radii;
  for (int i = 0; i < 7; ++i) radii.push_back(0.15 + 0.25 * i / 6.0);
  const auto sweep = inverse::radius_sweep(p, radii, cfg);
  std::vector<double> rs, hs;
  double drift = 0.0;
  bool ok = true;
  std::ostringstream points;
  for (const auto& s : sweep) {
    if (s.status != "ok") {
      ok = false;
      points << " r=" << s.radius << ":" << s.status;
      continue;
    }
    const Eigen::VectorXd th = s.result.theta.theta();
    drift = std::max(drift, (th.head<2>() - Eigen::Vector2d(1.5, 0.5)).lpNorm<Eigen::Infinity>());
    rs.push_back(s.radius);
    hs.push_back(th[2]);
    points << fmt(" (%.3f, h*=%.3f)", s.radius, th[2]);
  }
  double slope = 0.0;
  if (rs.size() >= 2 && *std::min_element(hs.begin(), hs.end()) > 0.0) slope = inverse::fit_loglog_slope(rs, hs);
  else ok = false;
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ok = ok && slope >= -3.0 && slope <= -1.8 && drift <= 0.05 && seconds < 3600.0;
  return {ok, fmt("slope = %.3f (in [-3, -1.8]), max center drift = %.3e (<= 0.05), %.1f s;", slope, drift, seconds) +
                  points.str()};
}

// Random small problem: slab of at most 40 vertices with bottom/top targets
// taken from a perturbed copy of the template.
dynamics::Problem random_problem(Rng& rng, int dim, int steps) {
  dynamics::Problem p;
  p.mesh = dim == 2 ? jittered_slab(2, 8, 4, 0.1, rng) : jittered_slab(3, 3, 3, 0.1, rng);
  p.elastic.model = uniform(0, 1, rng) < 0.5 ? elasticity::Model::isotropic : elasticity::Model::layered;
  p.elastic.lambda = uniform(0, 1, rng);
  p.elastic.mu = uniform(0.2, 1, rng);
  p.elastic.lambda_tan = uniform(0, 1, rng);
  p.elastic.mu_tan = uniform(0.2, 1, rng);
  p.elastic.mu_tsv = uniform(0.2, 1, rng);
  p.elastic.mu_ang = uniform(0.2, 1, rng);
  p.elastic.beta = uniform(0, 2, rng);
  p.kernel.sigma = uniform(0.2, 0.5, rng);
  p.varifold.tau = uniform(0.2, 0.5, rng);
  p.solver.omega = uniform(0.05, 0.5, rng);
  p.solver.steps = steps;
  const Field target = p.mesh.vertices + random_vector(p.mesh.vertices.size(), 0.03, rng);
  for (int l : {0, p.mesh.layers - 1}) p.targets.push_back({l, varifold::layer_surface(p.mesh, target, l)});
  return p;
}

dynamics::Control random_control(const dynamics::Problem& p, bool free, Rng& rng) {
  const int d = p.mesh.dimension;
  if (free) {
    yank::FreeYank y(p.solver.steps, p.mesh.simplex_count(), d);
    y.coefficients() = random_vector(y.coefficients().size(), 0.05, rng);
    return y;
  }
  yank::PotentialParams th;
  th.center = SmallVec(d);
  for (int a = 0; a < d; ++a) th.center[a] = uniform(0.3, 0.7, rng);
  th.center[d - 1] = uniform(0.2, 0.4, rng);
  th.height = uniform(0.1, 0.5, rng);
  th.radius = 0.35;
  // keep template centroids off the support sphere, where the potential is only C1
  const Field centroids = yank::template_centroids(p.mesh);
  for (Index s = 0; s < p.mesh.simplex_count(); ++s)
    if (std::abs((point(centroids, s, d) - th.center).norm() - th.radius) < 2e-3) return random_control(p, free, rng);
  return th;
}

Eigen::VectorXd control_vector(const dynamics::Control& c) {
  if (const auto* th = std::get_if<yank::PotentialParams>(&c)) return th->theta();
  return std::get<yank::FreeYank>(c).coefficients();
}

dynamics::Control with_vector(const dynamics::Control& c, const Eigen::VectorXd& x) {
  if (const auto* th = std::get_if<yank::PotentialParams>(&c)) return yank::PotentialParams::from_theta(x, th->radius);
  yank::FreeYank y = std::get<yank::FreeYank>(c);
  y.coefficients() = x;
  return y;
}

Outcome criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(3);
  const int steps[] = {1, 2, 5};
  double worst = 0.0;
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const bool free = trial % 2 == 1;
    const int dim = (trial / 2) % 2 == 0 ? 2 : 3;
    const dynamics::Problem p = random_problem(rng, dim, steps[trial % 3]);
    const dynamics::Control c = random_control(p, free, rng);
    const auto obj = dynamics::objective_gradient(p, c);
    const Eigen::VectorXd fd = fd_gradient6(
        [&](const Eigen::VectorXd& x) { return dynamics::objective_value(p, with_vector(c, x)).value; },
        control_vector(c), 3e-4);
    worst = std::max(worst, max_relative_error(obj.gradient, fd));
    checked += static_cast<int>(fd.size());
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst <= 1e-6 && seconds < 120.0,
          fmt("20 problems, %d coordinates, worst relative error %.2e (<= 1e-6), %.1f s (< 120 s)", checked, worst,
              seconds)};
}

Outcome criterion4() {
  Rng rng(4);
  bool ok = true;
  double grad_c = 0.0, grad_h = 0.0;
  for (int dim : {2, 3}) {
    dynamics::Problem p = random_problem(rng, dim, 5);
    for (bool free : {false, true}) {
      dynamics::Control c = random_control(p, free, rng);
      if (free) std::get<yank::FreeYank>(c).coefficients().setZero();
      else std::get<yank::PotentialParams>(c).height = 0.0;
      const auto traj = dynamics::forward_flow(p, c, true);
      ok = ok && (traj.states.back().array() == p.mesh.vertices.array()).all();
      const auto costate =
          dynamics::backward_costate(p, traj, c, dynamics::total_discrepancy_gradient(p, traj.states.back()));
      for (const Field& pk : costate.p) ok = ok && (pk.array() == costate.p.back().array()).all();
      if (!free) {
        grad_c = std::max(grad_c, dynamics::objective_gradient(p, c).gradient.head(dim).lpNorm<Eigen::Infinity>());
        // with the template itself as target the whole gradient vanishes
        dynamics::Problem self = p;
        for (auto& t : self.targets) t.surface = varifold::layer_surface(p.mesh, p.mesh.vertices, t.layer);
        grad_h = std::max(grad_h, dynamics::objective_gradient(self, c).gradient.lpNorm<Eigen::Infinity>());
      }
    }
  }
  ok = ok && grad_c == 0.0 && grad_h <= 1e-12;
  return {ok, fmt("q(T) == q0 bitwise and constant costate: %s; |df/dc| at h=0: %.1e; |grad| at h=0 with template "
                  "targets: %.1e",
                  ok ? "yes" : "no", grad_c, grad_h)};
}

Outcome criterion5() {
  Rng rng(5);
  double worst = 0.0;
  int checked = 0;
  auto check = [&](const dynamics::Problem& p, const dynamics::Control& c) {
    const auto traj = dynamics::forward_flow(p, c, true);
    for (std::size_t k = 0; k < traj.velocities.size(); ++k) {
      const Field& v = traj.velocities[k];
      const Field& j = traj.yanks[k];
      const auto& op = traj.operators[k];
      const double lhs = op.omega() * std::sqrt(std::max(0.0, v.dot(op.kernel_solve(v))));
      const double rhs = std::sqrt(std::max(0.0, j.dot(op.kernel().apply(j))));
      if (rhs > 0.0) worst = std::max(worst, lhs / rhs);
      else if (lhs > 0.0) worst = INFINITY;
      ++checked;
    }
  };
  for (int trial = 0; trial < 10; ++trial) {
    const dynamics::Problem p = random_problem(rng, trial % 2 == 0 ? 2 : 3, 5);
    check(p, random_control(p, trial % 3 == 0, rng));
  }
  dynamics::Problem sine = sine_problem();
  yank::PotentialParams truth;
  truth.center = Eigen::Vector2d(1.5, 0.5);
  truth.height = 2.0;
  check(sine, truth);
  return {worst <= 1.0 + 1e-10, fmt("%d steps, max omega*|v|_K^-1 / |j|_K = %.6f (<= 1 + 1e-10)", checked, worst)};
}

elasticity::ElasticParams random_params(Rng& rng, double beta) {
  elasticity::ElasticParams e;
  e.model = uniform(0, 1, rng) < 0.5 ? elasticity::Model::isotropic : elasticity::Model::layered;
  e.lambda = uniform(0, 2, rng);
  e.mu = uniform(0.1, 2, rng);
  e.lambda_tan = uniform(0, 2, rng);
  e.mu_tan = uniform(0.1, 2, rng);
  e.mu_tsv = uniform(0.1, 2, rng);
  e.mu_ang = uniform(0.1, 2, rng);
  e.beta = beta;
  return e;
}

mesh::LayeredMesh random_mesh(Rng& rng, int dim) {
  return dim == 2 ? jittered_slab(2, 5, 3, 0.15, rng, uniform(-0.3, 0.3, rng))
                  : jittered_slab(3, 3, 2 + (uniform(0, 1, rng) < 0.5), 0.15, rng, uniform(-0.3, 0.3, rng));
}

// smallest simplex volume relative to the mean
double shape_quality(const mesh::LayeredMesh& m) {
  double lo = INFINITY, total = 0.0;
  for (Index s = 0; s < m.simplex_count(); ++s) {
    const double v = mesh::simplex_geometry(m, m.vertices, s).volume;
    lo = std::min(lo, v);
    total += v;
  }
  return lo * static_cast<double>(m.simplex_count()) / total;
}

Outcome criterion6() {
  Rng rng(6);
  // PSD on 1000 random instances
  double min_ratio = INFINITY;
  for (int i = 0; i < 1000; ++i) {
    const auto m = random_mesh(rng, i % 2 == 0 ? 2 : 3);
    const auto e = random_params(rng, uniform(0, 2, rng));
    const Eigen::MatrixXd a = elasticity::assemble_operator(m, m.vertices, e);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a, Eigen::EigenvaluesOnly).eigenvalues();
    min_ratio = std::min(min_ratio, ev.minCoeff() / ev.cwiseAbs().maxCoeff());
  }
  const bool psd = min_ratio >= -1e-12;

  // rigid motions
  double rigid = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int d = i % 2 == 0 ? 2 : 3;
    const auto m = random_mesh(rng, d);
    const Index n = m.vertex_count();
    const auto e0 = random_params(rng, 0.0);
    const Field u = random_vector(m.vertices.size(), 1.0, rng);
    const double scale = elasticity::energy_form(m, m.vertices, e0, u, u);
    Field t(n * d), r(n * d);
    const SmallVec shift = random_vector(d, 1.0, rng);
    SmallMat skew = random_vector(d * d, 1.0, rng).reshaped(d, d);
    skew = (skew - skew.transpose()).eval();
    for (Index k = 0; k < n; ++k) {
      t.segment(k * d, d) = shift;
      r.segment(k * d, d) = skew * point(m.vertices, k, d);
    }
    rigid = std::max(rigid, std::abs(elasticity::energy_form(m, m.vertices, e0, t, t)) / scale);
    rigid = std::max(rigid, std::abs(elasticity::energy_form(m, m.vertices, e0, r, r)) / scale);
  }

  // finite-difference checks on 50 instances each
  double force = 0.0, shape = 0.0, dq = 0.0, dtheta = 0.0, drho = 0.0;
  for (int i = 0; i < 50; ++i) {
    const int d = i % 2 == 0 ? 2 : 3;
    auto m = random_mesh(rng, d);
    while (shape_quality(m) < 0.05) m = random_mesh(rng, d);
    const auto e = random_params(rng, uniform(0, 2, rng));
    const Field u = random_vector(m.vertices.size(), 1.0, rng);
    const Field w = random_vector(m.vertices.size(), 1.0, rng);

    force = std::max(force, max_relative_error(elasticity::elastic_force(m, m.vertices, e, w),
                                               fd_gradient6([&](const Field& x) {
                                                 return elasticity::energy_form(m, m.vertices, e, x, w);
                                               }, u, 1e-2)));
    shape = std::max(shape, max_relative_error(elasticity::shape_derivative(m, m.vertices, e, u, w),
                                               fd_gradient6([&](const Field& x) {
                                                 return elasticity::energy_form(m, x, e, u, w);
                                               }, m.vertices, 1e-4)));
    yank::PotentialParams th;
    th.center = SmallVec(d);
    for (int a = 0; a < d; ++a) th.center[a] = uniform(0.2, 0.8, rng);
    th.center[d - 1] = uniform(0.1, 0.5, rng);
    th.height = uniform(0.5, 2, rng);
    th.radius = uniform(0.3, 0.6, rng);
    const Field centroids = yank::template_centroids(m);
    bool near_kink = false;
    for (Index s = 0; s < m.simplex_count(); ++s)
      near_kink = near_kink || std::abs((point(centroids, s, d) - th.center).norm() - th.radius) < 2e-2;
    if (near_kink) {
      --i;
      continue;
    }
    dq = std::max(dq, max_relative_error(yank::dq_work(m, m.vertices, th, w), fd_gradient6([&](const Field& x) {
                                           return yank::work_form(m, x, th, w);
                                         }, m.vertices, 1e-4)));
    dtheta = std::max(dtheta, max_relative_error(yank::dtheta_work(m, m.vertices, th, w),
                                                 fd_gradient6([&](const Eigen::VectorXd& x) {
                                                   return yank::work_form(m, m.vertices,
                                                                          yank::PotentialParams::from_theta(x, th.radius), w);
                                                 }, th.theta(), 1e-3)));
    const auto target = varifold::layer_surface(m, m.vertices + random_vector(m.vertices.size(), 0.05, rng), 0);
    const auto surface = varifold::layer_surface(m, m.vertices, m.layers - 1);
    varifold::VarifoldConfig vc;
    vc.tau = uniform(0.2, 0.5, rng);
    drho = std::max(drho, max_relative_error(varifold::discrepancy_gradient(surface, target, vc),
                                             fd_gradient6([&](const Field& x) {
                                               varifold::BoundarySurface s = surface;
                                               s.vertices = x;
                                               return varifold::discrepancy(s, target, vc);
                                             }, surface.vertices, 1e-3)));
  }
  const double fd_worst = std::max({force, shape, dq, dtheta, drho});
  return {psd && rigid <= 1e-10 && fd_worst <= 1e-6,
          fmt("min eig/max eig over 1000 operators %.1e (>= -1e-12); rigid-motion energy %.1e; FD rel errors: force "
              "%.1e, shape %.1e, dq_work %.1e, dtheta_work %.1e, discrepancy %.1e (<= 1e-6)",
              min_ratio, rigid, force, shape, dq, dtheta, drho)};
}

varifold::BoundarySurface random_surface(Rng& rng, int d) {
  varifold::BoundarySurface s;
  s.dimension = d;
  if (d == 2) {
    const int n = 4 + static_cast<int>(uniform(0, 6, rng));
    s.vertices.resize(2 * n);
    for (int i = 0; i < n; ++i) {
      s.vertices[2 * i] = 0.15 * i + uniform(-0.03, 0.03, rng);
      s.vertices[2 * i + 1] = uniform(-0.2, 0.2, rng);
    }
    for (Index i = 0; i + 1 < n; ++i) s.elements.push_back({i, i + 1});
  } else {
    const int n = 3 + static_cast<int>(uniform(0, 2, rng));
    s.vertices.resize(3 * n * n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int v = j * n + i;
        s.vertices[3 * v] = 0.2 * i + uniform(-0.03, 0.03, rng);
        s.vertices[3 * v + 1] = 0.2 * j + uniform(-0.03, 0.03, rng);
        s.vertices[3 * v + 2] = uniform(-0.15, 0.15, rng);
        if (i + 1 < n && j + 1 < n) {
          s.elements.push_back({v, v + 1, v + n + 1});
          s.elements.push_back({v, v + n + 1, v + n});
        }
      }
  }
  return s;
}

// Independent double loop: element centroid, area vector via explicit cross
// products, measure from the area vector.
double brute_force_product(const varifold::BoundarySurface& a, const varifold::BoundarySurface& b, double tau) {
  struct E {
    Eigen::Vector3d m, n;
    double meas;
  };
  auto elems = [](const varifold::BoundarySurface& s) {
    std::vector<E> out;
    const int d = s.dimension;
    for (const auto& c : s.elements) {
      Eigen::Vector3d p[3] = {Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()};
      for (int k = 0; k < d; ++k)
        for (int x = 0; x < d; ++x) p[k][x] = s.vertices[c[k] * d + x];
      E e;
      Eigen::Vector3d area;
      if (d == 2) {
        e.m = 0.5 * (p[0] + p[1]);
        const Eigen::Vector3d t = p[1] - p[0];
        area = Eigen::Vector3d(-t.y(), t.x(), 0.0);
      } else {
        e.m = (p[0] + p[1] + p[2]) / 3.0;
        area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
      }
      e.meas = area.norm();
      e.n = area / e.meas;
      out.push_back(e);
    }
    return out;
  };
  const auto ea = elems(a), eb = elems(b);
  double total = 0.0;
  for (const auto& x : ea)
    for (const auto& y : eb) {
      const double t = (x.m - y.m).norm() / tau;
      const double dot = x.n.dot(y.n);
      total += 1.0 / ((1.0 + t * t) * (1.0 + t * t)) * dot * dot * x.meas * y.meas;
    }
  return total;
}

Outcome criterion7() {
  Rng rng(7);
  varifold::VarifoldConfig cfg;
  double self = 0.0, min_rho = INFINITY, oracle = 0.0, rigid = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int d = i % 2 == 0 ? 2 : 3;
    cfg.tau = uniform(0.1, 1.0, rng);
    const auto s = random_surface(rng, d);
    const auto t = random_surface(rng, d);
    self = std::max(self, std::abs(varifold::discrepancy(s, s, cfg)));
    const double rho = varifold::discrepancy(s, t, cfg);
    min_rho = std::min(min_rho, rho);
    if (i < 200) {
      oracle = std::max(oracle, relative_difference(varifold::varifold_product(s, t, cfg),
                                                    brute_force_product(s, t, cfg.tau)));
      SmallMat rot;
      SmallVec shift = random_vector(d, 1.0, rng);
      if (d == 2) {
        const double a = uniform(0, 6.28, rng);
        rot = Eigen::Rotation2Dd(a).toRotationMatrix();
      } else {
        rot = Eigen::Quaterniond(Eigen::Vector4d(random_vector(4, 1.0, rng)).normalized()).toRotationMatrix();
      }
      auto move = [&](varifold::BoundarySurface x) {
        for (Index k = 0; k < x.vertex_count(); ++k)
          x.vertices.segment(k * d, d) = rot * x.vertices.segment(k * d, d) + shift;
        return x;
      };
      rigid = std::max(rigid, std::abs(varifold::discrepancy(move(s), move(t), cfg) - rho) / std::max(rho, 1e-300));
    }
  }
  return {self == 0.0 && min_rho >= -1e-12 && oracle <= 1e-12 && rigid <= 1e-10,
          fmt("max rho(S,S) = %.1e (== 0); min rho = %.2e (>= -1e-12); oracle rel diff %.1e (<= 1e-12); rigid-motion "
              "rel change %.1e (<= 1e-10)",
              self, min_rho, oracle, rigid)};
}

Outcome criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  dynamics::Problem p;
  mesh::MixSinTemplate spec;
  spec.points = 31;
  spec.layers = 5;
  p.mesh = mesh::build_mixsin_template(spec);
  p.elastic.model = elasticity::Model::isotropic;
  p.elastic.lambda = 0.0;
  p.elastic.mu = 0.5;
  p.solver.steps = 10;
  // True yank: three regions inside x in [1, 2.25], two in the top band and one in the middle band.
  yank::FreeYank truth(p.solver.steps, p.mesh.simplex_count(), 2);
  const Field centroids = yank::template_centroids(p.mesh);
  const double prisms_per_band = static_cast<double>(p.mesh.simplex_count()) / (p.mesh.layers - 1);
  for (Index s = 0; s < p.mesh.simplex_count(); ++s) {
    const double x = centroids[2 * s];
    const int band = static_cast<int>(s / prisms_per_band);
    Eigen::Vector2d j = Eigen::Vector2d::Zero();
    if (band == p.mesh.layers - 2 && x >= 1.0 && x <= 1.4) j << 0.0, -3.0;
    if (band == p.mesh.layers - 2 && x >= 1.85 && x <= 2.25) j << 0.0, 3.0;
    if (band == 1 && x >= 1.4 && x <= 1.85) j << 3.0, 0.0;
    for (int k = 0; k < p.solver.steps; ++k) truth.coefficient(k, s) = j;
  }
  const Field q_final = dynamics::forward_flow(p, truth, false).states.back();
  for (int l : {0, p.mesh.layers - 1}) p.targets.push_back({l, varifold::layer_surface(p.mesh, q_final, l)});

  inverse::OptimizerConfig cfg;
  cfg.max_iters = 300;
  const auto result = inverse::solve_free(p, cfg);
  const Field q_fit = dynamics::forward_flow(p, result.yank, false).states.back();
  const double baseline = dynamics::total_discrepancy(p, p.mesh.vertices);
  const double final_rho = dynamics::total_discrepancy(p, q_fit);
  bool monotone = true;
  for (std::size_t i = 1; i < result.run.trace.size(); ++i) monotone = monotone && result.run.trace[i] <= result.run.trace[i - 1];
  // localization report: share of recovered yank magnitude over simplices with x in [1, 2.25]
  double inside = 0.0, total = 0.0;
  for (Index s = 0; s < p.mesh.simplex_count(); ++s) {
    double mag = 0.0;
    for (int k = 0; k < p.solver.steps; ++k) mag += result.yank.coefficient(k, s).norm();
    total += mag;
    if (centroids[2 * s] >= 1.0 && centroids[2 * s] <= 2.25) inside += mag;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double ratio = final_rho / baseline;
  return {ratio <= 0.1 && monotone,
          fmt("final/initial layer discrepancy %.3e / %.3e = %.3f (<= 0.10), monotone trace: %s, %d iterations (%s); "
              "yank mass in x in [1, 2.25]: %.0f%% (reported); %.1f s",
              final_rho, baseline, ratio, monotone ? "yes" : "no", result.run.iterations,
              inverse::to_string(result.run.status).c_str(), 100.0 * inside / total, seconds)};
}

// Mean |tangential| / mean |transversal| displacement after one fixed yank.
double displacement_ratio(double mu_tan, double mu_tsv) {
  dynamics::Problem p;
  mesh::FlatTemplate spec;
  spec.points = 21;
  spec.layers = 6;
  spec.width = 2.0;
  spec.height = 1.0;
  p.mesh = mesh::build_flat_template(spec);
  p.elastic.model = elasticity::Model::layered;
  p.elastic.lambda_tan = 0.0;
  p.elastic.mu_tan = mu_tan;
  p.elastic.mu_tsv = mu_tsv;
  p.elastic.mu_ang = 1.0;
  yank::PotentialParams th;
  th.center = Eigen::Vector2d(1.0, 0.5);
  th.height = 0.5;
  th.radius = 0.4;
  const auto traj = dynamics::forward_flow(p, th, false);
  const Field u = traj.states.back() - traj.states.front();
  double tan = 0.0, tsv = 0.0;
  for (Index i = 0; i < p.mesh.vertex_count(); ++i) {
    tan += std::abs(u[2 * i]);
    tsv += std::abs(u[2 * i + 1]);
  }
  return tan / tsv;
}

Outcome criterion9() {
  const double soft_tan = displacement_ratio(0.02, 1.0);
  const double soft_tsv = displacement_ratio(1.0, 0.02);
  return {soft_tan > 1.0 && soft_tsv < 1.0,
          fmt("tangential/transversal displacement ratio: mu_tan = 0.02 mu_tsv -> %.3f (> 1), mu_tsv = 0.02 mu_tan -> "
              "%.3f (< 1)",
              soft_tan, soft_tsv)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, Outcome (*)()>> criteria = {
      {1, {"parametric recovery", criterion1}},    {2, {"radius-sensitivity power law", criterion2}},
      {3, {"adjoint-gradient exactness", criterion3}}, {4, {"zero-control identity", criterion4}},
      {5, {"discrete operator bound", criterion5}}, {6, {"elastic operator correctness", criterion6}},
      {7, {"varifold correctness", criterion7}},   {8, {"free-yank registration", criterion8}},
      {9, {"anisotropy response", criterion9}}};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (const auto& c : criteria) selected.push_back(c.first);

  int failures = 0;
  for (int id : selected) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::cerr << "unknown criterion " << id << "\n";
      return 2;
    }
    Outcome out;
    try {
      out = it->second.second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    failures += !out.pass;
    std::cout << "criterion " << id << " [" << (out.pass ? "PASS" : "FAIL") << "] " << it->second.first << ": "
              << out.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
