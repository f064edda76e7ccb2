#include "yankflow/inverse.hpp"

#include "yankflow/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <thread>

namespace yankflow::inverse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Point {
  double alpha = 0.0;
  Eigen::VectorXd x;
  Evaluation eval;
  double slope = 0.0;  // directional derivative along d
  bool finite() const { return std::isfinite(eval.f); }
};

class Evaluator {
 public:
  explicit Evaluator(const ObjectiveFn& fn) : fn_(fn) {}

  Evaluation operator()(const Eigen::VectorXd& x) {
    ++count;
    try {
      Evaluation e = fn_(x);
      if (!std::isfinite(e.f) || !e.g.allFinite()) return {kInf, Eigen::VectorXd()};
      return e;
    } catch (const FlowBreakdown&) {
      return {kInf, Eigen::VectorXd()};
    } catch (const DegenerateSimplexError&) {
      return {kInf, Eigen::VectorXd()};
    } catch (const FactorizationError&) {
      return {kInf, Eigen::VectorXd()};
    }
  }

  int count = 0;

 private:
  const ObjectiveFn& fn_;
};

struct LineSearch {
  Evaluator& eval;
  const OptimizerConfig& cfg;
  const Box* box;
  const Eigen::VectorXd& x;
  double f0;
  const Eigen::VectorXd& d;
  double slope0;

  Point at(double alpha) {
    Point p;
    p.alpha = alpha;
    p.x = x + alpha * d;
    if (box) p.x = box->project(p.x);
    p.eval = eval(p.x);
    p.slope = p.finite() ? p.eval.g.dot(d) : kInf;
    return p;
  }

  bool armijo(const Point& p) const { return p.finite() && p.eval.f <= f0 + cfg.wolfe_c1 * p.alpha * slope0; }
  bool curvature(const Point& p) const { return std::abs(p.slope) <= -cfg.wolfe_c2 * slope0; }

  // Minimizer of the cubic through (lo, hi) when both ends carry derivatives;
  // bisection otherwise. Safeguarded away from the interval ends.
  static double trial(const Point& lo, const Point& hi) {
    const double a = lo.alpha, b = hi.alpha;
    double t = 0.5 * (a + b);
    if (lo.finite() && hi.finite()) {
      const double d1 = lo.slope + hi.slope - 3.0 * (lo.eval.f - hi.eval.f) / (a - b);
      const double disc = d1 * d1 - lo.slope * hi.slope;
      if (disc >= 0.0) {
        const double d2 = std::copysign(std::sqrt(disc), b - a);
        const double c = b - (b - a) * (hi.slope + d2 - d1) / (hi.slope - lo.slope + 2.0 * d2);
        if (std::isfinite(c)) t = c;
      }
    }
    const double lower = std::min(a, b), upper = std::max(a, b), width = upper - lower;
    return std::clamp(t, lower + 0.1 * width, upper - 0.1 * width);
  }

  std::optional<Point> zoom(Point lo, Point hi) {
    for (int i = 0; i < 40; ++i) {
      if (std::abs(hi.alpha - lo.alpha) <= 1e-16 * std::max(1.0, std::abs(lo.alpha))) break;
      Point t = at(trial(lo, hi));
      if (!armijo(t) || t.eval.f >= lo.eval.f) {
        hi = std::move(t);
      } else {
        if (curvature(t)) return t;
        if (t.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = std::move(t);
      }
    }
    if (lo.alpha > 0.0 && lo.eval.f < f0) return lo;
    return std::nullopt;
  }

  std::optional<Point> run(double alpha_init, double alpha_max) {
    Point prev;
    prev.alpha = 0.0;
    prev.x = x;
    prev.eval.f = f0;
    prev.slope = slope0;
    double alpha = std::min(alpha_init, alpha_max);
    for (int i = 0; i < 60; ++i) {
      Point cur = at(alpha);
      if (!armijo(cur) || (i > 0 && cur.eval.f >= prev.eval.f)) return zoom(std::move(prev), std::move(cur));
      if (curvature(cur)) return cur;
      if (cur.slope >= 0.0) return zoom(std::move(cur), std::move(prev));
      if (alpha >= alpha_max) return cur;  // capped at the box boundary, still descending
      prev = std::move(cur);
      alpha = std::min(2.0 * alpha, alpha_max);
    }
    return std::nullopt;
  }
};

// Coordinates pinned at a bound with the gradient pointing outward.
std::vector<bool> active_set(const Box* box, const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
  std::vector<bool> active(x.size(), false);
  if (!box) return active;
  for (Index i = 0; i < x.size(); ++i)
    active[i] = (x[i] <= box->lo[i] && g[i] > 0.0) || (x[i] >= box->hi[i] && g[i] < 0.0);
  return active;
}

Eigen::VectorXd projected_gradient(const std::vector<bool>& active, const Eigen::VectorXd& g) {
  Eigen::VectorXd pg = g;
  for (Index i = 0; i < g.size(); ++i)
    if (active[i]) pg[i] = 0.0;
  return pg;
}

double step_limit(const Box* box, const Eigen::VectorXd& x, const Eigen::VectorXd& d) {
  double limit = kInf;
  if (!box) return limit;
  for (Index i = 0; i < x.size(); ++i) {
    if (d[i] > 0.0) limit = std::min(limit, (box->hi[i] - x[i]) / d[i]);
    else if (d[i] < 0.0) limit = std::min(limit, (box->lo[i] - x[i]) / d[i]);
  }
  return std::max(limit, 0.0);
}

MinimizeResult start_run(Evaluator& eval, const Eigen::VectorXd& x0, const Box* box) {
  MinimizeResult r;
  r.x = box ? box->project(x0) : x0;
  Evaluation e = eval(r.x);
  r.evaluations = eval.count;
  if (!std::isfinite(e.f)) {
    r.status = Status::failed;
    r.message = "objective is not finite at the starting point";
    return r;
  }
  if (e.g.size() != r.x.size()) throw ValidationError("objective gradient has the wrong size");
  r.f = e.f;
  r.g = std::move(e.g);
  r.trace.push_back(r.f);
  r.status = Status::max_iters;
  return r;
}

}  // namespace

void Box::validate() const {
  if (lo.size() == 0 || lo.size() != hi.size()) throw ValidationError("box must be non-empty with matching bounds");
  for (Index i = 0; i < lo.size(); ++i)
    if (!(lo[i] < hi[i]) || !std::isfinite(lo[i]) || !std::isfinite(hi[i]))
      throw ValidationError("box requires finite lo < hi in every coordinate");
}

bool Box::contains(const Eigen::VectorXd& x) const {
  return x.size() == lo.size() && (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
}

Eigen::VectorXd Box::project(const Eigen::VectorXd& x) const { return x.cwiseMax(lo).cwiseMin(hi); }

Box default_theta_box() {
  Box box;
  box.lo = Eigen::Vector3d(0.0, 0.0, 0.0);
  box.hi = Eigen::Vector3d(3.0, 1.0, 4.0);
  return box;
}

void OptimizerConfig::validate() const {
  if (max_iters < 0) throw ValidationError("max_iters must be >= 0");
  if (!(grad_tol > 0.0)) throw ValidationError("grad_tol must be > 0");
  if (!(0.0 < wolfe_c1 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0))
    throw ValidationError("Wolfe constants must satisfy 0 < c1 < c2 < 1");
  if (lbfgs_memory < 1) throw ValidationError("lbfgs_memory must be >= 1");
  if (n_starts < 1) throw ValidationError("n_starts must be >= 1");
  if (threads < 0) throw ValidationError("threads must be >= 0");
  theta_box.validate();
}

std::string to_string(Status status) {
  switch (status) {
    case Status::converged: return "converged";
    case Status::stationary_start: return "stationary-start";
    case Status::max_iters: return "max-iters";
    case Status::stalled: return "stalled";
    case Status::failed: return "failed";
  }
  return "unknown";
}

Eigen::MatrixXd latin_hypercube(const Box& box, int n, std::uint64_t seed) {
  box.validate();
  if (n < 1) throw ValidationError("latin hypercube needs n >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Index m = box.dim();
  Eigen::MatrixXd samples(n, m);
  std::vector<int> strata(n);
  for (Index j = 0; j < m; ++j) {
    std::iota(strata.begin(), strata.end(), 0);
    std::shuffle(strata.begin(), strata.end(), rng);
    const double width = (box.hi[j] - box.lo[j]) / n;
    for (int i = 0; i < n; ++i) {
      const double lower = box.lo[j] + strata[i] * width;
      // stay strictly inside the half-open stratum
      samples(i, j) = std::min(lower + unit(rng) * width, std::nextafter(lower + width, lower));
    }
  }
  return samples;
}

MinimizeResult minimize_bfgs(const ObjectiveFn& fn, const Eigen::VectorXd& x0, const OptimizerConfig& cfg,
                             const Box* box) {
  cfg.validate();
  if (box) {
    box->validate();
    if (box->dim() != x0.size()) throw ValidationError("box dimension does not match x0");
  }
  Evaluator eval(fn);
  MinimizeResult r = start_run(eval, x0, box);
  if (r.status == Status::failed) return r;

  const Index n = r.x.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  std::vector<bool> active = active_set(box, r.x, r.g);
  for (int it = 0;; ++it) {
    const Eigen::VectorXd pg = projected_gradient(active, r.g);
    if (pg.lpNorm<Eigen::Infinity>() <= cfg.grad_tol) {
      r.status = it == 0 ? Status::stationary_start : Status::converged;
      break;
    }
    if (it >= cfg.max_iters) {
      r.status = Status::max_iters;
      break;
    }
    // Quasi-Newton direction restricted to the free coordinates.
    Eigen::VectorXd d = -(h * pg);
    for (Index i = 0; i < n; ++i)
      if (active[i]) d[i] = 0.0;
    double slope = d.dot(r.g);
    if (!(slope < -1e-14 * d.norm() * pg.norm())) {
      h.setIdentity();
      scaled = false;
      d = -pg;
      slope = d.dot(r.g);
    }
    const double alpha_max = step_limit(box, r.x, d);
    const double alpha_init = scaled ? 1.0 : std::min(1.0, 1.0 / d.lpNorm<Eigen::Infinity>());
    LineSearch search{eval, cfg, box, r.x, r.f, d, slope};
    std::optional<Point> next = alpha_max > 0.0 ? search.run(alpha_init, alpha_max) : std::nullopt;
    if (!next || !(next->eval.f < r.f)) {
      if (scaled) {  // retry once along steepest descent
        h.setIdentity();
        scaled = false;
        continue;
      }
      r.status = Status::stalled;
      r.message = "line search found no admissible step";
      break;
    }
    const Eigen::VectorXd s = next->x - r.x;
    const Eigen::VectorXd y = next->eval.g - r.g;
    const std::vector<bool> next_active = active_set(box, next->x, next->eval.g);
    const double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm() && next_active == active) {
      if (!scaled) {
        h = Eigen::MatrixXd::Identity(n, n) * (sy / y.squaredNorm());
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = h * y;
      h += rho * rho * (sy + y.dot(hy)) * (s * s.transpose()) - rho * (hy * s.transpose() + s * hy.transpose());
    }
    r.x = std::move(next->x);
    r.f = next->eval.f;
    r.g = std::move(next->eval.g);
    active = next_active;
    r.trace.push_back(r.f);
    r.iterations = it + 1;
  }
  r.evaluations = eval.count;
  return r;
}

MinimizeResult minimize_lbfgs(const ObjectiveFn& fn, const Eigen::VectorXd& x0, const OptimizerConfig& cfg) {
  cfg.validate();
  Evaluator eval(fn);
  MinimizeResult r = start_run(eval, x0, nullptr);
  if (r.status == Status::failed) return r;

  std::vector<Eigen::VectorXd> ss, ys;
  std::vector<double> rhos;
  for (int it = 0;; ++it) {
    if (r.g.lpNorm<Eigen::Infinity>() <= cfg.grad_tol) {
      r.status = it == 0 ? Status::stationary_start : Status::converged;
      break;
    }
    if (it >= cfg.max_iters) {
      r.status = Status::max_iters;
      break;
    }
    Eigen::VectorXd d = -r.g;
    const std::size_t m = ss.size();
    std::vector<double> alphas(m);
    for (std::size_t i = m; i-- > 0;) {
      alphas[i] = rhos[i] * ss[i].dot(d);
      d -= alphas[i] * ys[i];
    }
    if (m > 0) d *= 1.0 / (rhos[m - 1] * ys[m - 1].squaredNorm());
    for (std::size_t i = 0; i < m; ++i) {
      const double beta = rhos[i] * ys[i].dot(d);
      d += (alphas[i] - beta) * ss[i];
    }
    double slope = d.dot(r.g);
    if (!(slope < 0.0)) {
      ss.clear(), ys.clear(), rhos.clear();
      d = -r.g;
      slope = d.dot(r.g);
    }
    const double alpha_init = m > 0 ? 1.0 : std::min(1.0, 1.0 / d.lpNorm<Eigen::Infinity>());
    LineSearch search{eval, cfg, nullptr, r.x, r.f, d, slope};
    std::optional<Point> next = search.run(alpha_init, kInf);
    if (!next || !(next->eval.f < r.f)) {
      if (m > 0) {
        ss.clear(), ys.clear(), rhos.clear();
        continue;
      }
      r.status = Status::stalled;
      r.message = "line search found no admissible step";
      break;
    }
    Eigen::VectorXd s = next->x - r.x;
    Eigen::VectorXd y = next->eval.g - r.g;
    const double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm()) {
      if (static_cast<int>(ss.size()) == cfg.lbfgs_memory) {
        ss.erase(ss.begin()), ys.erase(ys.begin()), rhos.erase(rhos.begin());
      }
      ss.push_back(std::move(s));
      ys.push_back(std::move(y));
      rhos.push_back(1.0 / sy);
    }
    r.x = std::move(next->x);
    r.f = next->eval.f;
    r.g = std::move(next->eval.g);
    r.trace.push_back(r.f);
    r.iterations = it + 1;
  }
  r.evaluations = eval.count;
  return r;
}

namespace {

template <class Task>
void run_parallel(int count, int threads, const Task& task) {
  int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) task(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace

ParametricResult solve_parametric(const dynamics::Problem& problem, double radius, const OptimizerConfig& cfg) {
  cfg.validate();
  return solve_parametric(problem, radius, cfg, latin_hypercube(cfg.theta_box, cfg.n_starts, cfg.rng_seed));
}

ParametricResult solve_parametric(const dynamics::Problem& problem, double radius, const OptimizerConfig& cfg,
                                  const Eigen::MatrixXd& starts) {
  cfg.validate();
  problem.validate();
  if (starts.rows() < 1) throw ValidationError("solve_parametric needs at least one start");
  if (starts.cols() != problem.mesh.dimension + 1 || cfg.theta_box.dim() != starts.cols())
    throw ValidationError("theta box / starts must have dimension + 1 coordinates");
  if (!(radius > 0.0)) throw ValidationError("potential radius must be > 0");

  const ObjectiveFn fn = [&](const Eigen::VectorXd& theta) {
    const auto obj = dynamics::objective_gradient(problem, yank::PotentialParams::from_theta(theta, radius));
    return Evaluation{obj.value, obj.gradient};
  };

  ParametricResult out;
  out.starts.resize(starts.rows());
  run_parallel(static_cast<int>(starts.rows()), cfg.threads, [&](int i) {
    StartResult& s = out.starts[i];
    s.theta0 = starts.row(i).transpose();
    try {
      const MinimizeResult r = minimize_bfgs(fn, s.theta0, cfg, &cfg.theta_box);
      s.theta_star = r.status == Status::failed ? s.theta0 : r.x;
      s.f_star = r.status == Status::failed ? kInf : r.f;
      s.iterations = r.iterations;
      s.status = to_string(r.status);
      s.trace = r.trace;
    } catch (const Error& e) {
      s.theta_star = s.theta0;
      s.f_star = kInf;
      s.status = std::string("failed: ") + e.what();
    }
  });

  for (std::size_t i = 0; i < out.starts.size(); ++i) {
    const double f = out.starts[i].f_star;
    if (std::isfinite(f) && (out.best_index < 0 || f < out.starts[out.best_index].f_star))
      out.best_index = static_cast<int>(i);
  }
  if (out.best_index < 0) throw Error("solve_parametric: every start failed");
  out.f = out.starts[out.best_index].f_star;
  out.theta = yank::PotentialParams::from_theta(out.starts[out.best_index].theta_star, radius);
  return out;
}

FreeResult solve_free(const dynamics::Problem& problem, const OptimizerConfig& cfg, const yank::FreeYank* initial) {
  cfg.validate();
  problem.validate();
  FreeResult out;
  out.yank = initial ? *initial
                     : yank::FreeYank(problem.solver.steps, problem.mesh.simplex_count(), problem.mesh.dimension);
  yank::FreeYank work = out.yank;
  const ObjectiveFn fn = [&](const Eigen::VectorXd& x) {
    work.coefficients() = x;
    const auto obj = dynamics::objective_gradient(problem, work);
    return Evaluation{obj.value, obj.gradient};
  };
  out.run = minimize_lbfgs(fn, out.yank.coefficients(), cfg);
  if (out.run.status == Status::failed) throw FlowBreakdown(0, "solve_free: " + out.run.message);
  out.f_initial = out.run.trace.front();
  out.f = out.run.f;
  out.yank.coefficients() = out.run.x;
  return out;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("slope fit needs at least two (x, y) pairs");
  const Index n = static_cast<Index>(x.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Index i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("slope fit needs positive data");
    a(i, 0) = std::log(x[i]);
    a(i, 1) = 1.0;
    b[i] = std::log(y[i]);
  }
  return a.colPivHouseholderQr().solve(b)[0];
}

std::vector<SweepPoint> radius_sweep(const dynamics::Problem& problem, const std::vector<double>& radii,
                                     const OptimizerConfig& cfg) {
  std::vector<SweepPoint> out;
  for (double r : radii) {
    SweepPoint p;
    p.radius = r;
    try {
      p.result = solve_parametric(problem, r, cfg);
      p.status = "ok";
    } catch (const Error& e) {
      p.status = e.what();
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace yankflow::inverse
