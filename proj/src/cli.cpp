#include "yankflow/cli.hpp"

#include "yankflow/errors.hpp"

#include "CLI11.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>

namespace yankflow::cli {

using io::fs::path;
using io::json;

namespace {

constexpr const char* kVersion = "1.0.0";

void check_keys(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ValidationError(std::string(where) + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : obj.items())
    if (!ok.count(item.key())) throw ValidationError(std::string("unknown key '") + item.key() + "' in " + where);
}

template <class T>
void read(const json& obj, const char* key, T& target) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("config field '") + key + "' has the wrong type");
  }
}

path resolve(const path& base, const std::string& p) {
  const path raw(p);
  return raw.is_absolute() ? raw : base / raw;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void parse_template(const json& doc, TemplateConfig& t) {
  check_keys(doc, "template",
             {"name", "points", "layers", "step", "x_min", "x_max", "dimension", "width", "depth", "height", "skew"});
  read(doc, "name", t.name);
  read(doc, "points", t.sine.points);
  read(doc, "layers", t.sine.layers);
  read(doc, "step", t.sine.step);
  read(doc, "x_min", t.sine.x_min);
  read(doc, "x_max", t.sine.x_max);
  read(doc, "points", t.mixsin.points);
  read(doc, "layers", t.mixsin.layers);
  read(doc, "x_min", t.mixsin.x_min);
  read(doc, "x_max", t.mixsin.x_max);
  read(doc, "dimension", t.flat.dimension);
  read(doc, "points", t.flat.points);
  read(doc, "layers", t.flat.layers);
  read(doc, "width", t.flat.width);
  read(doc, "depth", t.flat.depth);
  read(doc, "height", t.flat.height);
  read(doc, "skew", t.flat.skew);
}

json template_to_json(const TemplateConfig& t) {
  if (t.name == "sine")
    return {{"name", t.name}, {"points", t.sine.points}, {"layers", t.sine.layers}, {"step", t.sine.step},
            {"x_min", t.sine.x_min}, {"x_max", t.sine.x_max}};
  if (t.name == "mixsin")
    return {{"name", t.name}, {"points", t.mixsin.points}, {"layers", t.mixsin.layers}, {"x_min", t.mixsin.x_min},
            {"x_max", t.mixsin.x_max}};
  return {{"name", t.name},         {"dimension", t.flat.dimension}, {"points", t.flat.points},
          {"layers", t.flat.layers}, {"width", t.flat.width},         {"depth", t.flat.depth},
          {"height", t.flat.height}, {"skew", t.flat.skew}};
}

void parse_elastic(const json& doc, elasticity::ElasticParams& e) {
  check_keys(doc, "elastic", {"model", "lambda", "mu", "lambda_tan", "mu_tan", "mu_tsv", "mu_ang", "beta"});
  std::string model = e.model == elasticity::Model::layered ? "layered" : "isotropic";
  read(doc, "model", model);
  if (model == "layered") e.model = elasticity::Model::layered;
  else if (model == "isotropic") e.model = elasticity::Model::isotropic;
  else throw ValidationError("elastic model must be 'isotropic' or 'layered'");
  read(doc, "lambda", e.lambda);
  read(doc, "mu", e.mu);
  read(doc, "lambda_tan", e.lambda_tan);
  read(doc, "mu_tan", e.mu_tan);
  read(doc, "mu_tsv", e.mu_tsv);
  read(doc, "mu_ang", e.mu_ang);
  read(doc, "beta", e.beta);
}

void parse_optimizer(const json& doc, inverse::OptimizerConfig& o) {
  check_keys(doc, "optimizer",
             {"max_iters", "grad_tol", "wolfe_c1", "wolfe_c2", "lbfgs_memory", "n_starts", "theta_box", "threads"});
  read(doc, "max_iters", o.max_iters);
  read(doc, "grad_tol", o.grad_tol);
  read(doc, "wolfe_c1", o.wolfe_c1);
  read(doc, "wolfe_c2", o.wolfe_c2);
  read(doc, "lbfgs_memory", o.lbfgs_memory);
  read(doc, "n_starts", o.n_starts);
  read(doc, "threads", o.threads);
  if (doc.contains("theta_box")) {
    const json& box = doc["theta_box"];
    check_keys(box, "theta_box", {"lo", "hi"});
    std::vector<double> lo, hi;
    read(box, "lo", lo);
    read(box, "hi", hi);
    o.theta_box.lo = to_vector(lo);
    o.theta_box.hi = to_vector(hi);
  }
}

// Exclusive lock on an output directory for the lifetime of a run.
class DirectoryLock {
 public:
  explicit DirectoryLock(const path& dir) : file_(dir / ".yankflow.lock") {
    std::error_code ec;
    io::fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    fd_ = ::open(file_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) throw IoError("output directory " + dir.string() + " is locked by another run (" + file_.string() + ")");
    const std::string pid = std::to_string(::getpid()) + "\n";
    if (::write(fd_, pid.data(), pid.size()) < 0) {
      // the lock is held regardless of the pid note
    }
  }
  ~DirectoryLock() {
    ::close(fd_);
    std::error_code ec;
    io::fs::remove(file_, ec);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  path file_;
  int fd_ = -1;
};

struct Inputs {
  mesh::LayeredMesh mesh;
  std::vector<dynamics::LayerTarget> targets;
  std::optional<yank::FreeYank> free_yank;
};

Inputs load_inputs(const RunConfig& cfg) {
  Inputs in;
  in.mesh = cfg.mesh_file ? io::read_mesh(*cfg.mesh_file) : build_template(cfg.templ);
  for (const auto& t : cfg.targets) {
    if (t.layer < 0 || t.layer >= in.mesh.layers)
      throw ValidationError("target layer " + std::to_string(t.layer) + " is outside the mesh");
    in.targets.push_back({t.layer, io::read_surface(t.file)});
  }
  if (cfg.free_yank_file) in.free_yank = io::free_yank_from_json(io::read_json(*cfg.free_yank_file));
  return in;
}

dynamics::Problem make_problem(const RunConfig& cfg, Inputs& in) {
  dynamics::Problem p;
  p.mesh = in.mesh;
  p.elastic = cfg.elastic;
  p.kernel = cfg.kernel;
  p.solver = cfg.solver;
  p.varifold = cfg.varifold;
  p.targets = in.targets;
  p.validate();
  return p;
}

json manifest(const RunConfig& cfg) {
  return {{"command", cfg.command}, {"version", kVersion}, {"seed", cfg.seed}, {"config", config_to_json(cfg)}};
}

void require_targets(const RunConfig& cfg) {
  if (cfg.targets.empty()) throw ValidationError(cfg.command + " needs at least one entry in 'targets'");
}

int cmd_mesh_gen(const RunConfig& cfg) {
  Inputs in = load_inputs(cfg);
  DirectoryLock lock(cfg.out);
  io::write_mesh(cfg.out / "mesh.json", in.mesh);
  json m = manifest(cfg);
  m["outputs"] = {"mesh.json"};
  m["results"] = {{"vertices", in.mesh.vertex_count()}, {"simplices", in.mesh.simplex_count()}};
  io::write_json(cfg.out / "manifest.json", m);
  std::cout << "vertices " << in.mesh.vertex_count() << "\nsimplices " << in.mesh.simplex_count() << "\n";
  return kSuccess;
}

dynamics::Control simulate_control(const RunConfig& cfg, const Inputs& in) {
  if (cfg.mode == "parametric") {
    if (!cfg.theta) throw ValidationError("simulate in parametric mode needs 'control.theta'");
    return *cfg.theta;
  }
  if (in.free_yank) return *in.free_yank;
  return yank::FreeYank(cfg.solver.steps, in.mesh.simplex_count(), in.mesh.dimension);
}

int cmd_simulate(const RunConfig& cfg) {
  Inputs in = load_inputs(cfg);
  dynamics::Problem problem = make_problem(cfg, in);
  const dynamics::Control control = simulate_control(cfg, in);
  std::vector<int> layers = cfg.target_layers;
  if (layers.empty()) layers = {0, problem.mesh.layers - 1};
  for (int l : layers)
    if (l < 0 || l >= problem.mesh.layers) throw ValidationError("target layer " + std::to_string(l) + " is outside the mesh");

  DirectoryLock lock(cfg.out);
  json outputs = json::array();
  const dynamics::Trajectory traj = dynamics::forward_flow(problem, control, false);
  io::write_trajectory_csv(cfg.out / "trajectory.csv", traj.states, problem.mesh.dimension);
  outputs.push_back("trajectory.csv");
  for (int l : layers) {
    const std::string name = "target_layer_" + std::to_string(l) + ".json";
    io::write_surface(cfg.out / name, varifold::layer_surface(problem.mesh, traj.states.back(), l));
    outputs.push_back(name);
  }
  if (cfg.frames && problem.mesh.dimension == 2) {
    io::fs::create_directories(cfg.out / "frames");
    for (std::size_t k = 1; k < traj.states.size(); ++k) {
      std::ostringstream name;
      name << "frames/frame_" << std::setw(3) << std::setfill('0') << k << ".svg";
      io::write_svg_frame(cfg.out / name.str(), problem.mesh, traj.states[k]);
      outputs.push_back(name.str());
    }
  }
  double displacement = 0.0;
  for (Index i = 0; i < problem.mesh.vertex_count(); ++i)
    displacement = std::max(displacement, (point(traj.states.back(), i, problem.mesh.dimension) -
                                           point(traj.states.front(), i, problem.mesh.dimension))
                                              .norm());
  json m = manifest(cfg);
  m["outputs"] = outputs;
  m["results"] = {{"steps", problem.solver.steps},
                  {"max_displacement", displacement},
                  {"running_cost", dynamics::running_cost(problem, traj, control)}};
  io::write_json(cfg.out / "manifest.json", m);
  std::cout << "steps " << problem.solver.steps << "\nmax displacement " << displacement << "\n";
  return kSuccess;
}

std::vector<varifold::BoundarySurface> target_surfaces(const dynamics::Problem& p) {
  std::vector<varifold::BoundarySurface> out;
  for (const auto& t : p.targets) out.push_back(t.surface);
  return out;
}

int cmd_invert(const RunConfig& cfg) {
  require_targets(cfg);
  Inputs in = load_inputs(cfg);
  dynamics::Problem problem = make_problem(cfg, in);
  inverse::OptimizerConfig opt = cfg.optimizer;
  opt.rng_seed = cfg.seed;

  DirectoryLock lock(cfg.out);
  json m = manifest(cfg);
  Field final_state;
  if (cfg.mode == "parametric") {
    const inverse::ParametricResult result = inverse::solve_parametric(problem, cfg.radius, opt);
    json report = io::report_to_json(result);
    report["config_echo"] = config_to_json(cfg);
    io::write_json(cfg.out / "report.json", report);
    io::write_json(cfg.out / "theta.json", io::theta_to_json(result.theta));
    m["outputs"] = {"report.json", "theta.json"};
    m["results"] = {{"theta_star", io::theta_to_json(result.theta)},
                    {"f_star", result.f},
                    {"objective_trace", result.starts[result.best_index].trace}};
    std::cout << "theta* " << result.theta.theta().transpose() << "\nf* " << result.f << "\n";
    final_state = dynamics::forward_flow(problem, result.theta, false).states.back();
  } else {
    const inverse::FreeResult result = inverse::solve_free(problem, opt, in.free_yank ? &*in.free_yank : nullptr);
    const json report = {{"f_initial", result.f_initial},
                         {"f_star", result.f},
                         {"iters", result.run.iterations},
                         {"status", inverse::to_string(result.run.status)},
                         {"trace", result.run.trace},
                         {"config_echo", config_to_json(cfg)}};
    io::write_json(cfg.out / "report.json", report);
    io::write_json(cfg.out / "free_yank.json", io::free_yank_to_json(result.yank));
    m["outputs"] = {"report.json", "free_yank.json"};
    m["results"] = {{"f_initial", result.f_initial}, {"f_star", result.f}, {"objective_trace", result.run.trace}};
    std::cout << "f(j=0) " << result.f_initial << "\nf* " << result.f << "\n";
    final_state = dynamics::forward_flow(problem, result.yank, false).states.back();
  }
  if (problem.mesh.dimension == 2) {
    io::write_svg_frame(cfg.out / "registration.svg", problem.mesh, final_state, target_surfaces(problem));
    m["outputs"].push_back("registration.svg");
  }
  io::write_json(cfg.out / "manifest.json", m);
  return kSuccess;
}

int cmd_sensitivity(const RunConfig& cfg) {
  require_targets(cfg);
  if (cfg.sweep_values.empty()) throw ValidationError("sensitivity needs 'sweep.values'");
  static const std::set<std::string> moduli = {"lambda", "mu", "lambda_tan", "mu_tan", "mu_tsv", "mu_ang"};
  if (cfg.sweep_parameter != "radius" && !moduli.count(cfg.sweep_parameter))
    throw ValidationError("sweep parameter must be 'radius' or an elastic modulus name");
  Inputs in = load_inputs(cfg);
  const dynamics::Problem base = make_problem(cfg, in);
  inverse::OptimizerConfig opt = cfg.optimizer;
  opt.rng_seed = cfg.seed;
  const int d = base.mesh.dimension;

  DirectoryLock lock(cfg.out);
  std::ofstream csv(cfg.out / "sensitivity.csv");
  if (!csv) throw IoError("cannot write sensitivity.csv");
  csv << "parameter,value,cx,cy" << (d == 3 ? ",cz" : "") << ",h,f,status\n" << std::setprecision(17);
  std::vector<double> xs, hs;
  json rows = json::array();
  int failures = 0;
  for (double value : cfg.sweep_values) {
    dynamics::Problem problem = base;
    double radius = cfg.radius;
    if (cfg.sweep_parameter == "radius") radius = value;
    else if (cfg.sweep_parameter == "lambda") problem.elastic.lambda = value;
    else if (cfg.sweep_parameter == "mu") problem.elastic.mu = value;
    else if (cfg.sweep_parameter == "lambda_tan") problem.elastic.lambda_tan = value;
    else if (cfg.sweep_parameter == "mu_tan") problem.elastic.mu_tan = value;
    else if (cfg.sweep_parameter == "mu_tsv") problem.elastic.mu_tsv = value;
    else problem.elastic.mu_ang = value;
    csv << cfg.sweep_parameter << ',' << value;
    try {
      const auto result = inverse::solve_parametric(problem, radius, opt);
      const Eigen::VectorXd th = result.theta.theta();
      for (Index i = 0; i < th.size(); ++i) csv << ',' << th[i];
      csv << ',' << result.f << ",ok\n";
      rows.push_back({{"value", value}, {"theta_star", to_std(th)}, {"f_star", result.f}, {"status", "ok"}});
      if (th[d] > 0.0) {
        xs.push_back(value);
        hs.push_back(th[d]);
      }
    } catch (const Error& e) {
      ++failures;
      for (int i = 0; i <= d + 1; ++i) csv << ',';
      csv << '"' << e.what() << "\"\n";
      rows.push_back({{"value", value}, {"status", e.what()}});
    }
    csv.flush();
  }
  json m = manifest(cfg);
  m["outputs"] = {"sensitivity.csv"};
  m["results"] = {{"sweep", rows}};
  if (cfg.sweep_parameter == "radius" && xs.size() >= 2) {
    const double slope = inverse::fit_loglog_slope(xs, hs);
    m["results"]["loglog_slope"] = slope;
    std::cout << "log-log slope of h* vs r: " << slope << "\n";
  }
  io::write_json(cfg.out / "manifest.json", m);
  return failures == 0 ? kSuccess : kNumericalFailure;
}

}  // namespace

void RunConfig::validate() const {
  kernel.validate();
  elastic.validate();
  solver.validate();
  varifold.validate();
  optimizer.validate();
  if (mode != "parametric" && mode != "free") throw ValidationError("mode must be 'parametric' or 'free'");
  if (templ.name != "sine" && templ.name != "mixsin" && templ.name != "flat")
    throw ValidationError("template must be one of sine, mixsin, flat");
  if (!(radius > 0.0)) throw ValidationError("radius must be > 0");
  if (theta) theta->validate();
}

RunConfig parse_config(const json& doc, const path& base_dir) {
  check_keys(doc, "config",
             {"mesh_file", "template", "kernel", "elastic", "solver", "varifold", "optimizer", "mode", "control",
              "target_layers", "targets", "radius", "sweep", "frames", "seed", "out"});
  RunConfig cfg;
  if (doc.contains("mesh_file")) cfg.mesh_file = resolve(base_dir, doc["mesh_file"].get<std::string>());
  if (doc.contains("template")) parse_template(doc["template"], cfg.templ);
  if (doc.contains("kernel")) {
    check_keys(doc["kernel"], "kernel", {"sigma", "jitter"});
    read(doc["kernel"], "sigma", cfg.kernel.sigma);
    read(doc["kernel"], "jitter", cfg.kernel.jitter);
  }
  if (doc.contains("elastic")) parse_elastic(doc["elastic"], cfg.elastic);
  if (doc.contains("solver")) {
    check_keys(doc["solver"], "solver", {"omega", "steps", "final_time"});
    read(doc["solver"], "omega", cfg.solver.omega);
    read(doc["solver"], "steps", cfg.solver.steps);
    read(doc["solver"], "final_time", cfg.solver.final_time);
  }
  if (doc.contains("varifold")) {
    check_keys(doc["varifold"], "varifold", {"tau"});
    read(doc["varifold"], "tau", cfg.varifold.tau);
  }
  if (doc.contains("optimizer")) parse_optimizer(doc["optimizer"], cfg.optimizer);
  read(doc, "mode", cfg.mode);
  if (doc.contains("control")) {
    const json& c = doc["control"];
    check_keys(c, "control", {"theta", "free_yank"});
    if (c.contains("theta")) {
      try {
        cfg.theta = io::theta_from_json(c["theta"]);
      } catch (const IoError& e) {
        throw ValidationError(e.what());
      }
    }
    if (c.contains("free_yank")) cfg.free_yank_file = resolve(base_dir, c["free_yank"].get<std::string>());
  }
  read(doc, "target_layers", cfg.target_layers);
  if (doc.contains("targets")) {
    if (!doc["targets"].is_array()) throw ValidationError("targets must be an array");
    for (const auto& t : doc["targets"]) {
      check_keys(t, "targets[]", {"layer", "file"});
      TargetFile tf;
      read(t, "layer", tf.layer);
      std::string file;
      read(t, "file", file);
      if (file.empty()) throw ValidationError("each target needs a 'file'");
      tf.file = resolve(base_dir, file);
      cfg.targets.push_back(tf);
    }
  }
  read(doc, "radius", cfg.radius);
  if (doc.contains("sweep")) {
    check_keys(doc["sweep"], "sweep", {"parameter", "values"});
    read(doc["sweep"], "parameter", cfg.sweep_parameter);
    read(doc["sweep"], "values", cfg.sweep_values);
  }
  read(doc, "frames", cfg.frames);
  read(doc, "seed", cfg.seed);
  if (doc.contains("out")) cfg.out = resolve(base_dir, doc["out"].get<std::string>());
  return cfg;
}

json config_to_json(const RunConfig& cfg) {
  const auto& e = cfg.elastic;
  const auto& o = cfg.optimizer;
  json doc = {
      {"template", template_to_json(cfg.templ)},
      {"kernel", {{"sigma", cfg.kernel.sigma}, {"jitter", cfg.kernel.jitter}}},
      {"elastic",
       {{"model", e.model == elasticity::Model::layered ? "layered" : "isotropic"},
        {"lambda", e.lambda},
        {"mu", e.mu},
        {"lambda_tan", e.lambda_tan},
        {"mu_tan", e.mu_tan},
        {"mu_tsv", e.mu_tsv},
        {"mu_ang", e.mu_ang},
        {"beta", e.beta}}},
      {"solver", {{"omega", cfg.solver.omega}, {"steps", cfg.solver.steps}, {"final_time", cfg.solver.final_time}}},
      {"varifold", {{"tau", cfg.varifold.tau}}},
      {"optimizer",
       {{"max_iters", o.max_iters},
        {"grad_tol", o.grad_tol},
        {"wolfe_c1", o.wolfe_c1},
        {"wolfe_c2", o.wolfe_c2},
        {"lbfgs_memory", o.lbfgs_memory},
        {"n_starts", o.n_starts},
        {"threads", o.threads},
        {"theta_box", {{"lo", to_std(o.theta_box.lo)}, {"hi", to_std(o.theta_box.hi)}}}}},
      {"mode", cfg.mode},
      {"radius", cfg.radius},
      {"frames", cfg.frames},
      {"seed", cfg.seed},
      {"out", cfg.out.string()}};
  if (cfg.mesh_file) doc["mesh_file"] = cfg.mesh_file->string();
  json control = json::object();
  if (cfg.theta) control["theta"] = io::theta_to_json(*cfg.theta);
  if (cfg.free_yank_file) control["free_yank"] = cfg.free_yank_file->string();
  if (!control.empty()) doc["control"] = control;
  if (!cfg.target_layers.empty()) doc["target_layers"] = cfg.target_layers;
  if (!cfg.targets.empty()) {
    json targets = json::array();
    for (const auto& t : cfg.targets) targets.push_back({{"layer", t.layer}, {"file", t.file.string()}});
    doc["targets"] = targets;
  }
  if (!cfg.sweep_values.empty()) doc["sweep"] = {{"parameter", cfg.sweep_parameter}, {"values", cfg.sweep_values}};
  return doc;
}

mesh::LayeredMesh build_template(const TemplateConfig& cfg) {
  if (cfg.name == "sine") return mesh::build_sine_template(cfg.sine);
  if (cfg.name == "mixsin") return mesh::build_mixsin_template(cfg.mixsin);
  if (cfg.name == "flat") return mesh::build_flat_template(cfg.flat);
  throw ValidationError("unknown template '" + cfg.name + "'");
}

int run(int argc, char** argv) {
  CLI::App app{"Yank-driven layered shape flows: simulation and inverse registration"};
  app.require_subcommand(1, 1);
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out, templ, mode;
  std::optional<Index> n;
  std::optional<int> layers, steps;
  std::optional<double> omega;
  for (const char* name : {"mesh-gen", "simulate", "invert", "sensitivity"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_file, "JSON run configuration")->required();
    sub->add_option("--seed", seed, "random seed for multistart sampling");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--template", templ, "template generator: sine, mixsin or flat");
    sub->add_option("--n", n, "points per layer");
    sub->add_option("--layers", layers, "number of layers");
    sub->add_option("--omega", omega, "kernel regularization weight");
    sub->add_option("--steps", steps, "time steps");
    sub->add_option("--mode", mode, "control model")->check(CLI::IsMember({"free", "parametric"}));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kUsageError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  RunConfig cfg;
  try {
    const path config_path(config_file);
    cfg = parse_config(io::read_json(config_path), config_path.parent_path());
    cfg.command = command;
    if (seed) cfg.seed = *seed;
    if (out) cfg.out = *out;
    if (templ) cfg.templ.name = *templ;
    if (n) cfg.templ.sine.points = cfg.templ.mixsin.points = cfg.templ.flat.points = *n;
    if (layers) cfg.templ.sine.layers = cfg.templ.mixsin.layers = cfg.templ.flat.layers = *layers;
    if (omega) cfg.solver.omega = *omega;
    if (steps) cfg.solver.steps = *steps;
    if (mode) cfg.mode = *mode;
    cfg.optimizer.rng_seed = cfg.seed;
    cfg.validate();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const json::exception& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (command == "mesh-gen") return cmd_mesh_gen(cfg);
    if (command == "simulate") return cmd_simulate(cfg);
    if (command == "invert") return cmd_invert(cfg);
    return cmd_sensitivity(cfg);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  }
}

}  // namespace yankflow::cli
