#include "doctest.h"

#include <yankflow/cli.hpp>
#include <yankflow/io.hpp>

#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace yankflow;
namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name)
      : dir(fs::temp_directory_path() / ("yankflow_cli_" + name + "_" + std::to_string(::getpid()))) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  fs::path config(const io::json& doc, const std::string& name = "config.json") const {
    io::write_json(dir / name, doc);
    return dir / name;
  }
};

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "yankflow");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

io::json small_config() {
  return {{"template", {{"name", "sine"}, {"points", 20}, {"layers", 3}}},
          {"kernel", {{"sigma", 0.2}}},
          {"elastic", {{"model", "layered"}, {"lambda_tan", 0.0}, {"mu_tan", 1.0}, {"mu_tsv", 1.0}, {"mu_ang", 1.0}}},
          {"solver", {{"omega", 0.1}, {"steps", 5}}},
          {"varifold", {{"tau", 0.3}}},
          {"control", {{"theta", {{"c", {1.5, 0.5}}, {"h", 1.0}, {"r", 0.3}}}}},
          {"radius", 0.3}};
}

}  // namespace

TEST_CASE("mesh-gen writes the requested template deterministically") {
  Scratch s("meshgen");
  const auto cfg = s.config(io::json::object());
  const auto out = s.dir / "out";
  CHECK(run({"mesh-gen", "--config", cfg.string(), "--template", "sine", "--n", "60", "--layers", "5", "--out",
             out.string()}) == 0);
  const auto mesh = io::read_mesh(out / "mesh.json");
  CHECK(mesh.vertex_count() == 300);
  const auto manifest = io::read_json(out / "manifest.json");
  CHECK(manifest["config"]["template"]["points"] == 60);
  CHECK(manifest["config"]["template"]["layers"] == 5);
  const std::string first = slurp(out / "mesh.json");
  CHECK(run({"mesh-gen", "--config", cfg.string(), "--n", "60", "--layers", "5", "--out", out.string()}) == 0);
  CHECK(slurp(out / "mesh.json") == first);
  CHECK(!fs::exists(out / ".yankflow.lock"));
}

TEST_CASE("usage errors exit with code 2") {
  Scratch s("usage");
  const auto cfg = s.config(io::json::object());
  CHECK(run({"mesh-gen", "--config", cfg.string(), "--layers", "1", "--out", (s.dir / "a").string()}) == 2);
  CHECK(run({"mesh-gen", "--config", (s.dir / "missing.json").string()}) == 2);
  CHECK(run({"mesh-gen"}) == 2);
  CHECK(run({"frobnicate", "--config", cfg.string()}) == 2);
  CHECK(run({"simulate", "--config", cfg.string(), "--mode", "other"}) == 2);
  const auto unknown = s.config({{"kernal", {{"sigma", 0.2}}}}, "unknown.json");
  CHECK(run({"mesh-gen", "--config", unknown.string(), "--out", (s.dir / "b").string()}) == 2);
  const auto bad_omega = s.config({{"solver", {{"omega", -1.0}}}}, "omega.json");
  CHECK(run({"mesh-gen", "--config", bad_omega.string(), "--out", (s.dir / "c").string()}) == 2);
}

TEST_CASE("an existing lock refuses the output directory") {
  Scratch s("lock");
  const auto cfg = s.config(io::json::object());
  fs::create_directories(s.dir / "out");
  std::ofstream(s.dir / "out" / ".yankflow.lock") << "busy";
  CHECK(run({"mesh-gen", "--config", cfg.string(), "--out", (s.dir / "out").string()}) == 2);
  CHECK(!fs::exists(s.dir / "out" / "mesh.json"));
}

TEST_CASE("zero control simulation keeps every vertex") {
  Scratch s("zero");
  auto doc = small_config();
  doc["control"]["theta"]["h"] = 0.0;
  const auto cfg = s.config(doc);
  const auto out = s.dir / "out";
  REQUIRE(run({"simulate", "--config", cfg.string(), "--out", out.string()}) == 0);
  std::ifstream in(out / "trajectory.csv");
  std::string line;
  std::getline(in, line);
  std::map<std::string, std::string> first;
  int final_rows = 0;
  while (std::getline(in, line)) {
    const auto a = line.find(','), b = line.find(',', a + 1);
    const std::string step = line.substr(0, a), id = line.substr(a + 1, b - a - 1), coords = line.substr(b + 1);
    if (step == "0") first[id] = coords;
    if (step == "5") {
      CHECK(first[id] == coords);
      ++final_rows;
    }
  }
  CHECK(final_rows == 60);
  CHECK(fs::exists(out / "target_layer_0.json"));
  CHECK(fs::exists(out / "target_layer_2.json"));
  CHECK(fs::exists(out / "frames" / "frame_005.svg"));
  CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("simulate then invert recovers the parameters") {
  Scratch s("roundtrip");
  const auto sim_cfg = s.config(small_config(), "sim.json");
  const auto sim_out = s.dir / "sim";
  REQUIRE(run({"simulate", "--config", sim_cfg.string(), "--out", sim_out.string(), "--seed", "3"}) == 0);
  const std::string trajectory = slurp(sim_out / "trajectory.csv");
  REQUIRE(run({"simulate", "--config", sim_cfg.string(), "--out", (s.dir / "sim2").string(), "--seed", "3"}) == 0);
  CHECK(slurp(s.dir / "sim2" / "trajectory.csv") == trajectory);

  auto inv = small_config();
  inv.erase("control");
  inv["optimizer"] = {{"n_starts", 3}};
  inv["targets"] = {{{"layer", 0}, {"file", "sim/target_layer_0.json"}}, {{"layer", 2}, {"file", "sim/target_layer_2.json"}}};
  const auto inv_cfg = s.config(inv, "inv.json");
  const auto inv_out = s.dir / "inv";
  REQUIRE(run({"invert", "--config", inv_cfg.string(), "--out", inv_out.string(), "--seed", "1"}) == 0);
  const auto theta = io::theta_from_json(io::read_json(inv_out / "theta.json"));
  CHECK(std::abs(theta.center[0] - 1.5) <= 1e-2);
  CHECK(std::abs(theta.center[1] - 0.5) <= 1e-2);
  CHECK(std::abs(theta.height - 1.0) <= 1e-2);
  const auto report = io::read_json(inv_out / "report.json");
  CHECK(report["per_start"].size() == 3);
  const auto manifest = io::read_json(inv_out / "manifest.json");
  CHECK(manifest["config"]["seed"] == 1);
  CHECK(manifest["config"]["optimizer"]["n_starts"] == 3);

  // the same run again is reproducible
  REQUIRE(run({"invert", "--config", inv_cfg.string(), "--out", (s.dir / "inv2").string(), "--seed", "1"}) == 0);
  CHECK(slurp(s.dir / "inv2" / "theta.json") == slurp(inv_out / "theta.json"));

  // one-point radius sweep at the true radius
  auto sweep = inv;
  sweep["sweep"] = {{"parameter", "radius"}, {"values", {0.3}}};
  const auto sweep_cfg = s.config(sweep, "sweep.json");
  REQUIRE(run({"sensitivity", "--config", sweep_cfg.string(), "--out", (s.dir / "sweep").string(), "--seed", "1"}) == 0);
  const std::string csv = slurp(s.dir / "sweep" / "sensitivity.csv");
  CHECK(csv.find("ok") != std::string::npos);

  // free mode registration with a small budget
  auto free = inv;
  free["mode"] = "free";
  free["optimizer"] = {{"max_iters", 15}};
  const auto free_cfg = s.config(free, "free.json");
  REQUIRE(run({"invert", "--config", free_cfg.string(), "--out", (s.dir / "free").string()}) == 0);
  const auto free_report = io::read_json(s.dir / "free" / "report.json");
  CHECK(free_report["f_star"].get<double>() < free_report["f_initial"].get<double>());
  CHECK(fs::exists(s.dir / "free" / "free_yank.json"));
}

TEST_CASE("missing target file leaves no outputs") {
  Scratch s("missing");
  auto doc = small_config();
  doc["targets"] = {{{"layer", 0}, {"file", "nowhere.json"}}};
  const auto cfg = s.config(doc);
  const auto out = s.dir / "out";
  CHECK(run({"invert", "--config", cfg.string(), "--out", out.string()}) == 2);
  CHECK((!fs::exists(out) || fs::is_empty(out)));
}

TEST_CASE("flow breakdown is a numerical failure") {
  Scratch s("breakdown");
  auto doc = small_config();
  doc["control"]["theta"]["h"] = 500.0;
  doc["solver"]["steps"] = 1;
  const auto cfg = s.config(doc);
  CHECK(run({"simulate", "--config", cfg.string(), "--out", (s.dir / "out").string()}) == 1);
}
