#pragma once

#include "yankflow/inverse.hpp"
#include "yankflow/io.hpp"
#include "yankflow/templates.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace yankflow::cli {

enum ExitCode { kSuccess = 0, kNumericalFailure = 1, kUsageError = 2 };

struct TemplateConfig {
  std::string name = "sine";  // sine | mixsin | flat
  mesh::SineTemplate sine;
  mesh::MixSinTemplate mixsin;
  mesh::FlatTemplate flat;
};

struct TargetFile {
  int layer = 0;
  io::fs::path file;
};

/// Effective configuration of one run: file values merged with CLI overrides.
struct RunConfig {
  std::string command;
  std::optional<io::fs::path> mesh_file;  // takes precedence over the template generator
  TemplateConfig templ;
  kernel::KernelConfig kernel;
  elasticity::ElasticParams elastic;
  dynamics::SolverConfig solver;
  varifold::VarifoldConfig varifold;
  inverse::OptimizerConfig optimizer;
  std::string mode = "parametric";  // parametric | free
  std::optional<yank::PotentialParams> theta;
  std::optional<io::fs::path> free_yank_file;
  std::vector<int> target_layers;  // simulate: exported layers; default bottom and top
  std::vector<TargetFile> targets;  // invert / sensitivity
  double radius = 0.25;
  std::string sweep_parameter = "radius";
  std::vector<double> sweep_values;
  bool frames = true;
  std::uint64_t seed = 0;
  io::fs::path out = "out";

  void validate() const;
};

/// Parses a config document; relative paths resolve against base_dir.
RunConfig parse_config(const io::json& doc, const io::fs::path& base_dir);
io::json config_to_json(const RunConfig& cfg);

mesh::LayeredMesh build_template(const TemplateConfig& cfg);

/// Entry point used by the executable. Returns the process exit code.
int run(int argc, char** argv);

}  // namespace yankflow::cli
