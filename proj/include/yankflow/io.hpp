#pragma once

#include "yankflow/dynamics.hpp"
#include "yankflow/inverse.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>

namespace yankflow::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr const char* kFormatVersion = "1";

json mesh_to_json(const mesh::LayeredMesh& mesh);
mesh::LayeredMesh mesh_from_json(const json& doc);

json surface_to_json(const varifold::BoundarySurface& surface);
varifold::BoundarySurface surface_from_json(const json& doc);

/// [N_t][K][d] nested arrays.
json free_yank_to_json(const yank::FreeYank& yank);
yank::FreeYank free_yank_from_json(const json& doc);

/// {"c": [...], "h": h, "r": r}
json theta_to_json(const yank::PotentialParams& theta);
yank::PotentialParams theta_from_json(const json& doc);

json report_to_json(const inverse::ParametricResult& result);

/// Reads a JSON document; throws IoError on missing files or parse errors.
json read_json(const fs::path& path);
/// Writes a JSON document (two-space indent, trailing newline).
void write_json(const fs::path& path, const json& doc);

void write_mesh(const fs::path& path, const mesh::LayeredMesh& mesh);
mesh::LayeredMesh read_mesh(const fs::path& path);
void write_surface(const fs::path& path, const varifold::BoundarySurface& surface);
varifold::BoundarySurface read_surface(const fs::path& path);

/// CSV with header step,vertex_id,x,y[,z]; one row per vertex and state.
void write_trajectory_csv(const fs::path& path, const std::vector<Field>& states, int dim);

/// Layer polylines of every state as one SVG per state (2D only).
void write_svg_frame(const fs::path& path, const mesh::LayeredMesh& mesh, const Field& q,
                     const std::vector<varifold::BoundarySurface>& overlays = {});

}  // namespace yankflow::io
