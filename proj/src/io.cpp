#include "yankflow/io.hpp"

#include "yankflow/errors.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace yankflow::io {

namespace {

json coordinates(const Field& f, int dim) {
  json rows = json::array();
  for (Index i = 0; i < f.size() / dim; ++i) {
    json row = json::array();
    for (int a = 0; a < dim; ++a) row.push_back(f[i * dim + a]);
    rows.push_back(std::move(row));
  }
  return rows;
}

Field read_coordinates(const json& rows, int dim) {
  if (!rows.is_array()) throw IoError("vertices must be an array of coordinate rows");
  Field f(static_cast<Index>(rows.size()) * dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != dim) throw IoError("vertex row has the wrong length");
    for (int a = 0; a < dim; ++a) f[static_cast<Index>(i) * dim + a] = rows[i][a].get<double>();
  }
  return f;
}

json cells(const std::vector<mesh::Cell>& list) {
  json out = json::array();
  for (const auto& c : list) out.push_back(c);
  return out;
}

std::vector<mesh::Cell> read_cells(const json& doc) {
  if (!doc.is_array()) throw IoError("cell list must be an array");
  std::vector<mesh::Cell> out;
  for (const auto& c : doc) out.push_back(c.get<mesh::Cell>());
  return out;
}

void check_version(const json& doc) {
  if (!doc.contains("version") || doc["version"] != kFormatVersion)
    throw IoError(std::string("unsupported or missing format version (expected \"") + kFormatVersion + "\")");
}

template <class Fn>
auto wrap_parse(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw IoError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

json mesh_to_json(const mesh::LayeredMesh& mesh) {
  json prisms = json::array();
  for (const auto& p : mesh.prisms)
    prisms.push_back({{"layer", p.layer}, {"bottom", p.bottom}, {"top", p.top}, {"orientation", p.orientation}});
  return {{"version", kFormatVersion},
          {"dimension", mesh.dimension},
          {"layers", mesh.layers},
          {"points_per_layer", mesh.points_per_layer},
          {"vertices", coordinates(mesh.vertices, mesh.dimension)},
          {"layer_cells", cells(mesh.layer_cells)},
          {"simplices", cells(mesh.simplices)},
          {"prism_map", mesh.simplex_prism},
          {"prisms", prisms},
          {"bottom_elements", cells(mesh.bottom_elements)},
          {"top_elements", cells(mesh.top_elements)}};
}

mesh::LayeredMesh mesh_from_json(const json& doc) {
  return wrap_parse("mesh", [&] {
    check_version(doc);
    mesh::LayeredMesh m;
    m.dimension = doc.at("dimension").get<int>();
    if (m.dimension != 2 && m.dimension != 3) throw IoError("mesh dimension must be 2 or 3");
    m.layers = doc.at("layers").get<int>();
    m.points_per_layer = doc.at("points_per_layer").get<Index>();
    m.vertices = read_coordinates(doc.at("vertices"), m.dimension);
    m.layer_cells = read_cells(doc.at("layer_cells"));
    m.simplices = read_cells(doc.at("simplices"));
    m.simplex_prism = doc.at("prism_map").get<std::vector<Index>>();
    for (const auto& p : doc.at("prisms")) {
      mesh::Prism prism;
      prism.layer = p.at("layer").get<int>();
      prism.bottom = p.at("bottom").get<mesh::Cell>();
      prism.top = p.at("top").get<mesh::Cell>();
      prism.orientation = p.at("orientation").get<double>();
      m.prisms.push_back(std::move(prism));
    }
    m.bottom_elements = read_cells(doc.at("bottom_elements"));
    m.top_elements = read_cells(doc.at("top_elements"));
    try {
      m.finalize();
    } catch (const ValidationError& e) {
      throw IoError(std::string("invalid mesh: ") + e.what());
    }
    return m;
  });
}

json surface_to_json(const varifold::BoundarySurface& s) {
  return {{"version", kFormatVersion},
          {"dimension", s.dimension},
          {"vertices", coordinates(s.vertices, s.dimension)},
          {"elements", cells(s.elements)}};
}

varifold::BoundarySurface surface_from_json(const json& doc) {
  return wrap_parse("surface", [&] {
    check_version(doc);
    varifold::BoundarySurface s;
    s.dimension = doc.at("dimension").get<int>();
    if (s.dimension != 2 && s.dimension != 3) throw IoError("surface dimension must be 2 or 3");
    s.vertices = read_coordinates(doc.at("vertices"), s.dimension);
    s.elements = read_cells(doc.at("elements"));
    try {
      s.validate();
    } catch (const ValidationError& e) {
      throw IoError(std::string("invalid surface: ") + e.what());
    }
    return s;
  });
}

json free_yank_to_json(const yank::FreeYank& yank) {
  json out = json::array();
  for (int k = 0; k < yank.intervals(); ++k) {
    json interval = json::array();
    for (Index s = 0; s < yank.simplices(); ++s) {
      const auto c = yank.coefficient(k, s);
      interval.push_back(std::vector<double>(c.data(), c.data() + c.size()));
    }
    out.push_back(std::move(interval));
  }
  return out;
}

yank::FreeYank free_yank_from_json(const json& doc) {
  return wrap_parse("free yank", [&] {
    if (!doc.is_array() || doc.empty() || !doc[0].is_array() || doc[0].empty() || !doc[0][0].is_array())
      throw IoError("free yank must be a non-empty [steps][simplices][dimension] array");
    const int steps = static_cast<int>(doc.size());
    const Index simplices = static_cast<Index>(doc[0].size());
    const int dim = static_cast<int>(doc[0][0].size());
    yank::FreeYank yank(steps, simplices, dim);
    for (int k = 0; k < steps; ++k) {
      if (static_cast<Index>(doc[k].size()) != simplices) throw IoError("free yank: ragged simplex dimension");
      for (Index s = 0; s < simplices; ++s) {
        const auto v = doc[k][s].get<std::vector<double>>();
        if (static_cast<int>(v.size()) != dim) throw IoError("free yank: ragged vector dimension");
        for (int a = 0; a < dim; ++a) yank.coefficient(k, s)[a] = v[a];
      }
    }
    return yank;
  });
}

json theta_to_json(const yank::PotentialParams& theta) {
  return {{"c", std::vector<double>(theta.center.data(), theta.center.data() + theta.center.size())},
          {"h", theta.height},
          {"r", theta.radius}};
}

yank::PotentialParams theta_from_json(const json& doc) {
  return wrap_parse("potential", [&] {
    yank::PotentialParams p;
    const auto c = doc.at("c").get<std::vector<double>>();
    p.center = Eigen::Map<const SmallVec>(c.data(), static_cast<Index>(c.size()));
    p.height = doc.at("h").get<double>();
    p.radius = doc.value("r", 0.25);
    try {
      p.validate();
    } catch (const ValidationError& e) {
      throw IoError(std::string("invalid potential: ") + e.what());
    }
    return p;
  });
}

json report_to_json(const inverse::ParametricResult& result) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json starts = json::array();
  for (const auto& s : result.starts) {
    starts.push_back({{"theta0", vec(s.theta0)},
                      {"theta_star", vec(s.theta_star)},
                      {"f_star", std::isfinite(s.f_star) ? json(s.f_star) : json(nullptr)},
                      {"iters", s.iterations},
                      {"status", s.status},
                      {"trace", s.trace}});
  }
  return {{"per_start", starts}, {"best_index", result.best_index}, {"theta_star", theta_to_json(result.theta)},
          {"f_star", result.f}};
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

void write_mesh(const fs::path& path, const mesh::LayeredMesh& mesh) { write_json(path, mesh_to_json(mesh)); }
mesh::LayeredMesh read_mesh(const fs::path& path) { return mesh_from_json(read_json(path)); }
void write_surface(const fs::path& path, const varifold::BoundarySurface& s) { write_json(path, surface_to_json(s)); }
varifold::BoundarySurface read_surface(const fs::path& path) { return surface_from_json(read_json(path)); }

void write_trajectory_csv(const fs::path& path, const std::vector<Field>& states, int dim) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "step,vertex_id,x,y" << (dim == 3 ? ",z" : "") << '\n';
  out << std::setprecision(17);
  for (std::size_t k = 0; k < states.size(); ++k)
    for (Index i = 0; i < states[k].size() / dim; ++i) {
      out << k << ',' << i;
      for (int a = 0; a < dim; ++a) out << ',' << states[k][i * dim + a];
      out << '\n';
    }
  if (!out) throw IoError("write failed for " + path.string());
}

void write_svg_frame(const fs::path& path, const mesh::LayeredMesh& mesh, const Field& q,
                     const std::vector<varifold::BoundarySurface>& overlays) {
  if (mesh.dimension != 2) throw ValidationError("SVG frames are only produced for 2D meshes");
  Eigen::Vector2d lo = Eigen::Vector2d::Constant(1e300), hi = Eigen::Vector2d::Constant(-1e300);
  for (Index i = 0; i < mesh.vertex_count(); ++i) {
    lo = lo.cwiseMin(q.segment<2>(2 * i));
    hi = hi.cwiseMax(q.segment<2>(2 * i));
  }
  const double pad = 0.05 * std::max(hi.x() - lo.x(), hi.y() - lo.y()) + 1e-9;
  lo.array() -= pad;
  hi.array() += pad;
  const double scale = 800.0 / (hi.x() - lo.x());
  auto px = [&](double x, double y) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << (x - lo.x()) * scale << ',' << (hi.y() - y) * scale;
    return s.str();
  };
  auto polyline = [&](const Field& pts, const std::vector<mesh::Cell>& elems, const char* style) {
    std::ostringstream s;
    for (const auto& e : elems)
      s << "  <polyline fill=\"none\" " << style << " points=\"" << px(pts[2 * e[0]], pts[2 * e[0] + 1]) << ' '
        << px(pts[2 * e[1]], pts[2 * e[1] + 1]) << "\"/>\n";
    return s.str();
  };
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\""
      << static_cast<int>((hi.y() - lo.y()) * scale + 0.5) << "\">\n";
  for (int l = 0; l < mesh.layers; ++l) {
    const auto surface = varifold::layer_surface(mesh, q, l);
    out << polyline(surface.vertices, surface.elements, "stroke=\"black\" stroke-width=\"1.5\"");
  }
  for (const auto& s : overlays)
    out << polyline(s.vertices, s.elements, "stroke=\"gray\" stroke-dasharray=\"6,4\" stroke-width=\"1.5\"");
  out << "</svg>\n";
}

}  // namespace yankflow::io
