#include "potlab/tools/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "potlab/errors.hpp"

namespace potlab::io {
namespace {

const json& field(const json& doc, const char* key, const std::string& where) {
  if (!doc.is_object() || !doc.contains(key)) throw ParseError(fmt::format("{}: missing field '{}'", where, key));
  return doc.at(key);
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(fmt::format("{}: expected a number", where));
  return v.get<double>();
}

Vec vec_from(const json& v, int dim, const std::string& where) {
  if (!v.is_array() || static_cast<int>(v.size()) != dim)
    throw ParseError(fmt::format("{}: expected {} coordinates", where, dim));
  Vec out(dim);
  for (int i = 0; i < dim; ++i) out[i] = number(v[i], where);
  return out;
}

json vec_json(const Vec& v) { return json(std::vector<double>(v.begin(), v.end())); }

int dimension_of(const json& doc, const std::string& where) {
  const json& d = field(doc, "dimension", where);
  if (!d.is_number_integer() || d.get<int>() < 1 || d.get<int>() > kMaxDim)
    throw ParseError(fmt::format("{}: dimension must be an integer in [1, {}]", where, kMaxDim));
  return d.get<int>();
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open '{}'", path.string()));
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

json optional_double(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json grid_json(const GridSpec& g) {
  return {{"origin", vec_json(g.origin())}, {"h", g.h()}, {"shape", g.shape()}};
}

}  // namespace

RadonMeasure measure_from_json(const json& doc) {
  const int n = dimension_of(doc, "measure");
  std::vector<Atom> atoms;
  if (doc.contains("atoms")) {
    const json& list = doc.at("atoms");
    if (!list.is_array()) throw ParseError("measure: 'atoms' must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = fmt::format("measure.atoms[{}]", i);
      const json& a = list[i];
      if (!a.is_array() || a.size() != 2) throw ParseError(where + ": expected [[coords...], weight]");
      atoms.push_back({vec_from(a[0], n, where), number(a[1], where)});
    }
  }
  std::optional<DensityGrid> density;
  if (doc.contains("density") && !doc.at("density").is_null()) {
    const json& d = doc.at("density");
    const Vec origin = vec_from(field(d, "origin", "measure.density"), n, "measure.density.origin");
    const double h = number(field(d, "h", "measure.density"), "measure.density.h");
    const json& shape = field(d, "shape", "measure.density");
    if (!shape.is_array() || static_cast<int>(shape.size()) != n)
      throw ParseError(fmt::format("measure.density.shape: expected {} extents", n));
    std::vector<int> ext;
    for (const json& e : shape) {
      if (!e.is_number_integer() || e.get<int>() < 1) throw ParseError("measure.density.shape: extents must be positive integers");
      ext.push_back(e.get<int>());
    }
    if (!(h > 0.0)) throw ParseError("measure.density.h: must be positive");
    const GridSpec grid(origin, h, ext);
    const json& values = field(d, "values", "measure.density");
    if (!values.is_array() || values.size() != grid.cell_count())
      throw ParseError(fmt::format("measure.density.values: expected {} values", grid.cell_count()));
    DensityGrid dg{grid, {}};
    dg.values.reserve(values.size());
    for (const json& v : values) dg.values.push_back(number(v, "measure.density.values"));
    density = std::move(dg);
  }
  try {
    return RadonMeasure(n, std::move(atoms), std::move(density));
  } catch (const InvalidArgument& e) {
    throw ParseError(fmt::format("measure: {}", e.what()));
  }
}

json measure_to_json(const RadonMeasure& mu) {
  json atoms = json::array();
  for (const Atom& a : mu.atoms()) atoms.push_back(json::array({vec_json(a.location), a.weight}));
  json doc{{"dimension", mu.dimension()}, {"atoms", atoms}};
  if (const auto& d = mu.density()) {
    json g = grid_json(d->grid);
    g["values"] = d->values;
    doc["density"] = g;
  }
  return doc;
}

RadonMeasure load_measure(const std::filesystem::path& path) {
  const json doc = read_json(path);
  try {
    return measure_from_json(doc);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void save_measure(const std::filesystem::path& path, const RadonMeasure& mu) {
  std::ofstream out(path);
  if (!out) throw ParseError(fmt::format("cannot write '{}'", path.string()));
  out << measure_to_json(mu).dump(2) << '\n';
}

std::vector<Cube> cubes_from_json(const json& doc) {
  const int n = dimension_of(doc, "set");
  const json& list = field(doc, "cubes", "set");
  if (!list.is_array() || list.empty()) throw ParseError("set: 'cubes' must be a nonempty array");
  std::vector<Cube> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string where = fmt::format("set.cubes[{}]", i);
    Cube c{vec_from(field(list[i], "center", where), n, where + ".center"),
           number(field(list[i], "side", where), where + ".side")};
    if (!(c.side > 0.0)) throw ParseError(where + ".side: must be positive");
    out.push_back(c);
  }
  return out;
}

std::vector<Cube> load_cubes(const std::filesystem::path& path) {
  const json doc = read_json(path);
  try {
    return cubes_from_json(doc);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

DiscreteSet discretize_cubes(const std::vector<Cube>& cubes, double mesh) {
  if (cubes.empty()) throw InvalidArgument("cube list is empty");
  if (!(mesh > 0.0)) throw InvalidArgument("mesh must be positive");
  const int n = cubes.front().center.dim();
  std::vector<CellIndex> cells;
  for (const Cube& c : cubes) {
    if (c.center.dim() != n) throw InvalidArgument("cube dimensions differ");
    CellIndex lo{}, hi{};
    for (int i = 0; i < n; ++i) {
      lo[i] = static_cast<int>(std::floor((c.center[i] - c.side / 2) / mesh - 0.5)) - 1;
      hi[i] = static_cast<int>(std::ceil((c.center[i] + c.side / 2) / mesh - 0.5)) + 2;
    }
    GridSpec::for_each_in(n, lo, hi, [&](const CellIndex& k) {
      for (int i = 0; i < n; ++i)
        if (std::abs((k[i] + 0.5) * mesh - c.center[i]) > c.side / 2 * (1.0 + 1e-12)) return;
      cells.push_back(k);
    });
  }
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  if (cells.empty()) throw InvalidArgument("no lattice cell center lies in the cubes; refine the mesh");
  return DiscreteSet(Vec::zero(n), mesh, std::move(cells));
}

std::vector<Vec> read_points_csv(std::istream& in, int dim) {
  std::vector<Vec> out;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    bool ok = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) ok = false;
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (!ok) {
      if (first) {
        first = false;
        continue;
      }
      throw ParseError(fmt::format("points line {}: not a list of numbers", lineno));
    }
    first = false;
    if (static_cast<int>(vals.size()) != dim)
      throw ParseError(fmt::format("points line {}: expected {} coordinates, got {}", lineno, dim, vals.size()));
    Vec p(dim);
    for (int i = 0; i < dim; ++i) p[i] = vals[i];
    out.push_back(p);
  }
  return out;
}

std::vector<Vec> load_points(const std::filesystem::path& path, int dim) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open '{}'", path.string()));
  try {
    return read_points_csv(in, dim);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_field_csv(std::ostream& out, const FieldSample& f) {
  const int n = f.points.empty() ? 0 : f.points.front().dim();
  std::string header;
  for (int i = 0; i < n; ++i) header += fmt::format("{}x{}", i ? "," : "", i);
  for (int c = 0; c < f.components; ++c) header += fmt::format("{}v{}", n + c ? "," : "", c);
  out << header << '\n';
  for (std::size_t p = 0; p < f.size(); ++p) {
    std::string row;
    for (int i = 0; i < n; ++i) row += fmt::format("{}{}", i ? "," : "", f.points[p][i]);
    for (int c = 0; c < f.components; ++c) row += fmt::format("{}{}", n + c ? "," : "", f.at(p, c));
    out << row << '\n';
  }
}

json to_json(const CapacityEstimate& e) {
  return {{"value", e.value},
          {"mesh", e.mesh},
          {"direction", e.direction},
          {"certificate_max_constraint", e.certificate_max_constraint},
          {"constraint_points", e.constraint_points},
          {"variables", e.variables},
          {"constraints_used", e.constraints_used},
          {"symmetry_order", e.symmetry_order},
          {"iterations", e.iterations},
          {"weights", e.weights}};
}

json to_json(const DiffReport& r) {
  json details = json::array();
  for (const DiffRadius& d : r.details) {
    json levels = json::array();
    for (const DiffLevel& l : d.levels)
      levels.push_back({{"t", l.t},
                        {"cells", l.cells},
                        {"measure", l.measure},
                        {"capacity", optional_double(l.capacity)},
                        {"t_times_capacity", l.t_times_capacity}});
    details.push_back({{"r", d.r},
                       {"h", d.h},
                       {"ball_capacity", d.ball_capacity},
                       {"window_capacity", d.window_capacity},
                       {"index", d.index},
                       {"argsup_t", d.argsup_t},
                       {"levels", levels}});
  }
  return {{"center", vec_json(r.center)},
          {"gradient", vec_json(r.gradient)},
          {"radii", r.radii},
          {"per_radius_index", r.per_radius_index},
          {"verdict", r.verdict},
          {"mesh_ratio", r.mesh_ratio},
          {"lp_solves", r.lp_solves},
          {"details", details}};
}

json to_json(const LipschitzReport& r) {
  return {{"pairs_requested", r.pairs_requested},
          {"pairs_tested", r.pairs_tested},
          {"excluded_pairs", r.excluded_pairs},
          {"zero_denominator_pairs", r.zero_denominator_pairs},
          {"worst_ratio", r.worst_ratio},
          {"empirical_C", r.empirical_C},
          {"worst_pair", {{"x", vec_json(r.worst_pair.x)}, {"y", vec_json(r.worst_pair.y)}, {"ratio", r.worst_pair.ratio}}},
          {"weak_l1_of_I", r.weak_l1_of_I},
          {"weak_l1_fine", r.weak_l1_fine},
          {"refinement_drift", r.refinement_drift},
          {"seed", r.seed},
          {"sampler", r.sampler}};
}

json to_json(const LevelSetReport& r) {
  json dens = json::array();
  for (const auto& d : r.density_values) dens.push_back(optional_double(d));
  return {{"level", r.level},
          {"band", r.band},
          {"grid", grid_json(r.grid)},
          {"cells_in_band", r.cells_in_band},
          {"gradient_norms", r.gradient_norms},
          {"laplacian_values", r.laplacian_values},
          {"laplacian_from_stencil", r.laplacian_from_stencil},
          {"density_values", dens},
          {"band_volume", r.band_volume}};
}

json to_json(const LevelSetDensityReport& r) {
  json bands = json::array();
  for (const BandMass& b : r.bands)
    bands.push_back({{"band", b.band}, {"cells", b.cells}, {"mass", b.mass}, {"band_volume", b.band_volume}});
  return {{"level", r.level}, {"bands", bands}, {"verdict", r.verdict}};
}

}  // namespace potlab::io
