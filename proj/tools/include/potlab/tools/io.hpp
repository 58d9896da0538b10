#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "json.hpp"

#include "potlab/capacity.hpp"
#include "potlab/differentiability.hpp"
#include "potlab/field.hpp"
#include "potlab/levelset.hpp"
#include "potlab/lipschitz.hpp"
#include "potlab/measures.hpp"

namespace potlab::io {

using nlohmann::json;

/// {dimension, atoms: [[[coords...], weight], ...], density: {origin, h, shape, values}}.
/// Throws ParseError on a malformed document.
RadonMeasure measure_from_json(const json& doc);
json measure_to_json(const RadonMeasure& mu);
RadonMeasure load_measure(const std::filesystem::path& path);
void save_measure(const std::filesystem::path& path, const RadonMeasure& mu);

/// Axis-aligned cube cut out of the lattice of side `mesh` anchored at the origin.
struct Cube {
  Vec center;
  double side = 0.0;
};

/// {dimension, cubes: [{center: [...], side}, ...]}.
std::vector<Cube> cubes_from_json(const json& doc);
std::vector<Cube> load_cubes(const std::filesystem::path& path);

/// Lattice cells of side `mesh` (anchored at 0) whose centers lie in some closed cube.
/// Throws InvalidArgument when no cell qualifies.
DiscreteSet discretize_cubes(const std::vector<Cube>& cubes, double mesh);

/// One point per line, `dim` comma-separated coordinates; blank lines and lines starting with
/// '#' are skipped. A first line that does not parse as numbers is taken as a header.
std::vector<Vec> read_points_csv(std::istream& in, int dim);
std::vector<Vec> load_points(const std::filesystem::path& path, int dim);

/// Header x0..x{N-1}, v0..v{C-1}, then one row per point.
void write_field_csv(std::ostream& out, const FieldSample& f);

json to_json(const CapacityEstimate& e);
json to_json(const DiffReport& r);
json to_json(const LipschitzReport& r);
json to_json(const LevelSetReport& r);
json to_json(const LevelSetDensityReport& r);

}  // namespace potlab::io
