#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "potlab/errors.hpp"
#include "potlab/tools/io.hpp"
#include "potlab/tools/runner.hpp"
#include "potlab/tools/suite.hpp"
#include "prop.hpp"

using namespace potlab;
using potlab::cli::json;
using potlab::testing::Gen;
namespace fs = std::filesystem;

namespace {

class Scratch : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("potlab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  void write(const std::string& name, const std::string& text) const { std::ofstream(dir / name) << text; }

  fs::path dir;
};

bool names(const std::vector<cli::Diagnostic>& diags, const std::string& field) {
  return std::any_of(diags.begin(), diags.end(), [&](const cli::Diagnostic& d) { return d.field == field; });
}

}  // namespace

TEST(MeasureIo, RoundTripsAtomsAndDensity) {
  Gen g(1, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = g.integer(1, 3);
    std::vector<Atom> atoms;
    for (int i = 0; i < g.integer(0, 4); ++i) atoms.push_back({g.point(n, -1.0, 1.0), g.uniform(-2.0, 2.0)});
    std::optional<DensityGrid> density;
    if (trial % 2 == 0) {
      const GridSpec grid(g.point(n, -1.0, 0.0), g.uniform(0.1, 0.3), std::vector<int>(n, 3));
      DensityGrid d{grid, {}};
      for (std::size_t f = 0; f < grid.cell_count(); ++f) d.values.push_back(g.uniform(0.0, 1.0));
      density = std::move(d);
    }
    const RadonMeasure mu(n, atoms, density);
    const RadonMeasure back = io::measure_from_json(json::parse(io::measure_to_json(mu).dump()));
    ASSERT_EQ(back.dimension(), n);
    ASSERT_EQ(back.atoms().size(), mu.atoms().size());
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      EXPECT_EQ(back.atoms()[i].location, mu.atoms()[i].location);
      EXPECT_EQ(back.atoms()[i].weight, mu.atoms()[i].weight);
    }
    ASSERT_EQ(back.has_density(), mu.has_density());
    if (mu.has_density()) {
      EXPECT_TRUE(back.density()->grid == mu.density()->grid);
      EXPECT_EQ(back.density()->values, mu.density()->values);
    }
  }
}

TEST(MeasureIo, ParseErrorsNameTheField) {
  EXPECT_THROW(io::measure_from_json(json::parse(R"({"atoms": []})")), ParseError);
  try {
    io::measure_from_json(json::parse(R"({"dimension": 2, "atoms": [[[0, 0], 1], [[1], 1]]})"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("atoms[1]"), std::string::npos) << e.what();
  }
  EXPECT_THROW(io::measure_from_json(json::parse(R"({"dimension": 2, "atoms": [[[0, 0], "w"]]})")), ParseError);
}

TEST(PointsCsv, HeaderCommentsAndErrors) {
  std::istringstream in("# comment\nx0,x1\n1,2\n\n  3.5, -4\n");
  const auto pts = io::read_points_csv(in, 2);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[1], (Vec{3.5, -4.0}));
  std::istringstream bad("1,2\n1,2,3\n");
  EXPECT_THROW(io::read_points_csv(bad, 2), ParseError);
  std::istringstream junk("1,2\n1,zz\n");
  EXPECT_THROW(io::read_points_csv(junk, 2), ParseError);
}

TEST(FieldCsv, OneRowPerPoint) {
  FieldSample f = FieldSample::zeros(FieldKind::gradient, {Vec{1.0, 2.0}, Vec{3.0, 4.0}}, 2);
  f.values = {5, 6, 7, 8};
  std::ostringstream out;
  io::write_field_csv(out, f);
  EXPECT_EQ(out.str(), "x0,x1,v0,v1\n1,2,5,6\n3,4,7,8\n");
}

TEST(Cubes, DiscretizationCountsCells) {
  const auto cubes = io::cubes_from_json(json::parse(R"({"dimension": 2, "cubes": [{"center": [0, 0], "side": 0.5}]})"));
  EXPECT_EQ(io::discretize_cubes(cubes, 1.0 / 16).size(), 64u);
  EXPECT_EQ(io::discretize_cubes(cubes, 1.0 / 32).size(), 256u);
  const auto overlap = io::cubes_from_json(
      json::parse(R"({"dimension": 2, "cubes": [{"center": [0, 0], "side": 0.5}, {"center": [0.25, 0], "side": 0.5}]})"));
  EXPECT_EQ(io::discretize_cubes(overlap, 1.0 / 16).size(), 96u);
  EXPECT_THROW(io::discretize_cubes(cubes, 4.0), InvalidArgument);
  EXPECT_THROW(io::cubes_from_json(json::parse(R"({"dimension": 2, "cubes": [{"center": [0, 0], "side": -1}]})")),
               ParseError);
}

TEST_F(Scratch, ValidateNamesOffendingFields) {
  write("set.json", R"({"dimension": 2, "cubes": [{"center": [0, 0], "side": 0.5}]})");
  EXPECT_TRUE(cli::validate({{"subcommand", "capacity"}, {"set", "set.json"}, {"mesh", 0.0625}}, dir).empty());

  const auto neg = cli::validate({{"subcommand", "capacity"}, {"set", "set.json"}, {"mesh", -0.1}}, dir);
  ASSERT_EQ(neg.size(), 1u);
  EXPECT_EQ(neg[0].field, "mesh");

  const auto missing = cli::validate(
      {{"subcommand", "diff"}, {"measure", "absent.json"}, {"center", {0, 0}}, {"radii", {0.2, 0.1}}}, dir);
  ASSERT_EQ(missing.size(), 1u);
  EXPECT_EQ(missing[0].field, "measure");
  EXPECT_NE(missing[0].message.find((dir / "absent.json").string()), std::string::npos);

  EXPECT_TRUE(names(cli::validate({{"subcommand", "nope"}}, dir), "subcommand"));
  EXPECT_TRUE(names(cli::validate(json::array(), dir), "config"));
  EXPECT_TRUE(names(cli::validate({{"subcommand", "capacity"}, {"set", "set.json"}, {"mesh", 0.1}, {"seed", -1}}, dir),
                    "seed"));
  EXPECT_TRUE(names(cli::validate({{"subcommand", "suite"}, {"criteria", {0}}}, dir), "criteria"));
  EXPECT_TRUE(cli::validate({{"subcommand", "suite"}}, dir).empty());
}

TEST_F(Scratch, ValidateRanges) {
  write("m.json", R"({"dimension": 2, "atoms": [[[1, 1], 1]]})");
  const json diff = {{"subcommand", "diff"}, {"measure", "m.json"}, {"center", {0, 0}}, {"radii", {0.2, 0.1}}};
  EXPECT_TRUE(cli::validate(diff, dir).empty());
  json d = diff;
  d["radii"] = {0.1, 0.2};
  EXPECT_TRUE(names(cli::validate(d, dir), "radii"));
  d = diff;
  d["mesh_ratio"] = 4;
  EXPECT_TRUE(names(cli::validate(d, dir), "mesh_ratio"));
  d = diff;
  d["kernel"] = "gauss";
  EXPECT_TRUE(names(cli::validate(d, dir), "kernel"));
  d = diff;
  d["schedule"] = {{"kind", "geometric"}, {"base", 1.0}, {"ratio", 2.0}, {"count", 10}};
  EXPECT_TRUE(names(cli::validate(d, dir), "schedule"));

  const json lip = {{"subcommand", "lipschitz"}, {"measure", "m.json"}, {"window", {{"lo", {0, 0}}, {"hi", {2, 2}}}}};
  EXPECT_TRUE(cli::validate(lip, dir).empty());
  json l = lip;
  l["window"].erase("hi");
  EXPECT_TRUE(names(cli::validate(l, dir), "window.hi"));
  l = lip;
  l["pairs"] = 0;
  EXPECT_TRUE(names(cli::validate(l, dir), "pairs"));

  const json ls = {{"subcommand", "levelset"}, {"measure", "m.json"}, {"level", 1.0}, {"bands", {0.2, 0.1}}};
  EXPECT_TRUE(cli::validate(ls, dir).empty());
  json s = ls;
  s.erase("level");
  EXPECT_TRUE(names(cli::validate(s, dir), "level"));
}

TEST_F(Scratch, FieldOfUnitAtomIsOne) {
  write("delta.json", R"({"dimension": 3, "atoms": [[[0, 0, 0], 1.0]]})");
  write("points.csv", "x0,x1,x2\n1,0,0\n");
  const json cfg = {{"subcommand", "field"}, {"measure", "delta.json"}, {"points", "points.csv"}, {"kernel", "riesz"}};
  ASSERT_TRUE(cli::validate(cfg, dir).empty());
  const cli::RunResult r = cli::run(cfg, dir);
  EXPECT_EQ(r.exit_code, cli::kOk);
  EXPECT_EQ(r.csv, "x0,x1,x2,v0\n1,0,0,1\n");
  EXPECT_EQ(r.payload["toolkit"], "potlab");
  EXPECT_EQ(r.payload["version"], cli::kVersion);
  EXPECT_EQ(r.payload["config"]["seed"], 0);
  EXPECT_EQ(r.payload["config"]["schedule"]["kind"], "dyadic");
}

TEST_F(Scratch, CapacityIsMonotoneOnNestedSets) {
  const double sides[] = {0.25, 0.375, 0.5};
  double previous = 0.0;
  for (double side : sides) {
    write("set.json", json{{"dimension", 2}, {"cubes", {{{"center", {0.0, 0.0}}, {"side", side}}}}}.dump());
    const json cfg = {{"subcommand", "capacity"}, {"set", "set.json"}, {"mesh", 0.0625}};
    ASSERT_TRUE(cli::validate(cfg, dir).empty());
    const double value = cli::run(cfg, dir).payload["result"]["value"];
    EXPECT_GT(value, previous) << side;
    previous = value;
  }
}

TEST_F(Scratch, PayloadIsDeterministic) {
  write("m.json", R"({"dimension": 2, "atoms": [[[1.5, 0], 1.0], [[0, -1.5], 0.5]]})");
  const json cfg = {{"subcommand", "lipschitz"},
                    {"measure", "m.json"},
                    {"window", {{"lo", {-2, -2}}, {"hi", {2, 2}}}},
                    {"pairs", 50},
                    {"grid_cells", 16},
                    {"min_cells", 4},
                    {"seed", 7}};
  ASSERT_TRUE(cli::validate(cfg, dir).empty());
  const std::string a = cli::run(cfg, dir).payload.dump();
  const std::string b = cli::run(cfg, dir).payload.dump();
  EXPECT_EQ(a, b);
  EXPECT_EQ(json::parse(a)["result"]["seed"], 7);
  const json rep = cli::report(json::parse(a));
  EXPECT_TRUE(rep["header"].contains("timestamp"));
  EXPECT_EQ(rep["payload"].dump(), a);
}

TEST_F(Scratch, RunRaisesRangeErrors) {
  write("m.json", R"({"dimension": 2, "atoms": [[[1, 1], 1]]})");
  const json cfg = {{"subcommand", "diff"}, {"measure", "m.json"}, {"center", {0, 0, 0}}, {"radii", {0.2, 0.1}}};
  ASSERT_TRUE(cli::validate(cfg, dir).empty());
  EXPECT_THROW(cli::run(cfg, dir), InvalidArgument);
  write("broken.json", R"({"dimension": 2, "atoms": [[[1, 1]]]})");
  const json bad = {{"subcommand", "diff"}, {"measure", "broken.json"}, {"center", {0, 0}}, {"radii", {0.2, 0.1}}};
  EXPECT_THROW(cli::run(bad, dir), ParseError);
}

TEST(ErrorRecord, CarriesCodeAndDiagnostics) {
  const json e = cli::error_record(cli::kConfigError, "config", "bad", {{"mesh", "must be a positive number"}});
  EXPECT_EQ(e["error"]["code"], 2);
  EXPECT_EQ(e["error"]["diagnostics"][0]["field"], "mesh");
}

TEST(Suite, UnattainableCriterionIsReported) {
  const json cfg = {{"subcommand", "suite"}, {"criteria", {7}}};
  const cli::RunResult r = cli::run(cfg, fs::current_path());
  EXPECT_EQ(r.exit_code, cli::kSuiteFailed);
  const json& row = r.payload["result"]["criteria"][0];
  EXPECT_FALSE(row["passed"].get<bool>());
  EXPECT_TRUE(row.contains("known_unattainable"));
  EXPECT_FALSE(row.contains("seconds"));
  EXPECT_THROW(suite::run_criterion(11), InvalidArgument);
}
