#include "potlab/tools/runner.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "potlab/errors.hpp"
#include "potlab/kernels.hpp"
#include "potlab/operators.hpp"
#include "potlab/tools/io.hpp"
#include "potlab/tools/suite.hpp"

namespace potlab::cli {
namespace {

namespace fs = std::filesystem;

const std::set<std::string> kSubcommands{"field", "capacity", "diff", "lipschitz", "levelset", "suite"};
const std::set<std::string> kKernels{"riesz", "newtonian", "oscillating", "dipole"};
const std::set<std::string> kOperators{"potential",        "gradient",  "maximal", "truncated_singular",
                                       "maximal_singular", "dominating", "newtonian_gradient"};

bool needs_measure(const std::string& sub) { return sub != "capacity" && sub != "suite"; }
bool needs_kernel(const std::string& sub) { return sub == "field" || sub == "diff" || sub == "lipschitz"; }

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

class Checker {
 public:
  Checker(const json& cfg, const fs::path& base) : cfg_(cfg), base_(base) {}

  std::vector<Diagnostic> diagnostics;

  bool has(const std::string& key) const { return cfg_.contains(key) && !cfg_.at(key).is_null(); }

  void add(const std::string& field, const std::string& msg) { diagnostics.push_back({field, msg}); }

  void file(const std::string& key) {
    if (!has(key)) return add(key, "required path is missing");
    if (!cfg_.at(key).is_string()) return add(key, "must be a path string");
    const fs::path p = resolve(base_, cfg_.at(key).get<std::string>());
    if (!fs::is_regular_file(p)) add(key, fmt::format("file not found: {}", p.string()));
  }

  void positive(const std::string& key, bool required) {
    if (!has(key)) {
      if (required) add(key, "required number is missing");
      return;
    }
    const json& v = cfg_.at(key);
    if (!v.is_number() || !(v.get<double>() > 0.0) || !std::isfinite(v.get<double>())) add(key, "must be a positive number");
  }

  void number(const std::string& key, bool required) {
    if (!has(key)) {
      if (required) add(key, "required number is missing");
      return;
    }
    if (!cfg_.at(key).is_number()) add(key, "must be a number");
  }

  void integer(const std::string& key, long lo, long hi) {
    if (!has(key)) return;
    const json& v = cfg_.at(key);
    if (!v.is_number_integer() || v.get<long>() < lo || v.get<long>() > hi)
      add(key, hi == std::numeric_limits<long>::max() ? fmt::format("must be an integer >= {}", lo)
                                                      : fmt::format("must be an integer in [{}, {}]", lo, hi));
  }

  void one_of(const std::string& key, const std::set<std::string>& allowed) {
    if (!has(key)) return;
    const json& v = cfg_.at(key);
    if (!v.is_string() || !allowed.count(v.get<std::string>()))
      add(key, fmt::format("must be one of {}", fmt::join(allowed, ", ")));
  }

  void vector(const std::string& key, bool required) {
    if (!has(key)) {
      if (required) add(key, "required coordinate list is missing");
      return;
    }
    if (!numbers(cfg_.at(key)) || cfg_.at(key).empty()) add(key, "must be a nonempty list of numbers");
  }

  void decreasing(const std::string& key, bool required) {
    if (!has(key)) {
      if (required) add(key, "required list is missing");
      return;
    }
    const json& v = cfg_.at(key);
    if (!numbers(v) || v.empty()) return add(key, "must be a nonempty list of numbers");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(v[i].get<double>() > 0.0)) return add(key, "entries must be positive");
      if (i > 0 && !(v[i].get<double>() < v[i - 1].get<double>())) return add(key, "entries must strictly decrease");
    }
  }

  void positive_list(const std::string& key) {
    if (!has(key)) return;
    const json& v = cfg_.at(key);
    if (!numbers(v) || v.empty()) return add(key, "must be a nonempty list of numbers");
    for (const json& e : v)
      if (!(e.get<double>() > 0.0)) return add(key, "entries must be positive");
  }

  void schedule() {
    if (!has("schedule")) return;
    const json& s = cfg_.at("schedule");
    const std::string kind = s.is_object() && s.contains("kind") && s.at("kind").is_string() ? s.at("kind").get<std::string>() : "";
    try {
      make_schedule(s);
    } catch (const std::exception& e) {
      add(kind.empty() ? "schedule.kind" : "schedule", e.what());
    }
  }

  static bool numbers(const json& v) {
    if (!v.is_array()) return false;
    for (const json& e : v)
      if (!e.is_number()) return false;
    return true;
  }

  static EpsilonSchedule make_schedule(const json& s) {
    if (!s.is_object() || !s.contains("kind") || !s.at("kind").is_string())
      throw InvalidArgument("schedule needs a kind: dyadic, geometric or explicit");
    const std::string kind = s.at("kind").get<std::string>();
    if (kind == "dyadic") return EpsilonSchedule::dyadic(s.value("first", 0), s.value("last", 40));
    if (kind == "geometric")
      return EpsilonSchedule::geometric(s.value("base", 1.0), s.value("ratio", 0.5), s.value("count", 40));
    if (kind == "explicit") return EpsilonSchedule(s.value("entries", std::vector<double>{}));
    throw InvalidArgument("schedule kind must be dyadic, geometric or explicit");
  }

 private:
  const json& cfg_;
  fs::path base_;
};

json defaults_for(const std::string& sub) {
  json d{{"seed", 0}};
  if (needs_kernel(sub)) d["kernel"] = "riesz";
  if (sub == "field" || sub == "diff" || sub == "levelset" || sub == "lipschitz")
    d["schedule"] = {{"kind", "dyadic"}, {"first", 0}, {"last", 40}};
  if (sub == "field") {
    d["operator"] = "potential";
    d["radii"] = DominatingOptions::default_radii();
    d["eps"] = 0.01;
  } else if (sub == "capacity") {
    d["refinement"] = 2;
  } else if (sub == "diff") {
    d["mesh_ratio"] = 16;
    d["radii"] = {0.2, 0.1, 0.05, 0.025};
  } else if (sub == "lipschitz") {
    d["pairs"] = 1000;
    d["sampler"] = "uniform";
    d["grid_cells"] = 64;
    d["min_cells"] = 64;
    d["schedule"] = {{"kind", "dyadic"}, {"first", -4}, {"last", 40}};
  } else if (sub == "levelset") {
    d["analyze"] = true;
  } else if (sub == "suite") {
    d["criteria"] = suite::criterion_ids();
  }
  return d;
}

Vec vec_of(const json& v) {
  const auto xs = v.get<std::vector<double>>();
  if (xs.empty() || static_cast<int>(xs.size()) > kMaxDim) throw InvalidArgument("coordinate list has the wrong length");
  Vec out(static_cast<int>(xs.size()));
  for (int i = 0; i < out.dim(); ++i) out[i] = xs[i];
  return out;
}

void check_dim(const Vec& v, int n, const char* what) {
  if (v.dim() != n) throw InvalidArgument(fmt::format("{} has dimension {}, the measure {}", what, v.dim(), n));
}

RunResult run_field(const json& cfg, const fs::path& base) {
  const RadonMeasure mu = io::load_measure(resolve(base, cfg.at("measure")));
  const int n = mu.dimension();
  const std::vector<Vec> pts = io::load_points(resolve(base, cfg.at("points")), n);
  const std::string op = cfg.at("operator");
  const EpsilonSchedule schedule = Checker::make_schedule(cfg.at("schedule"));
  FieldSample f;
  if (op == "potential") {
    f = potential(make_kernel(cfg.at("kernel"), n), mu, pts);
  } else if (op == "gradient") {
    const Kernel k = make_kernel(cfg.at("kernel"), n);
    f = FieldSample::zeros(FieldKind::gradient, pts, n);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const GradientEstimate est = gradient_potential(k, mu, pts[i], schedule);
      for (int c = 0; c < n; ++c)
        f.values[i * n + c] = est.value ? (*est.value)[c] : std::numeric_limits<double>::quiet_NaN();
    }
  } else if (op == "maximal") {
    const auto radii = cfg.at("radii").get<std::vector<double>>();
    f = maximal_function(mu, pts, radii);
  } else if (op == "truncated_singular") {
    const Kernel k = make_kernel(cfg.at("kernel"), n);
    f = FieldSample::zeros(FieldKind::truncated_singular, pts, n);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec t = truncated_singular(k, mu, pts[i], cfg.at("eps").get<double>());
      for (int c = 0; c < n; ++c) f.values[i * n + c] = t[c];
    }
  } else if (op == "maximal_singular") {
    f = maximal_singular(make_kernel(cfg.at("kernel"), n), mu, pts, schedule);
  } else if (op == "dominating") {
    DominatingOptions o;
    o.radii = cfg.at("radii").get<std::vector<double>>();
    o.schedule = schedule;
    f = dominating_function(make_kernel(cfg.at("kernel"), n), mu, pts, o);
  } else {
    f = newtonian_gradient(mu, pts);
  }
  std::ostringstream csv;
  io::write_field_csv(csv, f);
  RunResult r;
  r.csv = csv.str();
  r.payload = {{"kind", to_string(f.kind)},
               {"points", pts.size()},
               {"components", f.components},
               {"lower_bound", f.lower_bound},
               {"values", f.values}};
  return r;
}

RunResult run_capacity(const json& cfg, const fs::path& base) {
  const auto cubes = io::load_cubes(resolve(base, cfg.at("set")));
  const DiscreteSet E = io::discretize_cubes(cubes, cfg.at("mesh").get<double>());
  CapacityOptions o;
  o.refinement = cfg.at("refinement");
  const CapacityEstimate est = capacity_lp(E, o);
  RunResult r;
  r.payload = io::to_json(est);
  r.payload["cells"] = E.size();
  r.payload["measure"] = E.measure();
  return r;
}

RunResult run_diff(const json& cfg, const fs::path& base) {
  const RadonMeasure mu = io::load_measure(resolve(base, cfg.at("measure")));
  const int n = mu.dimension();
  const Kernel k = make_kernel(cfg.at("kernel"), n);
  const Vec a = vec_of(cfg.at("center"));
  check_dim(a, n, "center");
  DiffOptions o;
  o.mesh_ratio = cfg.at("mesh_ratio");
  o.schedule = Checker::make_schedule(cfg.at("schedule"));
  Vec v;
  if (cfg.contains("gradient") && !cfg.at("gradient").is_null()) {
    v = vec_of(cfg.at("gradient"));
    check_dim(v, n, "gradient");
  } else {
    const GradientEstimate est = gradient_potential(k, mu, a, o.schedule, o.gradient);
    if (!est.value) throw InvalidArgument(fmt::format("gradient at the center is undefined ({} limit)", est.status));
    v = *est.value;
  }
  const auto radii = cfg.at("radii").get<std::vector<double>>();
  std::optional<std::vector<double>> ts;
  if (cfg.contains("t_samples") && !cfg.at("t_samples").is_null()) ts = cfg.at("t_samples").get<std::vector<double>>();
  RunResult r;
  r.payload = io::to_json(capacity_diff_index(k, mu, a, v, radii, ts, o));
  return r;
}

RunResult run_lipschitz(const json& cfg, const fs::path& base) {
  const RadonMeasure mu = io::load_measure(resolve(base, cfg.at("measure")));
  const int n = mu.dimension();
  const Kernel k = make_kernel(cfg.at("kernel"), n);
  const BoundingBox window{vec_of(cfg.at("window").at("lo")), vec_of(cfg.at("window").at("hi"))};
  check_dim(window.lo, n, "window.lo");
  check_dim(window.hi, n, "window.hi");
  LipschitzOptions o;
  o.sampler = cfg.at("sampler") == "near_support" ? PairSampler::near_support : PairSampler::uniform;
  o.grid_cells = cfg.at("grid_cells");
  o.min_cells = cfg.at("min_cells");
  o.dominating.schedule = Checker::make_schedule(cfg.at("schedule"));
  RunResult r;
  r.payload = io::to_json(lipschitz_check(k, mu, cfg.at("pairs"), window, cfg.at("seed").get<std::uint64_t>(), o));
  return r;
}

RunResult run_levelset(const json& cfg, const fs::path& base) {
  const RadonMeasure mu = io::load_measure(resolve(base, cfg.at("measure")));
  const int n = mu.dimension();
  GridSpec grid;
  if (cfg.contains("grid") && !cfg.at("grid").is_null()) {
    const json& g = cfg.at("grid");
    grid = GridSpec(vec_of(g.at("origin")), g.at("h").get<double>(), g.at("shape").get<std::vector<int>>());
    if (grid.dim() != n) throw InvalidArgument("grid dimension differs from the measure");
  } else if (mu.has_density()) {
    grid = mu.density()->grid;
  } else {
    throw InvalidArgument("levelset needs a 'grid' for a measure without density");
  }
  const double c = cfg.at("level");
  const auto bands = cfg.at("bands").get<std::vector<double>>();
  const EpsilonSchedule schedule = Checker::make_schedule(cfg.at("schedule"));
  const FieldSample P = newtonian_potential_on(mu, grid);
  RunResult r;
  json levels = json::array();
  std::string csv = "band,cell";
  for (int i = 0; i < n; ++i) csv += fmt::format(",x{}", i);
  csv += ",P,grad_norm,laplacian,density,stencil\n";
  for (double band : bands) {
    LevelSetReport rep = extract_level_set(P, c, band);
    if (cfg.at("analyze").get<bool>()) analyze_level_set(rep, mu, schedule);
    levels.push_back(io::to_json(rep));
    for (std::size_t i = 0; i < rep.cells_in_band.size(); ++i) {
      const std::size_t f = rep.cells_in_band[i];
      const Vec x = grid.center(f);
      std::string row = fmt::format("{},{}", band, f);
      for (int j = 0; j < n; ++j) row += fmt::format(",{}", x[j]);
      row += fmt::format(",{}", P.at(f));
      if (i < rep.gradient_norms.size()) {
        const auto& d = rep.density_values[i];
        row += fmt::format(",{},{},{},{}", rep.gradient_norms[i], rep.laplacian_values[i],
                           d ? fmt::format("{}", *d) : std::string(), rep.laplacian_from_stencil[i] ? 1 : 0);
      } else {
        row += ",,,,";
      }
      csv += row + "\n";
    }
  }
  r.payload = {{"levels", levels}};
  if (mu.has_density() && bands.size() >= 1) r.payload["density_check"] = io::to_json(levelset_density_check(mu, c, bands));
  r.csv = std::move(csv);
  return r;
}

RunResult run_suite(const json& cfg) {
  const auto ids = cfg.at("criteria").get<std::vector<int>>();
  RunResult r;
  json rows = json::array();
  json table = json::array();
  bool all = true;
  for (int id : ids) {
    const suite::CriterionResult c = suite::run_criterion(id);
    all = all && c.passed;
    rows.push_back(suite::to_json(c));
    table.push_back(fmt::format("criterion {:>2} {}  {}", c.id, c.passed ? "PASS" : "FAIL", c.name));
  }
  r.payload = {{"criteria", rows}, {"table", table}, {"all_passed", all}};
  r.exit_code = all ? kOk : kSuiteFailed;
  return r;
}

}  // namespace

json normalized(const json& config) {
  const std::string sub = config.value("subcommand", "");
  json out = defaults_for(sub);
  for (const auto& [k, v] : config.items()) out[k] = v;
  return out;
}

std::vector<Diagnostic> validate(const json& config, const fs::path& base_dir) {
  if (!config.is_object()) return {{"config", "must be a JSON object"}};
  const json cfg = normalized(config);
  Checker c(cfg, base_dir);
  if (!cfg.contains("subcommand") || !cfg.at("subcommand").is_string() ||
      !kSubcommands.count(cfg.at("subcommand").get<std::string>())) {
    c.add("subcommand", fmt::format("must be one of {}", fmt::join(kSubcommands, ", ")));
    return c.diagnostics;
  }
  const std::string sub = cfg.at("subcommand");
  c.integer("seed", 0, std::numeric_limits<long>::max());
  if (needs_kernel(sub)) c.one_of("kernel", kKernels);
  if (needs_measure(sub)) c.file("measure");
  if (cfg.contains("output") && !cfg.at("output").is_string()) c.add("output", "must be a path string");
  if (cfg.contains("csv") && !cfg.at("csv").is_string()) c.add("csv", "must be a path string");
  c.schedule();
  if (sub == "field") {
    c.file("points");
    c.one_of("operator", kOperators);
    c.decreasing("radii", false);
    c.positive("eps", false);
  } else if (sub == "capacity") {
    c.file("set");
    c.positive("mesh", true);
    c.integer("refinement", 1, 16);
  } else if (sub == "diff") {
    c.vector("center", true);
    c.vector("gradient", false);
    c.decreasing("radii", true);
    c.integer("mesh_ratio", 8, 1024);
    c.positive_list("t_samples");
  } else if (sub == "lipschitz") {
    if (!c.has("window") || !cfg.at("window").is_object()) {
      c.add("window", "required object {lo, hi} is missing");
    } else {
      const Checker w(cfg.at("window"), base_dir);
      for (const char* key : {"lo", "hi"})
        if (!w.has(key) || !Checker::numbers(cfg.at("window").at(key)) || cfg.at("window").at(key).empty())
          c.add(fmt::format("window.{}", key), "must be a nonempty list of numbers");
    }
    c.integer("pairs", 1, std::numeric_limits<long>::max());
    c.one_of("sampler", {"uniform", "near_support"});
    c.integer("grid_cells", 2, 4096);
    c.integer("min_cells", 1, std::numeric_limits<long>::max());
  } else if (sub == "levelset") {
    c.number("level", true);
    c.decreasing("bands", true);
    if (c.has("grid")) {
      const json& g = cfg.at("grid");
      if (!g.is_object() || !g.contains("origin") || !g.contains("h") || !g.contains("shape") ||
          !Checker::numbers(g.at("origin")) || !g.at("h").is_number() || !(g.at("h").get<double>() > 0.0) ||
          !g.at("shape").is_array())
        c.add("grid", "must be {origin: [...], h > 0, shape: [...]}");
    }
    if (!cfg.at("analyze").is_boolean()) c.add("analyze", "must be true or false");
  } else if (sub == "suite") {
    const json& ids = cfg.at("criteria");
    bool ok = ids.is_array() && !ids.empty();
    const auto known = suite::criterion_ids();
    if (ok)
      for (const json& e : ids)
        ok = ok && e.is_number_integer() && std::find(known.begin(), known.end(), e.get<int>()) != known.end();
    if (!ok) c.add("criteria", "must be a nonempty list of criterion ids 1..10");
  }
  return c.diagnostics;
}

RunResult run(const json& config, const fs::path& base_dir) {
  const json cfg = normalized(config);
  const std::string sub = cfg.at("subcommand");
  RunResult r;
  if (sub == "field") r = run_field(cfg, base_dir);
  else if (sub == "capacity") r = run_capacity(cfg, base_dir);
  else if (sub == "diff") r = run_diff(cfg, base_dir);
  else if (sub == "lipschitz") r = run_lipschitz(cfg, base_dir);
  else if (sub == "levelset") r = run_levelset(cfg, base_dir);
  else r = run_suite(cfg);
  r.payload = {{"toolkit", "potlab"}, {"version", kVersion}, {"config", cfg}, {"result", r.payload}};
  return r;
}

json report(const json& payload) {
  const auto now = std::chrono::system_clock::now();
  return {{"header", {{"timestamp", fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)))}}},
          {"payload", payload}};
}

json error_record(int code, const std::string& kind, const std::string& message,
                  const std::vector<Diagnostic>& diagnostics) {
  json diags = json::array();
  for (const Diagnostic& d : diagnostics) diags.push_back({{"field", d.field}, {"message", d.message}});
  return {{"error", {{"code", code}, {"kind", kind}, {"message", message}, {"diagnostics", diags}}}};
}

}  // namespace potlab::cli
