#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "potlab/errors.hpp"
#include "potlab/tools/runner.hpp"

namespace fs = std::filesystem;
using potlab::cli::json;

namespace {

struct Flags {
  std::string config;
  json overrides = json::object();
};

template <class T>
void bind(CLI::App* cmd, Flags& flags, const std::string& name, const std::string& key, const std::string& help) {
  cmd->add_option_function<T>(name, [&flags, key](const T& v) { flags.overrides[key] = v; }, help);
}

void bind_list(CLI::App* cmd, Flags& flags, const std::string& name, const std::string& key, const std::string& help) {
  cmd->add_option_function<std::vector<double>>(name, [&flags, key](const std::vector<double>& v) { flags.overrides[key] = v; },
                                                help)
      ->delimiter(',');
}

void bind_path(CLI::App* cmd, Flags& flags, const std::string& name, const std::string& key, const std::string& help) {
  cmd->add_option_function<std::string>(
      name, [&flags, key](const std::string& v) { flags.overrides[key] = fs::absolute(v).string(); }, help);
}

void common(CLI::App* cmd, Flags& flags, bool measure, bool kernel) {
  cmd->add_option("--config", flags.config, "JSON config providing defaults for every flag");
  if (measure) bind_path(cmd, flags, "--measure", "measure", "Measure JSON file");
  if (kernel) bind<std::string>(cmd, flags, "--kernel", "kernel", "riesz, newtonian, oscillating or dipole");
  bind<long>(cmd, flags, "--seed", "seed", "Seed echoed in the report");
  bind_path(cmd, flags, "--output", "output", "Write the report here instead of stdout");
  bind_path(cmd, flags, "--csv", "csv", "Write field or band rows as CSV");
}

void emit_error(int code, const std::string& kind, const std::string& message,
                const std::vector<potlab::cli::Diagnostic>& diags = {}) {
  std::cerr << potlab::cli::error_record(code, kind, message, diags).dump(2) << "\n";
}

std::optional<json> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    emit_error(potlab::cli::kConfigError, "config", fmt::format("cannot open config {}", path),
               {{"config", fmt::format("file not found: {}", path)}});
    return std::nullopt;
  }
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    emit_error(potlab::cli::kParseError, "parse", fmt::format("{}: {}", path, e.what()));
    return std::nullopt;
  }
}

int execute(const std::string& subcommand, const Flags& flags, bool validate_only) {
  using namespace potlab::cli;
  json cfg = json::object();
  fs::path base = fs::current_path();
  if (!flags.config.empty()) {
    auto loaded = read_config(flags.config);
    if (!loaded) return fs::exists(flags.config) ? kParseError : kConfigError;
    if (!loaded->is_object()) {
      emit_error(kConfigError, "config", "config must be a JSON object", {{"config", "must be a JSON object"}});
      return kConfigError;
    }
    cfg = *loaded;
    base = fs::absolute(flags.config).parent_path();
  }
  if (!subcommand.empty()) cfg["subcommand"] = subcommand;
  for (const auto& [k, v] : flags.overrides.items()) cfg[k] = v;

  const auto diags = validate(cfg, base);
  if (validate_only) {
    json out = {{"valid", diags.empty()}, {"config", normalized(cfg)}, {"diagnostics", json::array()}};
    for (const Diagnostic& d : diags) out["diagnostics"].push_back({{"field", d.field}, {"message", d.message}});
    std::cout << out.dump(2) << "\n";
    return diags.empty() ? kOk : kConfigError;
  }
  if (!diags.empty()) {
    emit_error(kConfigError, "config", fmt::format("{} invalid config field(s)", diags.size()), diags);
    return kConfigError;
  }

  try {
    const RunResult r = run(cfg, base);
    const std::string text = report(r.payload).dump(2) + "\n";
    auto target = [&](const char* key) -> std::optional<fs::path> {
      if (!cfg.contains(key)) return std::nullopt;
      const fs::path p(cfg.at(key).get<std::string>());
      return p.is_absolute() ? p : base / p;
    };
    if (auto out = target("output")) {
      std::ofstream f(*out);
      if (!f) throw std::runtime_error(fmt::format("cannot write {}", out->string()));
      f << text;
    } else {
      std::cout << text;
    }
    if (auto csv = target("csv"); csv && !r.csv.empty()) {
      std::ofstream f(*csv);
      if (!f) throw std::runtime_error(fmt::format("cannot write {}", csv->string()));
      f << r.csv;
    }
    return r.exit_code;
  } catch (const potlab::ParseError& e) {
    emit_error(kParseError, "parse", e.what());
    return kParseError;
  } catch (const potlab::InvalidArgument& e) {
    emit_error(kRangeError, "range", e.what());
    return kRangeError;
  } catch (const potlab::Unsupported& e) {
    emit_error(kRangeError, "unsupported", e.what());
    return kRangeError;
  } catch (const potlab::SolverError& e) {
    emit_error(kSolverError, "solver", e.what());
    return kSolverError;
  } catch (const std::exception& e) {
    emit_error(kFailure, "failure", e.what());
    return kFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Potential-theoretic estimates for Radon measures"};
  app.set_version_flag("--version", potlab::cli::kVersion);
  app.require_subcommand(1);

  Flags flags;

  auto* field = app.add_subcommand("field", "Sample a potential or operator on a point list");
  common(field, flags, true, true);
  bind_path(field, flags, "--points", "points", "CSV of evaluation points");
  bind<std::string>(field, flags, "--operator", "operator",
                    "potential, gradient, maximal, truncated_singular, maximal_singular, dominating, newtonian_gradient");
  bind_list(field, flags, "--radii", "radii", "Decreasing radii for maximal and dominating");
  bind<double>(field, flags, "--eps", "eps", "Truncation radius for truncated_singular");

  auto* capacity = app.add_subcommand("capacity", "Estimate the capacity of a union of cubes");
  common(capacity, flags, false, false);
  bind_path(capacity, flags, "--set", "set", "Cube list JSON file");
  bind<double>(capacity, flags, "--mesh", "mesh", "Lattice cell side");
  bind<int>(capacity, flags, "--refinement", "refinement", "Constraint sub-points per axis and cell");

  auto* diff = app.add_subcommand("diff", "Capacity differentiability index at a point");
  common(diff, flags, true, true);
  bind_list(diff, flags, "--center", "center", "Point a");
  bind_list(diff, flags, "--gradient", "gradient", "Candidate gradient; computed when absent");
  bind_list(diff, flags, "--radii", "radii", "Decreasing radii");
  bind<int>(diff, flags, "--mesh-ratio", "mesh_ratio", "Window cells per radius");
  bind_list(diff, flags, "--t-samples", "t_samples", "Explicit level samples");

  auto* lipschitz = app.add_subcommand("lipschitz", "Check the dominating-function Lipschitz estimate");
  common(lipschitz, flags, true, true);
  lipschitz->add_option_function<std::vector<double>>(
                "--window-lo", [&flags](const std::vector<double>& v) { flags.overrides["window"]["lo"] = v; },
                "Lower window corner")
      ->delimiter(',');
  lipschitz->add_option_function<std::vector<double>>(
                "--window-hi", [&flags](const std::vector<double>& v) { flags.overrides["window"]["hi"] = v; },
                "Upper window corner")
      ->delimiter(',');
  bind<long>(lipschitz, flags, "--pairs", "pairs", "Number of sampled pairs");
  bind<std::string>(lipschitz, flags, "--sampler", "sampler", "uniform or near_support");
  bind<int>(lipschitz, flags, "--grid-cells", "grid_cells", "Weak-L1 grid cells per axis");

  auto* levelset = app.add_subcommand("levelset", "Analyze level sets of the Newtonian potential");
  common(levelset, flags, true, false);
  bind<double>(levelset, flags, "--level", "level", "Level c");
  bind_list(levelset, flags, "--bands", "bands", "Decreasing band half-widths");

  auto* suite = app.add_subcommand("suite", "Run the acceptance criteria");
  common(suite, flags, false, false);
  suite->add_option_function<std::vector<int>>(
           "--criteria", [&flags](const std::vector<int>& v) { flags.overrides["criteria"] = v; }, "Criterion ids")
      ->delimiter(',');

  auto* run = app.add_subcommand("run", "Run a config file; its 'subcommand' key selects the task");
  run->add_option("config", flags.config, "Config JSON")->required();
  auto* validate = app.add_subcommand("validate", "Check a config file without running it");
  validate->add_option("config", flags.config, "Config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error(potlab::cli::kConfigError, "usage", e.what());
    return potlab::cli::kConfigError;
  }

  for (CLI::App* sub : {field, capacity, diff, lipschitz, levelset, suite})
    if (sub->parsed()) return execute(sub->get_name(), flags, false);
  return execute("", flags, validate->parsed());
}
