#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace potlab::cli {

using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kParseError = 3,
  kRangeError = 4,
  kSolverError = 5,
  kSuiteFailed = 6,
};

struct Diagnostic {
  /// Offending config key (dotted for nested keys).
  std::string field;
  std::string message;
};

/// Empty iff `run` would start. Relative paths are resolved against `base_dir`.
std::vector<Diagnostic> validate(const json& config, const std::filesystem::path& base_dir);

/// The config with every default filled in; this is what reports echo.
json normalized(const json& config);

struct RunResult {
  int exit_code = kOk;
  /// Deterministic part of the report: toolkit, version, config echo and result.
  json payload;
  /// Field rows for "field", band cells for "levelset"; empty otherwise.
  std::string csv;
};

/// Runs a validated config. Throws ParseError, InvalidArgument, Unsupported or SolverError.
RunResult run(const json& config, const std::filesystem::path& base_dir);

/// {"header": {"timestamp"}, "payload": payload}.
json report(const json& payload);

/// Machine-readable error record.
json error_record(int code, const std::string& kind, const std::string& message,
                  const std::vector<Diagnostic>& diagnostics = {});

}  // namespace potlab::cli
