#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace potlab::suite {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  /// One-line account of the measured quantities against their thresholds.
  std::string summary;
  double seconds = 0.0;
  nlohmann::json details;
};

/// Criteria 1..10.
std::vector<int> criterion_ids();

/// Reason a criterion cannot pass as stated, for the criteria known to be unattainable.
std::optional<std::string> known_unattainable(int id);

/// Runs one criterion. Throws InvalidArgument for an unknown id.
CriterionResult run_criterion(int id);

std::vector<CriterionResult> run_suite(std::span<const int> ids);

/// "criterion <id> PASS|FAIL  <name>: <summary> (<seconds> s)".
std::string format_line(const CriterionResult& r);

nlohmann::json to_json(const CriterionResult& r);

}  // namespace potlab::suite
