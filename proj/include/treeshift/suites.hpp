#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "treeshift/common.hpp"
#include "treeshift/tree.hpp"

namespace treeshift {

enum class Status { Pass, Fail, Diagnostic };
std::string_view to_string(Status s);

struct Record {
  std::string suite;
  std::string name;
  std::string ref;
  Status status = Status::Diagnostic;
  Real residual = 0.0;
  GenerationIndex exactness_depth = 0;
  nlohmann::json details = nlohmann::json::object();
};

struct RunConfig {
  std::optional<std::string> tree_path;
  ExampleName example = ExampleName::T2;
  std::vector<Real> params{0.5};
  GenerationIndex depth = 14;
  std::vector<std::string> suites{"all"};
  std::uint64_t seed = 0;
  Real tol_alg = kAlgebraicTolerance;
  Real tol_power = kPowerTolerance;
  Real slope_threshold = kDefaultSlopeThreshold;
  std::string out = "-";
  bool parallel = false;
};

struct Report {
  std::vector<Record> records;
  int passed = 0;
  int failed = 0;
  int diagnostics = 0;
};

/// Suites in canonical execution order.
const std::vector<std::string>& suite_names();

/// Expands "all", drops duplicates and orders canonically; throws ConfigError
/// for unknown names.
std::vector<std::string> normalize_suites(const std::vector<std::string>& requested);

/// Validates the config and builds the tree it names.
WeightedTree load_config_tree(const RunConfig& config);

/// Descriptive reference label of a record name; empty when unknown.
std::string_view reference_label(std::string_view record_name);
const std::vector<std::pair<std::string_view, std::string_view>>& reference_table();

Report run_suites(const RunConfig& config);
Report run_suites(const RunConfig& config, const WeightedTree& tree);

nlohmann::json config_json(const RunConfig& config);
/// JSON Lines: config line, one line per record, trailing summary line.
std::string serialize_report(const RunConfig& config, const Report& report);

}  // namespace treeshift
