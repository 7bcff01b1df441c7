#pragma once

// Named, seeded experiments: config parsing, dispatch, CSV output and a
// per-criterion pass/fail summary.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dualvote/gfun.hpp"
#include "dualvote/lattice.hpp"

namespace dualvote {

enum class Experiment {
  CheckG,
  Iterate,
  BbmInterface,
  DualVote,
  Forward,
  DualityCheck,
  Collisions,
  Coupling,
  PdeFront,
  PdeCircle,
  McfCheck,
  PartitionLaw,
};

std::string_view to_string(Experiment e) noexcept;
// Accepts "CheckG" and "check-g" spellings. Throws ConfigError.
Experiment experiment_from_string(std::string_view name);
const std::vector<Experiment>& all_experiments();
bool is_stochastic(Experiment e) noexcept;

struct ExperimentConfig {
  Experiment experiment = Experiment::CheckG;
  std::optional<ModelSpec> model;  // empty: experiment's reference model(s)
  std::optional<ScalingParams> scaling;
  std::uint64_t trials = 0;  // 0: experiment default
  std::optional<std::uint64_t> seed;
  std::string output_dir;
  std::map<std::string, double> tolerances;
  nlohmann::json params = nlohmann::json::object();
};

// Throws ConfigError naming the offending key path.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json to_json(const ModelSpec& model);
ModelSpec model_from_json(const nlohmann::json& j, const std::string& path = "model");

struct SummaryLine {
  std::string id;  // acceptance criterion number, or the experiment name
  std::string check;
  bool pass = false;
  double measured = 0.0;
  double bound = 0.0;
};

struct RunResult {
  std::vector<SummaryLine> summary;
  std::vector<std::string> files;
  bool pass() const;
};

// Writes config.json, metadata.json, result CSVs and summary.csv under output_dir.
// Throws ConfigError; module errors are rethrown with the experiment name prepended.
RunResult run_experiment(const ExperimentConfig& config);

// "id,check,status,measured,bound" lines with a header.
std::string format_summary(const std::vector<SummaryLine>& lines);

// $DUALVOTE_OUT or "dualvote-out".
std::string default_output_dir();

}  // namespace dualvote
