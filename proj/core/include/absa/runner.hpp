#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "absa/gateway.hpp"
#include "absa/metrics.hpp"
#include "absa/prompt.hpp"
#include "absa/types.hpp"
#include "absa/validator.hpp"

namespace absa {

class RunnerError : public std::runtime_error {
 public:
  enum class Kind { config, transport, io };

  RunnerError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Everything one experiment needs. Serialized into the results manifest;
/// the generation-relevant subset is hashed to guard resume against
/// silently mixing incompatible runs.
struct RunConfig {
  // dataset
  std::string dataset_name = "dataset";
  std::string domain;
  std::filesystem::path taxonomy_path;
  std::filesystem::path train_path;
  std::filesystem::path dev_path;
  std::filesystem::path test_path;
  Task task = Task::asqp;
  /// Parse the files as ASQP quads, then project to TASD triplets.
  bool derive_tasd_from_asqp = false;

  // experiment grid
  std::vector<int> shot_counts = {0, 10, 20, 30, 40, 50};
  std::vector<int> generation_seeds = {0, 1, 2, 3, 4};
  std::uint64_t sampling_seed = 42;
  bool sc = true;
  bool allow_nonstandard_shot_counts = false;
  std::size_t test_limit = 0;  // evaluate only the first N test examples; 0 = all

  // generation
  BackendConfig backend;
  std::string model = "gemma3:27b";
  double temperature = 0.8;
  std::string stop = "]";
  int max_tokens = 256;
  int max_attempts = 10;
  ValidatorOptions validator;

  // prompt
  std::filesystem::path template_path;

  // execution
  std::filesystem::path output_dir;
  int workers = 4;
};

RunConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);

/// FNV-1a over the canonical serialization of the generation-relevant
/// fields (secrets, output paths and worker counts excluded).
std::string config_hash(const RunConfig& config);

struct RunResult {
  std::filesystem::path results_dir;
  std::size_t records_written = 0;  // new records this invocation
  std::size_t records_total = 0;
  std::size_t invalid_records = 0;  // exhausted the attempt budget
};

/// Executes the grid (shot counts x generation seeds x test examples),
/// appending one PredictionRecord per combination to records.jsonl, then
/// writes per-seed, SC-merged and element-level reports plus per-cell
/// summaries. Generation fans out to `workers` threads; a single writer
/// serializes appends, and every report is computed from the sorted record
/// set, so outputs do not depend on completion order.
RunResult run_experiment(const RunConfig& config);

/// Continues a partial run: records already present are not regenerated.
/// Refuses when the stored config hash differs from `config`.
RunResult resume(const RunConfig& config, const std::filesystem::path& results_dir);

/// Recomputes all reports from the records of a completed run.
RunResult score_results(const std::filesystem::path& results_dir);

// --- persistence helpers (also used by the score/report subcommands) ---

nlohmann::ordered_json record_to_json(const PredictionRecord& record);
PredictionRecord record_from_json(const nlohmann::json& doc);

std::vector<PredictionRecord> read_records(const std::filesystem::path& jsonl_path);

struct CellScores {
  ConditionId id;
  std::vector<MetricsReport> per_seed;            // tuple level, seed order
  std::map<std::string, std::vector<MetricsReport>> per_seed_elements;
  MetricsReport sc_tuple;                          // set when sc was computed
  std::map<std::string, MetricsReport> sc_elements;
  bool has_sc = false;
  ConditionSummary summary;
};

/// Scores a complete record set against the gold labels of `test`.
/// Requires every (k, seed, example) cell to be present.
std::vector<CellScores> score_records(const std::vector<PredictionRecord>& records,
                                      const std::vector<Example>& test,
                                      const RunConfig& config);

void write_reports(const std::filesystem::path& results_dir,
                   const std::vector<CellScores>& cells, const RunConfig& config);

}  // namespace absa
