#include "absa/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "absa/consistency.hpp"
#include "absa/corpus.hpp"
#include "absa/label_format.hpp"
#include "absa/rng.hpp"

namespace absa {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kRecordsFile = "records.jsonl";
constexpr std::string_view kManifestFile = "manifest.json";

struct RecordKey {
  int k;
  int seed;
  int example_id;

  auto operator<=>(const RecordKey&) const = default;
};

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char byte : data) {
    hash ^= byte;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

std::string to_hex(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

/// Shot sampling seed for one experiment cell (dataset x task x k): fixed
/// across the generation seeds, independent between cells.
std::uint64_t cell_sampling_seed(const RunConfig& config, int k) {
  std::uint64_t h = splitmix64(config.sampling_seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(k));
  h = splitmix64(h ^ (config.task == Task::tasd ? 0x7A5Dull : 0xA59Full));
  return h;
}

json backend_params_without_secrets(const json& params) {
  json scrubbed = params;
  scrubbed.erase("api_key");
  return scrubbed;
}

void require(bool condition, const std::string& message) {
  if (!condition) throw RunnerError(RunnerError::Kind::config, message);
}

void validate_config(const RunConfig& config) {
  require(!config.shot_counts.empty(), "no shot counts configured");
  require(!config.generation_seeds.empty(), "no generation seeds configured");
  std::set<int> seeds(config.generation_seeds.begin(), config.generation_seeds.end());
  require(seeds.size() == config.generation_seeds.size(),
          "generation seeds must be distinct");
  require(config.max_attempts >= 1, "max_attempts must be >= 1");
  require(config.temperature >= 0.0, "temperature must be >= 0");
  require(config.max_tokens > 0, "max_tokens must be > 0");
  require(config.workers >= 1, "workers must be >= 1");
  require(!config.output_dir.empty(), "output_dir must be set");
  if (!config.allow_nonstandard_shot_counts) {
    for (int k : config.shot_counts) {
      require(k == 0 || k == 10 || k == 20 || k == 30 || k == 40 || k == 50,
              "shot count " + std::to_string(k) +
                  " is outside {0,10,20,30,40,50}; set "
                  "allow_nonstandard_shot_counts to override");
    }
  }
}

DatasetSpec load_run_dataset(const RunConfig& config,
                             std::vector<std::string>* warnings = nullptr) {
  const Task parse_task = config.derive_tasd_from_asqp ? Task::asqp : config.task;
  DatasetSpec dataset;
  try {
    dataset = load_dataset(config.dataset_name, config.domain, parse_task,
                           config.taxonomy_path, config.train_path,
                           config.dev_path, config.test_path, warnings);
  } catch (const ParseError& e) {
    throw RunnerError(RunnerError::Kind::io, e.what());
  }
  if (config.derive_tasd_from_asqp) {
    require(config.task == Task::tasd,
            "derive_tasd_from_asqp only makes sense for task TASD");
    dataset = derive_tasd(dataset);
  }
  return dataset;
}

std::vector<Example> evaluation_slice(const DatasetSpec& dataset,
                                      const RunConfig& config) {
  std::vector<Example> test = dataset.test;
  if (config.test_limit > 0 && config.test_limit < test.size())
    test.resize(config.test_limit);
  return test;
}

/// A crash can leave a torn final line in the append-only record file.
/// Drop it (it will be regenerated); a malformed line anywhere else is
/// real corruption and stays fatal.
void repair_torn_tail(const std::filesystem::path& records_path) {
  std::ifstream in(records_path);
  if (!in) return;
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  in.close();
  if (lines.empty()) return;

  for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
    try {
      record_from_json(json::parse(lines[i]));
    } catch (...) {
      throw RunnerError(RunnerError::Kind::io,
                        records_path.string() + ":" + std::to_string(i + 1) +
                            ": corrupt record in the middle of the file");
    }
  }
  try {
    record_from_json(json::parse(lines.back()));
  } catch (...) {
    lines.pop_back();
    std::ofstream out(records_path, std::ios::trunc);
    for (const std::string& kept : lines) out << kept << '\n';
  }
}

std::set<RecordKey> existing_keys(const std::filesystem::path& records_path) {
  std::set<RecordKey> keys;
  if (!std::filesystem::exists(records_path)) return keys;
  for (const PredictionRecord& record : read_records(records_path))
    keys.insert({record.shot_count, record.generation_seed, record.example_id});
  return keys;
}

class RecordWriter {
 public:
  explicit RecordWriter(const std::filesystem::path& path)
      : out_(path, std::ios::app) {
    if (!out_)
      throw RunnerError(RunnerError::Kind::io,
                        "cannot open for append: " + path.string());
  }

  void append(const PredictionRecord& record) {
    std::scoped_lock lock(mutex_);
    out_ << record_to_json(record).dump() << '\n';
    out_.flush();
  }

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

struct WorkItem {
  int k;
  int seed;
  const Example* example;
  const std::string* prompt;
};

RunResult execute(const RunConfig& config,
                  const std::filesystem::path& results_dir, bool fresh) {
  validate_config(config);

  DatasetSpec dataset = load_run_dataset(config);
  const std::vector<Example> test = evaluation_slice(dataset, config);
  require(!test.empty(), "test split is empty");
  for (int k : config.shot_counts) {
    require(static_cast<std::size_t>(k) <= dataset.train.size(),
            "shot count " + std::to_string(k) + " exceeds the train split (" +
                std::to_string(dataset.train.size()) + ")");
  }

  PromptTemplate tmpl;
  try {
    tmpl = load_template(config.template_path);
  } catch (const TemplateError& e) {
    throw RunnerError(RunnerError::Kind::config, e.what());
  }
  require(tmpl.task == config.task,
          "template task " + to_string(tmpl.task) +
              " does not match configured task " + to_string(config.task));

  std::filesystem::create_directories(results_dir);
  const auto manifest_path = results_dir / kManifestFile;
  const auto records_path = results_dir / kRecordsFile;

  if (fresh) {
    require(!std::filesystem::exists(records_path),
            "results directory already contains records; use resume");
    ordered_json manifest;
    manifest["config_hash"] = config_hash(config);
    manifest["config"] = config_to_json(config);
    std::ofstream out(manifest_path);
    require(static_cast<bool>(out), "cannot write " + manifest_path.string());
    out << manifest.dump(2) << '\n';
  } else {
    repair_torn_tail(records_path);
  }

  // Prompts are deterministic per (cell, seed); build them up front.
  std::map<int, ShotSet> shots_per_cell;
  for (int k : config.shot_counts)
    shots_per_cell.emplace(
        k, sample_shots(dataset.train, static_cast<std::size_t>(k),
                        cell_sampling_seed(config, k)));

  std::map<std::pair<int, int>, std::vector<std::string>> prompts;
  for (int k : config.shot_counts) {
    for (int seed : config.generation_seeds) {
      const auto ordered = shuffle_shots(shots_per_cell.at(k),
                                         static_cast<std::uint64_t>(seed));
      auto& cell_prompts = prompts[{k, seed}];
      cell_prompts.reserve(test.size());
      for (const Example& example : test)
        cell_prompts.push_back(
            build_prompt(tmpl, dataset.taxonomy, ordered, example.sentence));
    }
  }

  const std::set<RecordKey> done = existing_keys(records_path);
  std::vector<WorkItem> work;
  for (int k : config.shot_counts)
    for (int seed : config.generation_seeds)
      for (std::size_t i = 0; i < test.size(); ++i)
        if (!done.count({k, seed, test[i].id}))
          work.push_back({k, seed, &test[i], &prompts.at({k, seed})[i]});

  std::shared_ptr<Backend> backend;
  try {
    backend = make_backend(config.backend, &test);
  } catch (const GatewayError& e) {
    throw RunnerError(RunnerError::Kind::config, e.what());
  }

  RecordWriter writer(records_path);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::string first_error;

  auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t index = next.fetch_add(1, std::memory_order_relaxed);
      if (index >= work.size()) return;
      const WorkItem& item = work[index];

      GenerationRequest base;
      base.temperature = config.temperature;
      base.stop = config.stop;
      base.seed = item.seed;
      base.max_tokens = config.max_tokens;
      base.model = config.model;

      try {
        PredictionRecord record = acquire_label(
            *item.example, *item.prompt,
            [&backend](const GenerationRequest& request) {
              return backend->generate(request);
            },
            base, config.task, dataset.taxonomy, config.validator,
            config.max_attempts);
        record.shot_count = item.k;
        record.template_version = tmpl.version;
        writer.append(record);
      } catch (const std::exception& e) {
        std::scoped_lock lock(error_mutex);
        if (!failed.exchange(true)) first_error = e.what();
        return;
      }
    }
  };

  const int n_workers =
      std::max(1, std::min<int>(config.workers, static_cast<int>(work.size())));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (std::thread& thread : pool) thread.join();

  if (failed.load())
    throw RunnerError(RunnerError::Kind::transport,
                      "run halted, partial records preserved: " + first_error);

  const std::vector<PredictionRecord> records = read_records(records_path);
  const auto cells = score_records(records, test, config);
  write_reports(results_dir, cells, config);

  RunResult result;
  result.results_dir = results_dir;
  result.records_written = work.size();
  result.records_total = records.size();
  for (const PredictionRecord& record : records)
    if (!record.valid) ++result.invalid_records;
  return result;
}

std::string format_score(double value) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(2);
  out << value;
  return out.str();
}

double round2(double value) { return std::round(value * 100.0) / 100.0; }

std::vector<Granularity> elements_for(Task task) {
  if (task == Task::asqp)
    return {Granularity::aspect_term, Granularity::opinion_term,
            Granularity::category, Granularity::polarity};
  return {Granularity::aspect_term, Granularity::category, Granularity::polarity};
}

ordered_json report_to_json(const MetricsReport& report) {
  ordered_json out;
  out["granularity"] = to_string(report.granularity);
  out["tp"] = report.tp;
  out["n_pred"] = report.n_pred;
  out["n_gold"] = report.n_gold;
  out["precision"] = round2(report.precision);
  out["recall"] = round2(report.recall);
  out["f1"] = round2(report.f1);
  return out;
}

}  // namespace

RunConfig config_from_json(const json& doc) {
  RunConfig config;
  try {
    config.dataset_name = doc.value("dataset_name", config.dataset_name);
    config.domain = doc.value("domain", config.domain);
    config.taxonomy_path = doc.value("taxonomy_path", std::string());
    config.train_path = doc.value("train_path", std::string());
    config.dev_path = doc.value("dev_path", std::string());
    config.test_path = doc.value("test_path", std::string());
    if (doc.contains("task")) {
      auto task = parse_task(doc["task"].get<std::string>());
      if (!task)
        throw RunnerError(RunnerError::Kind::config,
                          "unknown task: " + doc["task"].get<std::string>());
      config.task = *task;
    }
    config.derive_tasd_from_asqp =
        doc.value("derive_tasd_from_asqp", config.derive_tasd_from_asqp);
    config.shot_counts = doc.value("shot_counts", config.shot_counts);
    config.generation_seeds = doc.value("generation_seeds", config.generation_seeds);
    config.sampling_seed = doc.value("sampling_seed", config.sampling_seed);
    config.sc = doc.value("sc", config.sc);
    config.allow_nonstandard_shot_counts = doc.value(
        "allow_nonstandard_shot_counts", config.allow_nonstandard_shot_counts);
    config.test_limit = doc.value("test_limit", config.test_limit);
    if (doc.contains("backend")) {
      const auto& backend = doc["backend"];
      auto kind = parse_backend_kind(backend.value("kind", "replay_gold"));
      if (!kind)
        throw RunnerError(RunnerError::Kind::config,
                          "unknown backend kind: " + backend.value("kind", ""));
      config.backend.kind = *kind;
      config.backend.params = backend.value("params", json::object());
    }
    config.model = doc.value("model", config.model);
    config.temperature = doc.value("temperature", config.temperature);
    config.stop = doc.value("stop", config.stop);
    config.max_tokens = doc.value("max_tokens", config.max_tokens);
    config.max_attempts = doc.value("max_attempts", config.max_attempts);
    config.validator.allow_implicit =
        doc.value("allow_implicit_terms", config.validator.allow_implicit);
    config.template_path = doc.value("template_path", std::string());
    config.output_dir = doc.value("output_dir", std::string());
    config.workers = doc.value("workers", config.workers);
  } catch (const json::exception& e) {
    throw RunnerError(RunnerError::Kind::config,
                      std::string("bad config: ") + e.what());
  }
  return config;
}

json config_to_json(const RunConfig& config) {
  json doc;
  doc["dataset_name"] = config.dataset_name;
  doc["domain"] = config.domain;
  doc["taxonomy_path"] = config.taxonomy_path.string();
  doc["train_path"] = config.train_path.string();
  doc["dev_path"] = config.dev_path.string();
  doc["test_path"] = config.test_path.string();
  doc["task"] = to_string(config.task);
  doc["derive_tasd_from_asqp"] = config.derive_tasd_from_asqp;
  doc["shot_counts"] = config.shot_counts;
  doc["generation_seeds"] = config.generation_seeds;
  doc["sampling_seed"] = config.sampling_seed;
  doc["sc"] = config.sc;
  doc["allow_nonstandard_shot_counts"] = config.allow_nonstandard_shot_counts;
  doc["test_limit"] = config.test_limit;
  doc["backend"]["kind"] = to_string(config.backend.kind);
  doc["backend"]["params"] = backend_params_without_secrets(config.backend.params);
  doc["model"] = config.model;
  doc["temperature"] = config.temperature;
  doc["stop"] = config.stop;
  doc["max_tokens"] = config.max_tokens;
  doc["max_attempts"] = config.max_attempts;
  doc["allow_implicit_terms"] = config.validator.allow_implicit;
  doc["template_path"] = config.template_path.string();
  doc["output_dir"] = config.output_dir.string();
  doc["workers"] = config.workers;
  return doc;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw RunnerError(RunnerError::Kind::config,
                      "cannot open config file: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw RunnerError(RunnerError::Kind::config,
                      "invalid config JSON in " + path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

std::string config_hash(const RunConfig& config) {
  // Only fields that change what would be generated take part.
  json subset;
  subset["train"] = config.train_path.string();
  subset["test"] = config.test_path.string();
  subset["taxonomy"] = config.taxonomy_path.string();
  subset["task"] = to_string(config.task);
  subset["derive"] = config.derive_tasd_from_asqp;
  subset["shot_counts"] = config.shot_counts;
  subset["seeds"] = config.generation_seeds;
  subset["sampling_seed"] = config.sampling_seed;
  subset["test_limit"] = config.test_limit;
  subset["backend_kind"] = to_string(config.backend.kind);
  subset["backend_params"] = backend_params_without_secrets(config.backend.params);
  subset["model"] = config.model;
  subset["temperature"] = config.temperature;
  subset["stop"] = config.stop;
  subset["max_tokens"] = config.max_tokens;
  subset["max_attempts"] = config.max_attempts;
  subset["allow_implicit_terms"] = config.validator.allow_implicit;
  subset["template"] = config.template_path.string();
  return to_hex(fnv1a(subset.dump()));
}

RunResult run_experiment(const RunConfig& config) {
  return execute(config, config.output_dir, /*fresh=*/true);
}

RunResult resume(const RunConfig& config,
                 const std::filesystem::path& results_dir) {
  const auto manifest_path = results_dir / kManifestFile;
  std::ifstream in(manifest_path);
  if (!in)
    throw RunnerError(RunnerError::Kind::config,
                      "no manifest in " + results_dir.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw RunnerError(RunnerError::Kind::io,
                      "corrupt manifest: " + std::string(e.what()));
  }
  const std::string stored = manifest.value("config_hash", "");
  const std::string current = config_hash(config);
  if (stored != current)
    throw RunnerError(RunnerError::Kind::config,
                      "config hash mismatch (stored " + stored + ", current " +
                          current + "); refusing to mix runs");
  return execute(config, results_dir, /*fresh=*/false);
}

RunResult score_results(const std::filesystem::path& results_dir) {
  const auto manifest_path = results_dir / kManifestFile;
  std::ifstream in(manifest_path);
  if (!in)
    throw RunnerError(RunnerError::Kind::config,
                      "no manifest in " + results_dir.string());
  json manifest = json::parse(in);
  RunConfig config = config_from_json(manifest.at("config"));

  DatasetSpec dataset = load_run_dataset(config);
  const std::vector<Example> test = evaluation_slice(dataset, config);
  const auto records = read_records(results_dir / kRecordsFile);
  const auto cells = score_records(records, test, config);
  write_reports(results_dir, cells, config);

  RunResult result;
  result.results_dir = results_dir;
  result.records_total = records.size();
  for (const PredictionRecord& record : records)
    if (!record.valid) ++result.invalid_records;
  return result;
}

ordered_json record_to_json(const PredictionRecord& record) {
  ordered_json doc;
  doc["k"] = record.shot_count;
  doc["seed"] = record.generation_seed;
  doc["example_id"] = record.example_id;
  doc["attempts"] = record.attempts;
  doc["valid"] = record.valid;
  ordered_json label = ordered_json::array();
  for (const Tuple& tuple : record.label) label.push_back(to_raw(tuple));
  doc["label"] = std::move(label);
  doc["raw"] = record.raw_generations;
  ordered_json violations = ordered_json::array();
  for (const Violation& violation : record.violations) {
    ordered_json v;
    v["kind"] = to_string(violation.kind);
    v["detail"] = violation.detail;
    if (violation.tuple_index)
      v["tuple_index"] = *violation.tuple_index;
    else
      v["tuple_index"] = nullptr;
    violations.push_back(std::move(v));
  }
  doc["violations"] = std::move(violations);
  doc["template_version"] = record.template_version;
  doc["elapsed_ms"] = record.elapsed_ms;
  return doc;
}

PredictionRecord record_from_json(const json& doc) {
  PredictionRecord record;
  record.shot_count = doc.at("k").get<int>();
  record.generation_seed = doc.at("seed").get<int>();
  record.example_id = doc.at("example_id").get<int>();
  record.attempts = doc.at("attempts").get<int>();
  record.valid = doc.at("valid").get<bool>();
  for (const auto& raw : doc.at("label")) {
    RawTuple fields = raw.get<RawTuple>();
    const auto polarity = parse_polarity(fields.at(2));
    if (!polarity)
      throw RunnerError(RunnerError::Kind::io,
                        "record carries invalid polarity: " + fields.at(2));
    record.label.insert(fields.size() == 4
                            ? make_quad(fields[0], fields[1], *polarity, fields[3])
                            : make_triplet(fields[0], fields[1], *polarity));
  }
  record.raw_generations = doc.value("raw", std::vector<std::string>{});
  for (const auto& v : doc.value("violations", json::array())) {
    Violation violation;
    const std::string kind = v.value("kind", "format");
    if (kind == "arity") violation.kind = ViolationKind::arity;
    else if (kind == "sentiment") violation.kind = ViolationKind::sentiment;
    else if (kind == "category") violation.kind = ViolationKind::category;
    else if (kind == "term_absent") violation.kind = ViolationKind::term_absent;
    else violation.kind = ViolationKind::format;
    violation.detail = v.value("detail", "");
    if (v.contains("tuple_index") && !v["tuple_index"].is_null())
      violation.tuple_index = v["tuple_index"].get<std::size_t>();
    record.violations.push_back(std::move(violation));
  }
  record.template_version = doc.value("template_version", "");
  record.elapsed_ms = doc.value("elapsed_ms", std::int64_t{0});
  return record;
}

std::vector<PredictionRecord> read_records(const std::filesystem::path& jsonl_path) {
  std::ifstream in(jsonl_path);
  if (!in)
    throw RunnerError(RunnerError::Kind::io,
                      "cannot open records file: " + jsonl_path.string());
  std::vector<PredictionRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw RunnerError(RunnerError::Kind::io,
                        jsonl_path.string() + ":" + std::to_string(line_no) +
                            ": bad record: " + e.what());
    }
  }
  return records;
}

std::vector<CellScores> score_records(const std::vector<PredictionRecord>& records,
                                      const std::vector<Example>& test,
                                      const RunConfig& config) {
  std::map<RecordKey, const PredictionRecord*> by_key;
  for (const PredictionRecord& record : records)
    by_key[{record.shot_count, record.generation_seed, record.example_id}] = &record;

  std::vector<LabelSet> golds;
  golds.reserve(test.size());
  for (const Example& example : test) golds.push_back(example.gold);

  std::vector<CellScores> cells;
  for (int k : config.shot_counts) {
    CellScores cell;
    cell.id = {config.dataset_name, config.task, k, false, config.model};

    std::vector<std::vector<LabelSet>> per_seed_preds;
    for (int seed : config.generation_seeds) {
      std::vector<LabelSet> preds;
      preds.reserve(test.size());
      for (const Example& example : test) {
        auto it = by_key.find({k, seed, example.id});
        if (it == by_key.end())
          throw RunnerError(RunnerError::Kind::io,
                            "missing record for k=" + std::to_string(k) +
                                " seed=" + std::to_string(seed) +
                                " example=" + std::to_string(example.id) +
                                "; run is incomplete");
        preds.push_back(it->second->label);
      }
      cell.per_seed.push_back(micro_prf(preds, golds));
      for (Granularity element : elements_for(config.task))
        cell.per_seed_elements[to_string(element)].push_back(
            element_prf(preds, golds, element, config.task));
      per_seed_preds.push_back(std::move(preds));
    }

    cell.summary = aggregate_seeds(cell.per_seed, cell.id);

    if (config.sc) {
      // The SC label of an example is merged from exactly the records of
      // this cell, one per generation seed.
      std::vector<LabelSet> merged;
      merged.reserve(test.size());
      for (std::size_t i = 0; i < test.size(); ++i) {
        SeedRunSet runs;
        for (const auto& preds : per_seed_preds) runs.labels.push_back(preds[i]);
        merged.push_back(merge_sc(runs));
      }
      cell.has_sc = true;
      cell.sc_tuple = micro_prf(merged, golds);
      for (Granularity element : elements_for(config.task))
        cell.sc_elements[to_string(element)] =
            element_prf(merged, golds, element, config.task);
    }

    cells.push_back(std::move(cell));
  }
  return cells;
}

void write_reports(const std::filesystem::path& results_dir,
                   const std::vector<CellScores>& cells, const RunConfig& config) {
  const auto reports_dir = results_dir / "reports";
  std::filesystem::create_directories(reports_dir);

  ordered_json doc;
  doc["dataset"] = config.dataset_name;
  doc["task"] = to_string(config.task);
  doc["model"] = config.model;
  doc["notes"] =
      "scores are exact-match micro percentages; a zero denominator makes the "
      "affected ratio 0; std is the sample standard deviation across seeds";
  doc["cells"] = ordered_json::array();

  std::ostringstream csv;
  csv << "dataset,task,k,sc,model,seed,granularity,tp,n_pred,n_gold,"
         "precision,recall,f1,mean,std\n";
  auto csv_prefix = [&](int k, const std::string& sc, const std::string& seed) {
    csv << config.dataset_name << ',' << to_string(config.task) << ',' << k
        << ',' << sc << ',' << config.model << ',' << seed << ',';
  };
  auto csv_counts = [&](const MetricsReport& report) {
    csv << to_string(report.granularity) << ',' << report.tp << ','
        << report.n_pred << ',' << report.n_gold << ','
        << format_score(report.precision) << ',' << format_score(report.recall)
        << ',' << format_score(report.f1);
  };

  for (const CellScores& cell : cells) {
    ordered_json cell_json;
    cell_json["k"] = cell.id.shot_count;
    cell_json["per_seed"] = ordered_json::array();

    for (std::size_t s = 0; s < cell.per_seed.size(); ++s) {
      const int seed = config.generation_seeds[s];
      ordered_json seed_json;
      seed_json["seed"] = seed;
      seed_json["tuple"] = report_to_json(cell.per_seed[s]);
      for (const auto& [element, reports] : cell.per_seed_elements)
        seed_json[element] = report_to_json(reports[s]);
      cell_json["per_seed"].push_back(std::move(seed_json));

      csv_prefix(cell.id.shot_count, "false", std::to_string(seed));
      csv_counts(cell.per_seed[s]);
      csv << ",,\n";
      for (const auto& [element, reports] : cell.per_seed_elements) {
        csv_prefix(cell.id.shot_count, "false", std::to_string(seed));
        csv_counts(reports[s]);
        csv << ",,\n";
      }
    }

    ordered_json summary;
    summary["mean_f1"] = round2(cell.summary.mean_f1);
    summary["std_f1"] = round2(cell.summary.std_f1);
    summary["mean_precision"] = round2(cell.summary.mean_precision);
    summary["std_precision"] = round2(cell.summary.std_precision);
    summary["mean_recall"] = round2(cell.summary.mean_recall);
    summary["std_recall"] = round2(cell.summary.std_recall);
    summary["per_seed_f1"] = ordered_json::array();
    for (double f1 : cell.summary.per_seed_f1)
      summary["per_seed_f1"].push_back(round2(f1));
    cell_json["summary"] = std::move(summary);

    csv_prefix(cell.id.shot_count, "false", "avg");
    csv << "tuple,,,," << format_score(cell.summary.mean_precision) << ','
        << format_score(cell.summary.mean_recall) << ','
        << format_score(cell.summary.mean_f1) << ','
        << format_score(cell.summary.mean_f1) << ','
        << format_score(cell.summary.std_f1) << '\n';

    if (cell.has_sc) {
      ordered_json sc_json;
      sc_json["tuple"] = report_to_json(cell.sc_tuple);
      for (const auto& [element, report] : cell.sc_elements)
        sc_json[element] = report_to_json(report);
      cell_json["sc"] = std::move(sc_json);

      csv_prefix(cell.id.shot_count, "true", "");
      csv_counts(cell.sc_tuple);
      csv << ",,\n";
      for (const auto& [element, report] : cell.sc_elements) {
        csv_prefix(cell.id.shot_count, "true", "");
        csv_counts(report);
        csv << ",,\n";
      }
    }

    doc["cells"].push_back(std::move(cell_json));
  }

  {
    std::ofstream out(reports_dir / "metrics.json");
    if (!out)
      throw RunnerError(RunnerError::Kind::io, "cannot write metrics.json");
    out << doc.dump(2) << '\n';
  }
  {
    std::ofstream out(reports_dir / "metrics.csv");
    if (!out)
      throw RunnerError(RunnerError::Kind::io, "cannot write metrics.csv");
    out << csv.str();
  }
}

}  // namespace absa
