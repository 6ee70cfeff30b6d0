// Batch harness for zero-/few-shot ASQP and TASD evaluation:
//   run     execute an experiment grid against a backend
//   resume  continue an interrupted run (config hash guarded)
//   score   recompute all reports from persisted records
//   report  print condition summaries and significance tests
//   split   shuffle-split one dataset file into train/test/dev

#include <array>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "absa/corpus.hpp"
#include "absa/gateway.hpp"
#include "absa/metrics.hpp"
#include "absa/runner.hpp"

namespace {

// 0 = success, 1 = unexpected error, 2 = config/input error,
// 3 = transport failure, 4 = completed but some labels fell back to []
constexpr int kExitOk = 0;
constexpr int kExitUnexpected = 1;
constexpr int kExitConfig = 2;
constexpr int kExitTransport = 3;
constexpr int kExitValidationFallback = 4;

struct CliOverrides {
  std::string config_path;
  std::string dataset_name, domain, taxonomy, train, dev, test, task;
  bool derive_tasd = false;
  std::vector<int> shots, seeds;
  std::uint64_t sampling_seed = 0;
  bool sampling_seed_set = false;
  bool sc = false, no_sc = false;
  bool allow_nonstandard_shots = false;
  std::size_t test_limit = 0;
  bool test_limit_set = false;
  std::string backend_kind, backend_params, endpoint;
  std::string model, stop, template_path, output_dir;
  double temperature = -1.0;
  int max_tokens = 0, max_attempts = 0, workers = 0;
  bool no_implicit = false;
};

void add_config_flags(CLI::App* cmd, CliOverrides& o) {
  cmd->add_option("--config", o.config_path, "JSON config file; flags override it");
  cmd->add_option("--dataset-name", o.dataset_name, "Dataset identifier for reports");
  cmd->add_option("--domain", o.domain, "Dataset domain label");
  cmd->add_option("--taxonomy", o.taxonomy, "Taxonomy file, one category per line");
  cmd->add_option("--train", o.train, "Train split file");
  cmd->add_option("--dev", o.dev, "Dev split file");
  cmd->add_option("--test", o.test, "Test split file");
  cmd->add_option("--task", o.task, "ASQP or TASD");
  cmd->add_flag("--derive-tasd", o.derive_tasd,
                "Parse files as ASQP quads, evaluate projected triplets");
  cmd->add_option("--shots", o.shots, "Shot counts, e.g. --shots 0 10 20");
  cmd->add_option("--seeds", o.seeds, "Generation seeds (default 0..4)");
  cmd->add_option("--sampling-seed", o.sampling_seed, "Shot sampling seed")
      ->each([&o](const std::string&) { o.sampling_seed_set = true; });
  cmd->add_flag("--sc", o.sc, "Enable self-consistency merging");
  cmd->add_flag("--no-sc", o.no_sc, "Disable self-consistency merging");
  cmd->add_flag("--allow-nonstandard-shots", o.allow_nonstandard_shots,
                "Accept shot counts outside {0,10,20,30,40,50}");
  cmd->add_option("--test-limit", o.test_limit, "Evaluate only the first N test examples")
      ->each([&o](const std::string&) { o.test_limit_set = true; });
  cmd->add_option("--backend", o.backend_kind, "live | replay_gold | scripted | perturb");
  cmd->add_option("--backend-params", o.backend_params, "Backend params as inline JSON");
  cmd->add_option("--endpoint", o.endpoint, "Shortcut for live backend endpoint URL");
  cmd->add_option("--model", o.model, "Model identifier sent to the endpoint");
  cmd->add_option("--temperature", o.temperature, "Sampling temperature (default 0.8)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--stop", o.stop, "Stop sequence (default \"]\")");
  cmd->add_option("--max-tokens", o.max_tokens, "Completion token budget")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-attempts", o.max_attempts, "Regeneration budget per example")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--no-implicit", o.no_implicit,
                "Reject the NULL sentinel in predicted terms");
  cmd->add_option("--template", o.template_path, "Prompt template JSON file");
  cmd->add_option("--out", o.output_dir, "Results directory");
  cmd->add_option("--workers", o.workers, "Concurrent generation workers")
      ->check(CLI::PositiveNumber);
}

absa::RunConfig assemble_config(const CliOverrides& o, absa::RunConfig base) {
  if (!o.dataset_name.empty()) base.dataset_name = o.dataset_name;
  if (!o.domain.empty()) base.domain = o.domain;
  if (!o.taxonomy.empty()) base.taxonomy_path = o.taxonomy;
  if (!o.train.empty()) base.train_path = o.train;
  if (!o.dev.empty()) base.dev_path = o.dev;
  if (!o.test.empty()) base.test_path = o.test;
  if (!o.task.empty()) {
    auto task = absa::parse_task(o.task);
    if (!task)
      throw absa::RunnerError(absa::RunnerError::Kind::config,
                              "unknown task: " + o.task);
    base.task = *task;
  }
  if (o.derive_tasd) base.derive_tasd_from_asqp = true;
  if (!o.shots.empty()) base.shot_counts = o.shots;
  if (!o.seeds.empty()) base.generation_seeds = o.seeds;
  if (o.sampling_seed_set) base.sampling_seed = o.sampling_seed;
  if (o.sc) base.sc = true;
  if (o.no_sc) base.sc = false;
  if (o.allow_nonstandard_shots) base.allow_nonstandard_shot_counts = true;
  if (o.test_limit_set) base.test_limit = o.test_limit;
  if (!o.backend_kind.empty()) {
    auto kind = absa::parse_backend_kind(o.backend_kind);
    if (!kind)
      throw absa::RunnerError(absa::RunnerError::Kind::config,
                              "unknown backend kind: " + o.backend_kind);
    base.backend.kind = *kind;
  }
  if (!o.backend_params.empty()) {
    try {
      base.backend.params = nlohmann::json::parse(o.backend_params);
    } catch (const nlohmann::json::exception& e) {
      throw absa::RunnerError(absa::RunnerError::Kind::config,
                              std::string("bad --backend-params: ") + e.what());
    }
  }
  if (!o.endpoint.empty()) {
    base.backend.kind = absa::BackendKind::live;
    base.backend.params["endpoint"] = o.endpoint;
  }
  if (!o.model.empty()) base.model = o.model;
  if (o.temperature >= 0.0) base.temperature = o.temperature;
  if (!o.stop.empty()) base.stop = o.stop;
  if (o.max_tokens > 0) base.max_tokens = o.max_tokens;
  if (o.max_attempts > 0) base.max_attempts = o.max_attempts;
  if (o.no_implicit) base.validator.allow_implicit = false;
  if (!o.template_path.empty()) base.template_path = o.template_path;
  if (!o.output_dir.empty()) base.output_dir = o.output_dir;
  if (o.workers > 0) base.workers = o.workers;

  if (base.template_path.empty()) {
    base.template_path = base.task == absa::Task::asqp
                             ? "templates/asqp_default.json"
                             : "templates/tasd_default.json";
  }
  return base;
}

absa::RunConfig config_from_results_dir(const std::string& results_dir) {
  std::ifstream in(std::filesystem::path(results_dir) / "manifest.json");
  if (!in)
    throw absa::RunnerError(absa::RunnerError::Kind::config,
                            "no manifest.json in " + results_dir);
  nlohmann::json manifest = nlohmann::json::parse(in);
  return absa::config_from_json(manifest.at("config"));
}

int report_outcome(const absa::RunResult& result) {
  std::cout << "records: " << result.records_total << " total, "
            << result.records_written << " new, " << result.invalid_records
            << " fell back to the empty label\n";
  std::cout << "results: " << result.results_dir.string() << "\n";
  return result.invalid_records > 0 ? kExitValidationFallback : kExitOk;
}

int run_report(const std::string& results_dir,
               const std::vector<std::string>& compare_pairs,
               std::size_t bonferroni_m, bool paired) {
  const absa::RunConfig config = config_from_results_dir(results_dir);
  absa::score_results(results_dir);  // refresh reports from records

  const auto records =
      absa::read_records(std::filesystem::path(results_dir) / "records.jsonl");

  // Rebuild per-cell scores for the summary table.
  absa::DatasetSpec dataset;
  {
    const absa::Task parse_as =
        config.derive_tasd_from_asqp ? absa::Task::asqp : config.task;
    dataset = absa::load_dataset(config.dataset_name, config.domain, parse_as,
                                 config.taxonomy_path, config.train_path,
                                 config.dev_path, config.test_path);
    if (config.derive_tasd_from_asqp) dataset = absa::derive_tasd(dataset);
  }
  std::vector<absa::Example> test = dataset.test;
  if (config.test_limit > 0 && config.test_limit < test.size())
    test.resize(config.test_limit);
  const auto cells = absa::score_records(records, test, config);

  std::cout << std::left << std::setw(6) << "k" << std::setw(10) << "mean F1"
            << std::setw(10) << "std F1" << std::setw(10) << "mean P"
            << std::setw(10) << "mean R" << std::setw(10) << "SC F1" << "\n";
  std::cout << std::fixed << std::setprecision(2);
  for (const auto& cell : cells) {
    std::cout << std::left << std::setw(6) << cell.id.shot_count << std::setw(10)
              << cell.summary.mean_f1 << std::setw(10) << cell.summary.std_f1
              << std::setw(10) << cell.summary.mean_precision << std::setw(10)
              << cell.summary.mean_recall;
    if (cell.has_sc)
      std::cout << std::setw(10) << cell.sc_tuple.f1;
    else
      std::cout << std::setw(10) << "-";
    std::cout << "\n";
  }

  if (!compare_pairs.empty()) {
    const std::size_t m =
        bonferroni_m > 0 ? bonferroni_m : compare_pairs.size();
    std::cout << "\nsignificance (" << (paired ? "paired t" : "Welch t")
              << ", Bonferroni m=" << m << "):\n";
    for (const std::string& pair : compare_pairs) {
      const auto colon = pair.find(':');
      if (colon == std::string::npos)
        throw absa::RunnerError(absa::RunnerError::Kind::config,
                                "--compare expects kA:kB, got " + pair);
      const int ka = std::stoi(pair.substr(0, colon));
      const int kb = std::stoi(pair.substr(colon + 1));
      const absa::CellScores* cell_a = nullptr;
      const absa::CellScores* cell_b = nullptr;
      for (const auto& cell : cells) {
        if (cell.id.shot_count == ka) cell_a = &cell;
        if (cell.id.shot_count == kb) cell_b = &cell;
      }
      if (!cell_a || !cell_b)
        throw absa::RunnerError(absa::RunnerError::Kind::config,
                                "comparison cell not in this run: " + pair);
      const auto result =
          absa::compare_conditions(cell_a->summary.per_seed_f1,
                                   cell_b->summary.per_seed_f1, m, {paired});
      std::cout << "  k=" << ka << " vs k=" << kb << ": t=" << result.t
                << " p=" << result.raw_p << " p_adj=" << result.adjusted_p
                << (result.significant ? " significant" : " not significant")
                << "\n";
    }
  }
  return kExitOk;
}

int run_split(const std::string& input, const std::string& taxonomy_path,
              const std::string& task_name, const std::string& ratios_text,
              std::uint64_t seed, const std::string& out_prefix) {
  auto task = absa::parse_task(task_name);
  if (!task)
    throw absa::RunnerError(absa::RunnerError::Kind::config,
                            "unknown task: " + task_name);
  std::array<double, 3> ratios{};
  std::stringstream ss(ratios_text);
  std::string part;
  std::size_t i = 0;
  while (std::getline(ss, part, ',') && i < 3) ratios[i++] = std::stod(part);
  if (i != 3)
    throw absa::RunnerError(absa::RunnerError::Kind::config,
                            "--ratios expects train,test,dev");

  const auto taxonomy = absa::parse_taxonomy(taxonomy_path);
  const auto examples = absa::parse_dataset_file(input, *task, taxonomy);
  const auto split = absa::split_dataset(examples, ratios, seed);

  auto write_split = [&](const std::string& suffix,
                         const std::vector<absa::Example>& items) {
    const std::string path = out_prefix + suffix;
    std::ofstream out(path);
    if (!out)
      throw absa::RunnerError(absa::RunnerError::Kind::io, "cannot write " + path);
    for (const absa::Example& example : items)
      out << absa::serialize_example_line(example) << '\n';
    std::cout << path << ": " << items.size() << " examples\n";
  };
  write_split("train.txt", split.train);
  write_split("test.txt", split.test);
  write_split("dev.txt", split.dev);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-/few-shot ASQP and TASD evaluation harness"};
  app.require_subcommand(1);

  CliOverrides run_opts;
  auto* run_cmd = app.add_subcommand("run", "Execute an experiment grid");
  add_config_flags(run_cmd, run_opts);

  CliOverrides resume_opts;
  std::string resume_dir;
  auto* resume_cmd = app.add_subcommand("resume", "Continue an interrupted run");
  resume_cmd->add_option("--results", resume_dir, "Results directory")->required();
  add_config_flags(resume_cmd, resume_opts);

  std::string score_dir;
  auto* score_cmd = app.add_subcommand("score", "Recompute reports from records");
  score_cmd->add_option("--results", score_dir, "Results directory")->required();

  std::string report_dir;
  std::vector<std::string> compare_pairs;
  std::size_t bonferroni_m = 0;
  bool paired = false;
  auto* report_cmd = app.add_subcommand("report", "Print summaries and t-tests");
  report_cmd->add_option("--results", report_dir, "Results directory")->required();
  report_cmd->add_option("--compare", compare_pairs,
                         "Shot-count pairs to test, e.g. --compare 0:50");
  report_cmd->add_option("--bonferroni", bonferroni_m,
                         "Number of comparisons m (default: pairs given)");
  report_cmd->add_flag("--paired", paired, "Pair samples across seeds");

  std::string split_input, split_taxonomy, split_task = "ASQP";
  std::string split_ratios = "0.7,0.2,0.1", split_prefix;
  std::uint64_t split_seed = 42;
  auto* split_cmd = app.add_subcommand("split", "Shuffle-split a dataset file");
  split_cmd->add_option("--input", split_input, "Dataset file")->required();
  split_cmd->add_option("--taxonomy", split_taxonomy, "Taxonomy file")->required();
  split_cmd->add_option("--task", split_task, "ASQP or TASD");
  split_cmd->add_option("--ratios", split_ratios, "train,test,dev (default 0.7,0.2,0.1)");
  split_cmd->add_option("--seed", split_seed, "Shuffle seed");
  split_cmd->add_option("--out-prefix", split_prefix, "Output path prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run_cmd->parsed()) {
      absa::RunConfig base;
      if (!run_opts.config_path.empty())
        base = absa::load_config(run_opts.config_path);
      return report_outcome(
          absa::run_experiment(assemble_config(run_opts, base)));
    }
    if (resume_cmd->parsed()) {
      absa::RunConfig base = resume_opts.config_path.empty()
                                 ? config_from_results_dir(resume_dir)
                                 : absa::load_config(resume_opts.config_path);
      return report_outcome(
          absa::resume(assemble_config(resume_opts, base), resume_dir));
    }
    if (score_cmd->parsed()) return report_outcome(absa::score_results(score_dir));
    if (report_cmd->parsed())
      return run_report(report_dir, compare_pairs, bonferroni_m, paired);
    if (split_cmd->parsed())
      return run_split(split_input, split_taxonomy, split_task, split_ratios,
                       split_seed, split_prefix);
  } catch (const absa::RunnerError& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case absa::RunnerError::Kind::config: return kExitConfig;
      case absa::RunnerError::Kind::transport: return kExitTransport;
      case absa::RunnerError::Kind::io: return kExitConfig;
    }
    return kExitUnexpected;
  } catch (const absa::GatewayError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == absa::GatewayError::Kind::config ? kExitConfig
                                                        : kExitTransport;
  } catch (const absa::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUnexpected;
  }
  return kExitUnexpected;
}
