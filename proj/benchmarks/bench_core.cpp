#include <benchmark/benchmark.h>

#include <filesystem>
#include <vector>

#include "absa/consistency.hpp"
#include "absa/label_format.hpp"
#include "absa/metrics.hpp"
#include "absa/prompt.hpp"
#include "absa/rng.hpp"
#include "absa/types.hpp"

namespace {

using namespace absa;

std::vector<Example> bench_examples(int count) {
  std::vector<Example> examples;
  for (int i = 0; i < count; ++i) {
    Example example;
    example.id = i;
    example.sentence = "the thing" + std::to_string(i) + " was nice" +
                       std::to_string(i) + " but loud" + std::to_string(i) + " .";
    example.gold.insert(make_quad("thing" + std::to_string(i), "food quality",
                                  Polarity::positive, "nice" + std::to_string(i)));
    example.gold.insert(make_quad("thing" + std::to_string(i), "ambience general",
                                  Polarity::negative, "loud" + std::to_string(i)));
    examples.push_back(std::move(example));
  }
  return examples;
}

const std::vector<std::string> kTaxonomy = {
    "food quality", "service general", "ambience general", "restaurant general"};

void BM_parse_label_list(benchmark::State& state) {
  const std::string text =
      "[(\"pizza\", \"food quality\", \"positive\", \"delicious\"), "
      "(\"staff\", \"service general\", \"negative\", \"rude\"), "
      "(\"NULL\", \"ambience general\", \"neutral\", \"loud-ish\")]";
  for (auto _ : state) {
    auto parsed = parse_label_list(text);
    benchmark::DoNotOptimize(parsed);
  }
}
BENCHMARK(BM_parse_label_list);

void BM_serialize_label(benchmark::State& state) {
  const auto examples = bench_examples(1);
  for (auto _ : state) {
    auto text = serialize_prompt_style(examples[0].gold);
    benchmark::DoNotOptimize(text);
  }
}
BENCHMARK(BM_serialize_label);

void BM_micro_prf(benchmark::State& state) {
  const auto examples = bench_examples(static_cast<int>(state.range(0)));
  std::vector<LabelSet> golds;
  golds.reserve(examples.size());
  for (const Example& example : examples) golds.push_back(example.gold);
  for (auto _ : state) {
    auto report = micro_prf(golds, golds);
    benchmark::DoNotOptimize(report);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_micro_prf)->Arg(500)->Arg(5000);

void BM_merge_sc(benchmark::State& state) {
  const auto examples = bench_examples(1);
  SeedRunSet runs;
  runs.labels.assign(5, examples[0].gold);
  for (auto _ : state) {
    auto merged = merge_sc(runs);
    benchmark::DoNotOptimize(merged);
  }
}
BENCHMARK(BM_merge_sc);

void BM_build_prompt(benchmark::State& state) {
  const auto tmpl = load_template(std::filesystem::path(ABSA_TEMPLATE_DIR) /
                                  "asqp_default.json");
  const auto train = bench_examples(100);
  const auto shots =
      shuffle_shots(sample_shots(train, static_cast<std::size_t>(state.range(0)), 1), 0);
  for (auto _ : state) {
    auto prompt = build_prompt(tmpl, kTaxonomy, shots, "the target was great .");
    benchmark::DoNotOptimize(prompt);
  }
}
BENCHMARK(BM_build_prompt)->Arg(0)->Arg(10)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
