#include "absa/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "absa/label_format.hpp"
#include "absa/rng.hpp"

namespace absa {
namespace {

constexpr std::string_view kSeparator = "####";

std::string trim(std::string_view s) {
  std::size_t begin = 0, end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return std::string(s.substr(begin, end - begin));
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line_no,
                       const std::string& what) {
  std::ostringstream msg;
  msg << path.string() << ":" << line_no << ": " << what;
  throw ParseError(msg.str());
}

bool in_taxonomy(const std::string& category,
                 const std::vector<std::string>& taxonomy) {
  return std::find(taxonomy.begin(), taxonomy.end(), category) != taxonomy.end();
}

Tuple tuple_from_raw(const std::filesystem::path& path, std::size_t line_no,
                     const RawTuple& raw, Task task, const std::string& sentence,
                     const std::vector<std::string>& taxonomy) {
  if (static_cast<int>(raw.size()) != arity_of(task)) {
    std::ostringstream msg;
    msg << "expected " << arity_of(task) << "-tuples for " << to_string(task)
        << ", got a tuple of size " << raw.size();
    fail(path, line_no, msg.str());
  }

  const std::string aspect = raw[0];
  const std::string category = trim(raw[1]);
  const auto polarity = parse_polarity(raw[2]);

  if (!is_implicit(aspect) && trim(aspect).empty())
    fail(path, line_no, "empty aspect term");
  if (!is_implicit(aspect) && sentence.find(aspect) == std::string::npos)
    fail(path, line_no, "aspect term '" + aspect + "' not found in sentence");
  if (!in_taxonomy(category, taxonomy))
    fail(path, line_no, "category '" + category + "' not in taxonomy");
  if (!polarity)
    fail(path, line_no, "unknown polarity '" + raw[2] + "'");

  if (task == Task::tasd) return make_triplet(aspect, category, *polarity);

  const std::string opinion = raw[3];
  if (!is_implicit(opinion) && trim(opinion).empty())
    fail(path, line_no, "empty opinion term");
  if (!is_implicit(opinion) && sentence.find(opinion) == std::string::npos)
    fail(path, line_no, "opinion term '" + opinion + "' not found in sentence");
  return make_quad(aspect, category, *polarity, opinion);
}

void warn(std::vector<std::string>* warnings, std::string message) {
  if (warnings) warnings->push_back(std::move(message));
}

}  // namespace

std::vector<std::string> parse_taxonomy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open taxonomy file: " + path.string());

  std::vector<std::string> taxonomy;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string category = trim(line);
    if (category.empty()) continue;
    if (!seen.insert(category).second)
      fail(path, line_no, "duplicate category '" + category + "'");
    taxonomy.push_back(std::move(category));
  }
  if (taxonomy.empty())
    throw ParseError("taxonomy file is empty: " + path.string());
  return taxonomy;
}

std::vector<Example> parse_dataset_file(const std::filesystem::path& path,
                                        Task task,
                                        const std::vector<std::string>& taxonomy,
                                        std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file: " + path.string());

  std::vector<Example> examples;
  std::string line;
  std::size_t line_no = 0;
  std::size_t null_opinions = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;

    const std::size_t sep = line.find(kSeparator);
    if (sep == std::string::npos)
      fail(path, line_no, "missing '####' separator");

    const std::string sentence = trim(line.substr(0, sep));
    if (sentence.empty()) fail(path, line_no, "empty sentence");

    auto parsed = parse_label_list(trim(line.substr(sep + kSeparator.size())));
    if (auto* e = std::get_if<LabelSyntaxError>(&parsed))
      fail(path, line_no, "malformed label list: " + e->message);
    const auto& raw_tuples = std::get<std::vector<RawTuple>>(parsed);
    if (raw_tuples.empty()) fail(path, line_no, "empty gold label");

    Example example;
    example.id = static_cast<int>(examples.size());
    example.sentence = sentence;
    for (const RawTuple& raw : raw_tuples) {
      Tuple tuple = tuple_from_raw(path, line_no, raw, task, sentence, taxonomy);
      if (task == Task::asqp && tuple.opinion_term && is_implicit(*tuple.opinion_term))
        ++null_opinions;
      if (!example.gold.insert(std::move(tuple)).second) {
        std::ostringstream msg;
        msg << path.string() << ":" << line_no << ": duplicate gold tuple collapsed";
        warn(warnings, msg.str());
      }
    }
    examples.push_back(std::move(example));
  }

  if (null_opinions > 0) {
    std::ostringstream msg;
    msg << path.string() << ": " << null_opinions
        << " gold tuple(s) carry a NULL opinion term";
    warn(warnings, msg.str());
  }
  return examples;
}

std::string serialize_example_line(const Example& example) {
  return example.sentence + std::string(kSeparator) +
         serialize_file_style(example.gold);
}

DatasetSpec load_dataset(const std::string& name, const std::string& domain,
                         Task task,
                         const std::filesystem::path& taxonomy_path,
                         const std::filesystem::path& train_path,
                         const std::filesystem::path& dev_path,
                         const std::filesystem::path& test_path,
                         std::vector<std::string>* warnings) {
  DatasetSpec dataset;
  dataset.name = name;
  dataset.domain = domain;
  dataset.task = task;
  dataset.taxonomy = parse_taxonomy(taxonomy_path);
  dataset.train = parse_dataset_file(train_path, task, dataset.taxonomy, warnings);
  dataset.dev = parse_dataset_file(dev_path, task, dataset.taxonomy, warnings);
  dataset.test = parse_dataset_file(test_path, task, dataset.taxonomy, warnings);
  return dataset;
}

std::vector<Example> derive_tasd(const std::vector<Example>& examples) {
  std::vector<Example> derived;
  derived.reserve(examples.size());
  for (const Example& example : examples) {
    Example out;
    out.id = example.id;
    out.sentence = example.sentence;
    for (const Tuple& quad : example.gold)
      out.gold.insert(project_triplet(quad));
    derived.push_back(std::move(out));
  }
  return derived;
}

DatasetSpec derive_tasd(const DatasetSpec& dataset) {
  if (dataset.task != Task::asqp)
    throw std::invalid_argument("derive_tasd requires an ASQP dataset");
  DatasetSpec out = dataset;
  out.task = Task::tasd;
  out.train = derive_tasd(dataset.train);
  out.dev = derive_tasd(dataset.dev);
  out.test = derive_tasd(dataset.test);
  return out;
}

SplitResult split_dataset(const std::vector<Example>& examples,
                          const std::array<double, 3>& ratios,
                          std::uint64_t seed) {
  if (examples.empty())
    throw std::invalid_argument("split_dataset: empty input");
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("split_dataset: ratios must sum to 1");

  std::vector<Example> shuffled = examples;
  deterministic_shuffle(shuffled, seed);

  const std::size_t n = shuffled.size();
  const auto n_test = static_cast<std::size_t>(std::floor(n * ratios[1]));
  const auto n_dev = static_cast<std::size_t>(std::floor(n * ratios[2]));
  const std::size_t n_train = n - n_test - n_dev;

  SplitResult result;
  result.train.assign(shuffled.begin(), shuffled.begin() + n_train);
  result.test.assign(shuffled.begin() + n_train,
                     shuffled.begin() + n_train + n_test);
  result.dev.assign(shuffled.begin() + n_train + n_test, shuffled.end());
  return result;
}

}  // namespace absa
