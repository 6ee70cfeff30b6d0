#include "absa/validator.hpp"

#include <algorithm>
#include <cctype>

namespace absa {
namespace {

bool term_in_sentence(const std::string& term, const std::string& sentence) {
  return sentence.find(term) != std::string::npos;
}

bool category_in_taxonomy(const std::string& category,
                          const std::vector<std::string>& taxonomy) {
  return std::find(taxonomy.begin(), taxonomy.end(), category) != taxonomy.end();
}

void check_term(const std::string& term, const char* role,
                const std::string& sentence, std::size_t index,
                const ValidatorOptions& options,
                std::vector<Violation>& violations) {
  if (options.allow_implicit && is_implicit(term)) return;
  if (!term_in_sentence(term, sentence)) {
    violations.push_back({ViolationKind::term_absent,
                          std::string(role) + " '" + term +
                              "' does not appear in the sentence as predicted",
                          index});
  }
}

}  // namespace

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::format: return "format";
    case ViolationKind::arity: return "arity";
    case ViolationKind::sentiment: return "sentiment";
    case ViolationKind::category: return "category";
    default: return "term_absent";
  }
}

std::variant<ParsedLabel, Violation> parse_label(const std::string& text, Task task) {
  std::string repaired = text;
  while (!repaired.empty() &&
         std::isspace(static_cast<unsigned char>(repaired.back())))
    repaired.pop_back();
  if (repaired.empty() || repaired.back() != ']')
    repaired.push_back(']');  // the gateway strips the stop character

  auto parsed = parse_label_list(repaired);
  if (auto* e = std::get_if<LabelSyntaxError>(&parsed))
    return Violation{ViolationKind::format, e->message, std::nullopt};

  auto tuples = std::move(std::get<std::vector<RawTuple>>(parsed));
  if (tuples.empty())
    return Violation{ViolationKind::format,
                     "the label must contain at least one tuple", std::nullopt};

  const int arity = arity_of(task);
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    if (static_cast<int>(tuples[i].size()) != arity) {
      return Violation{ViolationKind::arity,
                       "expected " + std::to_string(arity) +
                           " elements per tuple for " + to_string(task) +
                           ", got " + std::to_string(tuples[i].size()),
                       i};
    }
  }
  return ParsedLabel{std::move(tuples), arity};
}

std::variant<LabelSet, std::vector<Violation>> validate_label(
    const ParsedLabel& label, const std::string& sentence,
    const std::vector<std::string>& taxonomy, Task task,
    const ValidatorOptions& options) {
  std::vector<Violation> violations;
  LabelSet accepted;

  for (std::size_t i = 0; i < label.tuples.size(); ++i) {
    const RawTuple& raw = label.tuples[i];

    check_term(raw[0], "aspect term", sentence, i, options, violations);

    if (!category_in_taxonomy(raw[1], taxonomy)) {
      violations.push_back({ViolationKind::category,
                            "category '" + raw[1] + "' is not in the taxonomy",
                            i});
    }

    const auto polarity = parse_polarity(raw[2]);
    if (!polarity) {
      violations.push_back({ViolationKind::sentiment,
                            "sentiment '" + raw[2] +
                                "' is not positive, negative or neutral",
                            i});
    }

    if (task == Task::asqp)
      check_term(raw[3], "opinion term", sentence, i, options, violations);

    if (violations.empty()) {
      accepted.insert(task == Task::asqp
                          ? make_quad(raw[0], raw[1], *polarity, raw[3])
                          : make_triplet(raw[0], raw[1], *polarity));
    }
  }

  if (!violations.empty()) return violations;
  return accepted;
}

PredictionRecord acquire_label(const Example& example, const std::string& prompt,
                               const GenerateFn& generate,
                               const GenerationRequest& base_request, Task task,
                               const std::vector<std::string>& taxonomy,
                               const ValidatorOptions& options,
                               int max_attempts) {
  if (max_attempts < 1)
    throw std::invalid_argument("acquire_label: max_attempts must be >= 1");

  PredictionRecord record;
  record.example_id = example.id;
  record.generation_seed = base_request.seed;

  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    GenerationRequest request = base_request;
    request.prompt = prompt;
    request.example_id = example.id;
    request.seed = base_request.seed + attempt * kAttemptSeedStride;

    RawGeneration generation = generate(request);
    record.raw_generations.push_back(generation.text);
    record.elapsed_ms += generation.latency.count();
    record.attempts = attempt + 1;

    auto parsed = parse_label(generation.text, task);
    if (auto* violation = std::get_if<Violation>(&parsed)) {
      record.violations.push_back(*violation);
      continue;
    }

    auto validated = validate_label(std::get<ParsedLabel>(parsed),
                                    example.sentence, taxonomy, task, options);
    if (auto* violations = std::get_if<std::vector<Violation>>(&validated)) {
      record.violations.insert(record.violations.end(), violations->begin(),
                               violations->end());
      continue;
    }

    record.valid = true;
    record.label = std::move(std::get<LabelSet>(validated));
    return record;
  }

  record.valid = false;
  record.label.clear();  // the empty label [] is the exhaustion fallback
  return record;
}

}  // namespace absa
