#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "absa/gateway.hpp"
#include "absa/label_format.hpp"
#include "absa/types.hpp"

namespace absa {

enum class ViolationKind { format, arity, sentiment, category, term_absent };

std::string to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind = ViolationKind::format;
  std::string detail;
  std::optional<std::size_t> tuple_index;
};

/// Raw generation parsed into string tuples, not yet validated.
struct ParsedLabel {
  std::vector<RawTuple> tuples;
  int arity = 4;
};

/// Repairs the stripped stop character (appends ']' when missing), then
/// parses. Prose around the label list and tuples of the wrong size are
/// violations, not exceptions.
std::variant<ParsedLabel, Violation> parse_label(const std::string& text, Task task);

struct ValidatorOptions {
  /// Accept the NULL sentinel for aspect/opinion terms (gold data contains
  /// implicit terms). When false, NULL is treated like any other term and
  /// fails the substring rule.
  bool allow_implicit = true;
};

/// Checks every tuple against all rules and reports all violations
/// together: polarity must be one of the three values, the category must
/// be in the taxonomy, and non-sentinel terms must appear in the sentence
/// as predicted (case-sensitive). On success returns the deduplicated set.
std::variant<LabelSet, std::vector<Violation>> validate_label(
    const ParsedLabel& label, const std::string& sentence,
    const std::vector<std::string>& taxonomy, Task task,
    const ValidatorOptions& options = {});

/// Outcome of the generate/parse/validate loop for one (example, seed).
struct PredictionRecord {
  int example_id = 0;
  int generation_seed = 0;
  int shot_count = 0;
  int attempts = 0;
  bool valid = false;
  LabelSet label;
  std::vector<std::string> raw_generations;
  std::vector<Violation> violations;
  std::string template_version;
  std::int64_t elapsed_ms = 0;
};

using GenerateFn = std::function<RawGeneration(const GenerationRequest&)>;

/// Seed offset between regeneration attempts, so a seed-honoring backend
/// does not resample the identical invalid output ten times.
inline constexpr int kAttemptSeedStride = 1000003;

/// Generates until a label validates or max_attempts is exhausted, in
/// which case the record carries the empty label, valid=false and the full
/// violation history. Gateway errors propagate; they are not validation
/// failures.
PredictionRecord acquire_label(const Example& example, const std::string& prompt,
                               const GenerateFn& generate,
                               const GenerationRequest& base_request, Task task,
                               const std::vector<std::string>& taxonomy,
                               const ValidatorOptions& options = {},
                               int max_attempts = 10);

}  // namespace absa
