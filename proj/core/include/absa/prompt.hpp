#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "absa/types.hpp"

namespace absa {

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A versioned prompt template. Loaded from a JSON file; the layout string
/// holds the named placeholders {preamble}, {elements}, {taxonomy},
/// {format}, {examples} and {target} that rendering fills in.
struct PromptTemplate {
  std::string version;
  Task task = Task::asqp;
  std::string preamble;
  std::vector<std::pair<std::string, std::string>> element_explanations;
  std::string format_instruction;
  std::string category_header;
  std::string example_header;
  std::string sentence_prefix = "Sentence: ";
  std::string label_prefix = "Label: ";
  std::string layout;
  bool uncased = false;  // lowercase shot sentences and target when set
};

/// Loads and validates a template: element explanations must match the
/// task arity (four for ASQP, three for TASD), the format instruction must
/// state the exact-phrase requirement, and the layout must contain the
/// taxonomy, example and target placeholders.
PromptTemplate load_template(const std::filesystem::path& path);

/// Same validation for templates built in memory.
void validate_template(const PromptTemplate& tmpl);

/// Few-shot examples for one experiment cell. The same set is reused for
/// every generation seed; only the presentation order changes per seed.
struct ShotSet {
  std::vector<Example> examples;
  std::uint64_t source_seed = 0;
  std::size_t k = 0;
};

/// Draws k distinct examples from the train split, deterministically for
/// (train, k, sampling_seed). Throws std::invalid_argument when k exceeds
/// the train size.
ShotSet sample_shots(const std::vector<Example>& train, std::size_t k,
                     std::uint64_t sampling_seed);

/// Deterministic permutation of the shot set for one generation seed.
std::vector<Example> shuffle_shots(const ShotSet& shots,
                                   std::uint64_t generation_seed);

/// Renders the full prompt. Pure: byte-identical output for identical
/// inputs. Shot labels are serialized in the same tuple syntax the
/// validator parses.
std::string build_prompt(const PromptTemplate& tmpl,
                         const std::vector<std::string>& taxonomy,
                         const std::vector<Example>& shots,
                         const std::string& target_sentence);

}  // namespace absa
