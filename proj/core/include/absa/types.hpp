#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace absa {

/// Which extraction task a dataset, template or label belongs to.
/// ASQP labels are (aspect term, category, polarity, opinion term) quads,
/// TASD labels are (aspect term, category, polarity) triplets.
enum class Task { asqp, tasd };

inline constexpr int arity_of(Task task) { return task == Task::asqp ? 4 : 3; }

inline std::string to_string(Task task) {
  return task == Task::asqp ? "ASQP" : "TASD";
}

inline std::optional<Task> parse_task(std::string_view text) {
  if (text == "ASQP" || text == "asqp") return Task::asqp;
  if (text == "TASD" || text == "tasd") return Task::tasd;
  return std::nullopt;
}

/// The three representable polarities. No other value exists.
enum class Polarity { positive, negative, neutral };

inline std::string to_string(Polarity polarity) {
  switch (polarity) {
    case Polarity::positive: return "positive";
    case Polarity::negative: return "negative";
    default: return "neutral";
  }
}

inline std::optional<Polarity> parse_polarity(std::string_view text) {
  if (text == "positive") return Polarity::positive;
  if (text == "negative") return Polarity::negative;
  if (text == "neutral") return Polarity::neutral;
  return std::nullopt;
}

/// Sentinel used by the released corpora for implicit aspect/opinion terms.
inline constexpr std::string_view kImplicitTerm = "NULL";

inline bool is_implicit(std::string_view term) { return term == kImplicitTerm; }

/// One opinion annotation. For ASQP all four elements are set; for TASD
/// opinion_term is empty (nullopt), giving the tuple arity 3.
struct Tuple {
  std::string aspect_term;
  std::string category;
  Polarity polarity = Polarity::positive;
  std::optional<std::string> opinion_term;

  int arity() const { return opinion_term.has_value() ? 4 : 3; }

  auto operator<=>(const Tuple&) const = default;
};

inline Tuple make_quad(std::string aspect, std::string category,
                       Polarity polarity, std::string opinion) {
  return Tuple{std::move(aspect), std::move(category), polarity,
               std::move(opinion)};
}

inline Tuple make_triplet(std::string aspect, std::string category,
                          Polarity polarity) {
  return Tuple{std::move(aspect), std::move(category), polarity, std::nullopt};
}

/// Drops the opinion term, turning an ASQP quad into a TASD triplet.
inline Tuple project_triplet(const Tuple& quad) {
  return Tuple{quad.aspect_term, quad.category, quad.polarity, std::nullopt};
}

/// Labels have set semantics: duplicate tuples never count twice.
using LabelSet = std::set<Tuple>;

/// A sentence with its gold label set. Ids are the 0-based line index
/// within the split the example was read from.
struct Example {
  int id = 0;
  std::string sentence;
  LabelSet gold;

  bool operator==(const Example&) const = default;
};

/// A fully loaded dataset: taxonomy plus the three splits.
struct DatasetSpec {
  std::string name;
  Task task = Task::asqp;
  std::vector<std::string> taxonomy;
  std::vector<Example> train;
  std::vector<Example> dev;
  std::vector<Example> test;
  std::string domain;
};

}  // namespace absa
