#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "absa/types.hpp"

namespace absa {

/// A tuple as it appears in text, before any semantic validation.
using RawTuple = std::vector<std::string>;

struct LabelSyntaxError {
  std::string message;
  std::size_t offset = 0;  // byte offset into the input
};

using LabelParseResult = std::variant<std::vector<RawTuple>, LabelSyntaxError>;

/// Parses a bracketed label list such as
///   [['pizza', 'food quality', 'positive', 'Great']]
///   [("pizza", "food quality", "positive", "Great"), ("x", "y", "z", "w")]
/// Tuples may use () or [], strings may be single- or double-quoted with
/// backslash escapes. Leading/trailing whitespace is tolerated, anything
/// else outside the brackets is a syntax error. An empty list parses to an
/// empty vector; callers decide whether that is acceptable.
LabelParseResult parse_label_list(std::string_view text);

/// Corpus line style: square-bracket tuples, repr-like quoting
/// ([['a', 'c', 'p', 'o'], ...]). Used when writing dataset files.
std::string serialize_file_style(std::span<const RawTuple> tuples);
std::string serialize_file_style(const LabelSet& label);

/// Prompt/completion style: parenthesised tuples, double quotes
/// ([("a", "c", "p", "o"), ...]). The closing ']' is the only square
/// bracket after the opening one, so a stop sequence of "]" truncates
/// exactly at the end of the label.
std::string serialize_prompt_style(std::span<const RawTuple> tuples);
std::string serialize_prompt_style(const LabelSet& label);

/// String fields of a tuple in canonical element order
/// (aspect term, category, polarity[, opinion term]).
RawTuple to_raw(const Tuple& tuple);

}  // namespace absa
