#include "absa/label_format.hpp"

#include <cctype>

namespace absa {
namespace {

struct Cursor {
  std::string_view text;
  std::size_t pos = 0;

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  void skip_ws() {
    while (!done() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }
};

LabelSyntaxError err(const Cursor& c, std::string message) {
  return LabelSyntaxError{std::move(message), c.pos};
}

// Quoted string with backslash escapes; the backslash always yields the
// following character verbatim.
std::variant<std::string, LabelSyntaxError> parse_string(Cursor& c) {
  const char quote = c.peek();
  ++c.pos;
  std::string out;
  while (!c.done()) {
    char ch = c.text[c.pos];
    if (ch == '\\') {
      if (c.pos + 1 >= c.text.size()) return err(c, "dangling escape");
      out.push_back(c.text[c.pos + 1]);
      c.pos += 2;
      continue;
    }
    if (ch == quote) {
      ++c.pos;
      return out;
    }
    out.push_back(ch);
    ++c.pos;
  }
  return err(c, "unterminated string");
}

std::variant<RawTuple, LabelSyntaxError> parse_tuple(Cursor& c) {
  const char open = c.peek();
  const char close = open == '(' ? ')' : ']';
  ++c.pos;
  RawTuple fields;
  c.skip_ws();
  if (!c.done() && c.peek() == close) return err(c, "empty tuple");
  while (true) {
    c.skip_ws();
    if (c.done()) return err(c, "unterminated tuple");
    if (c.peek() != '\'' && c.peek() != '"')
      return err(c, "expected quoted string in tuple");
    auto field = parse_string(c);
    if (auto* e = std::get_if<LabelSyntaxError>(&field)) return *e;
    fields.push_back(std::move(std::get<std::string>(field)));
    c.skip_ws();
    if (c.done()) return err(c, "unterminated tuple");
    if (c.peek() == ',') {
      ++c.pos;
      c.skip_ws();
      if (!c.done() && c.peek() == close) {  // trailing comma, python-style
        ++c.pos;
        return fields;
      }
      continue;
    }
    if (c.peek() == close) {
      ++c.pos;
      return fields;
    }
    return err(c, "expected ',' or tuple close");
  }
}

char quote_char_for_repr(const std::string& s) {
  // repr-like: prefer single quotes, switch to double quotes when the
  // value contains a single quote but no double quote.
  if (s.find('\'') != std::string::npos && s.find('"') == std::string::npos)
    return '"';
  return '\'';
}

void append_quoted(std::string& out, const std::string& s, char quote) {
  out.push_back(quote);
  for (char ch : s) {
    if (ch == quote || ch == '\\') out.push_back('\\');
    out.push_back(ch);
  }
  out.push_back(quote);
}

std::string serialize(std::span<const RawTuple> tuples, char open, char close,
                      bool repr_quotes) {
  std::string out = "[";
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    if (i > 0) out += ", ";
    out.push_back(open);
    const RawTuple& t = tuples[i];
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (j > 0) out += ", ";
      append_quoted(out, t[j], repr_quotes ? quote_char_for_repr(t[j]) : '"');
    }
    out.push_back(close);
  }
  out.push_back(']');
  return out;
}

std::vector<RawTuple> to_raw_tuples(const LabelSet& label) {
  std::vector<RawTuple> raw;
  raw.reserve(label.size());
  for (const Tuple& t : label) raw.push_back(to_raw(t));
  return raw;
}

}  // namespace

LabelParseResult parse_label_list(std::string_view text) {
  Cursor c{text};
  c.skip_ws();
  if (c.done() || c.peek() != '[')
    return err(c, "expected '[' at start of label list");
  ++c.pos;
  std::vector<RawTuple> tuples;
  c.skip_ws();
  if (!c.done() && c.peek() == ']') {
    ++c.pos;
  } else {
    while (true) {
      c.skip_ws();
      if (c.done()) return err(c, "unterminated label list");
      if (c.peek() != '(' && c.peek() != '[')
        return err(c, "expected tuple open '(' or '['");
      auto tuple = parse_tuple(c);
      if (auto* e = std::get_if<LabelSyntaxError>(&tuple)) return *e;
      tuples.push_back(std::move(std::get<RawTuple>(tuple)));
      c.skip_ws();
      if (c.done()) return err(c, "unterminated label list");
      if (c.peek() == ',') {
        ++c.pos;
        c.skip_ws();
        if (!c.done() && c.peek() == ']') {
          ++c.pos;
          break;
        }
        continue;
      }
      if (c.peek() == ']') {
        ++c.pos;
        break;
      }
      return err(c, "expected ',' or ']'");
    }
  }
  c.skip_ws();
  if (!c.done()) return err(c, "trailing characters after label list");
  return tuples;
}

std::string serialize_file_style(std::span<const RawTuple> tuples) {
  return serialize(tuples, '[', ']', /*repr_quotes=*/true);
}

std::string serialize_file_style(const LabelSet& label) {
  auto raw = to_raw_tuples(label);
  return serialize_file_style(raw);
}

std::string serialize_prompt_style(std::span<const RawTuple> tuples) {
  return serialize(tuples, '(', ')', /*repr_quotes=*/false);
}

std::string serialize_prompt_style(const LabelSet& label) {
  auto raw = to_raw_tuples(label);
  return serialize_prompt_style(raw);
}

RawTuple to_raw(const Tuple& tuple) {
  RawTuple raw{tuple.aspect_term, tuple.category, to_string(tuple.polarity)};
  if (tuple.opinion_term) raw.push_back(*tuple.opinion_term);
  return raw;
}

}  // namespace absa
