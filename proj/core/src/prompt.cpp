#include "absa/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <nlohmann/json.hpp>

#include "absa/label_format.hpp"
#include "absa/rng.hpp"

namespace absa {
namespace {

using nlohmann::json;

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return s;
}

void replace_all(std::string& text, std::string_view token,
                 const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(token, pos)) != std::string::npos) {
    text.replace(pos, token.size(), value);
    pos += value.size();
  }
}

constexpr std::string_view kDefaultLayout =
    "{preamble}\n\n{elements}\n\n{taxonomy}\n\n{format}\n\n{examples}{target}";

}  // namespace

void validate_template(const PromptTemplate& tmpl) {
  if (tmpl.version.empty())
    throw TemplateError("template version must not be empty");
  const std::size_t expected = static_cast<std::size_t>(arity_of(tmpl.task));
  if (tmpl.element_explanations.size() != expected)
    throw TemplateError("a " + to_string(tmpl.task) + " template must explain " +
                        std::to_string(expected) + " sentiment elements, got " +
                        std::to_string(tmpl.element_explanations.size()));
  if (tmpl.format_instruction.find("exact") == std::string::npos)
    throw TemplateError(
        "format instruction must state the exact-phrase requirement");
  for (std::string_view placeholder : {"{taxonomy}", "{examples}", "{target}"}) {
    if (tmpl.layout.find(placeholder) == std::string::npos)
      throw TemplateError("layout is missing the " + std::string(placeholder) +
                          " placeholder");
  }
}

PromptTemplate load_template(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TemplateError("cannot open template file: " + path.string());

  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw TemplateError("invalid template JSON in " + path.string() + ": " +
                        e.what());
  }

  PromptTemplate tmpl;
  try {
    tmpl.version = doc.at("version").get<std::string>();
    auto task = parse_task(doc.at("task").get<std::string>());
    if (!task) throw TemplateError("unknown task in template: " + path.string());
    tmpl.task = *task;
    tmpl.preamble = doc.at("preamble").get<std::string>();
    for (const auto& item : doc.at("elements")) {
      tmpl.element_explanations.emplace_back(item.at(0).get<std::string>(),
                                             item.at(1).get<std::string>());
    }
    tmpl.format_instruction = doc.at("format_instruction").get<std::string>();
    tmpl.category_header = doc.value("category_header", "Allowed aspect categories:");
    tmpl.example_header = doc.value("example_header", "Examples:");
    tmpl.sentence_prefix = doc.value("sentence_prefix", "Sentence: ");
    tmpl.label_prefix = doc.value("label_prefix", "Label: ");
    tmpl.layout = doc.value("layout", std::string(kDefaultLayout));
    tmpl.uncased = doc.value("uncased", false);
  } catch (const json::exception& e) {
    throw TemplateError("template " + path.string() + ": " + e.what());
  }

  validate_template(tmpl);
  return tmpl;
}

ShotSet sample_shots(const std::vector<Example>& train, std::size_t k,
                     std::uint64_t sampling_seed) {
  if (k > train.size())
    throw std::invalid_argument("sample_shots: k=" + std::to_string(k) +
                                " exceeds train size " +
                                std::to_string(train.size()));
  ShotSet shots;
  shots.source_seed = sampling_seed;
  shots.k = k;
  for (std::size_t index : sample_indices(train.size(), k, sampling_seed))
    shots.examples.push_back(train[index]);
  return shots;
}

std::vector<Example> shuffle_shots(const ShotSet& shots,
                                   std::uint64_t generation_seed) {
  std::vector<Example> ordered = shots.examples;
  deterministic_shuffle(ordered, generation_seed);
  return ordered;
}

std::string build_prompt(const PromptTemplate& tmpl,
                         const std::vector<std::string>& taxonomy,
                         const std::vector<Example>& shots,
                         const std::string& target_sentence) {
  if (target_sentence.empty())
    throw std::invalid_argument("build_prompt: empty target sentence");

  std::string elements;
  for (std::size_t i = 0; i < tmpl.element_explanations.size(); ++i) {
    const auto& [name, text] = tmpl.element_explanations[i];
    if (i > 0) elements += "\n";
    elements += "- " + name + ": " + text;
  }

  std::string taxonomy_block = tmpl.category_header;
  for (const std::string& category : taxonomy)
    taxonomy_block += "\n- " + category;

  std::string example_block;
  if (!shots.empty()) {
    example_block = tmpl.example_header + "\n";
    for (const Example& shot : shots) {
      const std::string sentence =
          tmpl.uncased ? lowercase(shot.sentence) : shot.sentence;
      std::string label = serialize_prompt_style(shot.gold);
      if (tmpl.uncased) label = lowercase(label);  // keep terms consistent
      example_block += tmpl.sentence_prefix + sentence + "\n" +
                       tmpl.label_prefix + label + "\n\n";
    }
  }

  const std::string target =
      tmpl.sentence_prefix +
      (tmpl.uncased ? lowercase(target_sentence) : target_sentence) + "\n" +
      tmpl.label_prefix;

  std::string prompt = tmpl.layout;
  replace_all(prompt, "{preamble}", tmpl.preamble);
  replace_all(prompt, "{elements}", elements);
  replace_all(prompt, "{taxonomy}", taxonomy_block);
  replace_all(prompt, "{format}", tmpl.format_instruction);
  replace_all(prompt, "{examples}", example_block);
  replace_all(prompt, "{target}", target);
  return prompt;
}

}  // namespace absa
