#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "absa/corpus.hpp"
#include "absa/types.hpp"

namespace absa::testing {

inline const std::vector<std::string>& small_taxonomy() {
  static const std::vector<std::string> taxonomy = {
      "food quality", "service general", "ambience general",
      "restaurant general", "drinks quality"};
  return taxonomy;
}

/// Synthetic but well-formed examples: every non-sentinel term is a
/// substring of its sentence, terms are unique within an example (so a
/// polarity flip can never collide with another gold tuple), and every
/// seventh example carries an implicit (NULL) aspect.
inline std::vector<Example> make_examples(int count, Task task) {
  const auto& taxonomy = small_taxonomy();
  const Polarity polarities[] = {Polarity::positive, Polarity::negative,
                                 Polarity::neutral};
  std::vector<Example> examples;
  for (int i = 0; i < count; ++i) {
    Example example;
    example.id = i;
    std::string sentence = "I think";
    const int n_tuples = 1 + (i % 3);
    for (int j = 0; j < n_tuples; ++j) {
      const std::string aspect = "item" + std::to_string(i) + "_" + std::to_string(j);
      const std::string opinion = "desc" + std::to_string(i) + "_" + std::to_string(j);
      sentence += " the " + aspect + " is " + opinion + (j + 1 < n_tuples ? " ," : " .");
      const std::string category = taxonomy[(i + j) % taxonomy.size()];
      const Polarity polarity = polarities[(i + j) % 3];
      const bool implicit_aspect = (i % 7 == 0) && j == 0;
      if (task == Task::asqp) {
        example.gold.insert(make_quad(implicit_aspect ? "NULL" : aspect,
                                      category, polarity, opinion));
      } else {
        example.gold.insert(make_triplet(implicit_aspect ? "NULL" : aspect,
                                         category, polarity));
      }
    }
    example.sentence = sentence;
    examples.push_back(std::move(example));
  }
  return examples;
}

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path = std::filesystem::temp_directory_path() /
           ("absa_test_" + std::to_string(rng()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

inline std::filesystem::path write_lines(const std::filesystem::path& path,
                                         const std::vector<std::string>& lines) {
  std::ofstream out(path);
  for (const std::string& line : lines) out << line << '\n';
  return path;
}

inline std::filesystem::path write_taxonomy(const std::filesystem::path& dir) {
  std::vector<std::string> lines = small_taxonomy();
  return write_lines(dir / "taxonomy.txt", lines);
}

inline std::filesystem::path write_dataset(const std::filesystem::path& path,
                                           const std::vector<Example>& examples) {
  std::vector<std::string> lines;
  lines.reserve(examples.size());
  for (const Example& example : examples)
    lines.push_back(serialize_example_line(example));
  return write_lines(path, lines);
}

inline std::filesystem::path template_path(Task task) {
  return std::filesystem::path(ABSA_TEMPLATE_DIR) /
         (task == Task::asqp ? "asqp_default.json" : "tasd_default.json");
}

}  // namespace absa::testing
