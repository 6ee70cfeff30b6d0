#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "absa/types.hpp"

namespace absa {

/// Raised for unreadable or malformed dataset/taxonomy files. Messages
/// carry the file path and 1-based line number where applicable.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One category per line, UTF-8, trimmed; blank lines skipped.
/// Duplicate or empty taxonomies are errors.
std::vector<std::string> parse_taxonomy(const std::filesystem::path& path);

/// Parses one split in the canonical `SENTENCE####LABEL_LIST` line format.
/// Examples get ids 0..n-1 in file order. Duplicate gold tuples are
/// collapsed to a set; each collapse is reported through `warnings` (when
/// given), as is a summary of NULL opinion terms encountered.
std::vector<Example> parse_dataset_file(const std::filesystem::path& path,
                                        Task task,
                                        const std::vector<std::string>& taxonomy,
                                        std::vector<std::string>* warnings = nullptr);

/// Canonical serialization of an example as one dataset line
/// (gold tuples in set order, repr-like quoting).
std::string serialize_example_line(const Example& example);

/// Loads train/dev/test plus the taxonomy into one DatasetSpec.
DatasetSpec load_dataset(const std::string& name, const std::string& domain,
                         Task task,
                         const std::filesystem::path& taxonomy_path,
                         const std::filesystem::path& train_path,
                         const std::filesystem::path& dev_path,
                         const std::filesystem::path& test_path,
                         std::vector<std::string>* warnings = nullptr);

/// Projects every quad to its (aspect term, category, polarity) triplet and
/// drops per-sentence duplicates. Sentence set and order are unchanged.
std::vector<Example> derive_tasd(const std::vector<Example>& examples);
DatasetSpec derive_tasd(const DatasetSpec& dataset);

struct SplitResult {
  std::vector<Example> train;
  std::vector<Example> test;
  std::vector<Example> dev;
};

/// Deterministic shuffled partition. `ratios` is (train, test, dev) and
/// must sum to 1 within 1e-9. Test and dev sizes are floored, the
/// remainder goes to train. Original example ids are preserved.
SplitResult split_dataset(const std::vector<Example>& examples,
                          const std::array<double, 3>& ratios,
                          std::uint64_t seed);

}  // namespace absa
