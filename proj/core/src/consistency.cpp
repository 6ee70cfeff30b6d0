#include "absa/consistency.hpp"

#include <map>
#include <stdexcept>

namespace absa {

LabelSet merge_sc(const SeedRunSet& runs) {
  if (runs.labels.empty())
    throw std::invalid_argument("merge_sc: need at least one run");

  std::map<Tuple, std::size_t> votes;
  for (const LabelSet& label : runs.labels)
    for (const Tuple& tuple : label) ++votes[tuple];

  const std::size_t n = runs.labels.size();
  LabelSet merged;
  for (const auto& [tuple, count] : votes)
    if (count * 2 > n) merged.insert(tuple);
  return merged;
}

}  // namespace absa
