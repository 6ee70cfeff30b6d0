#pragma once

#include <vector>

#include "absa/types.hpp"

namespace absa {

/// The per-seed validated labels for one example.
struct SeedRunSet {
  std::vector<LabelSet> labels;

  std::size_t size() const { return labels.size(); }
};

/// Self-consistency merge: a tuple enters the merged label iff it appears
/// in a strict majority of the runs (count > n/2; for five runs that is at
/// least 3 of 5). Requires at least one run; n = 1 is the identity.
LabelSet merge_sc(const SeedRunSet& runs);

}  // namespace absa
