#pragma once

#include <cstdint>
#include <vector>

namespace qrl {

// Symmetric weight matrix of a complete graph on an even number of nodes.
using WeightMatrix = std::vector<std::vector<std::int64_t>>;

// Exact minimum-weight perfect matching. Returns mate[i] = partner of i.
// Dispatches to an exhaustive subset-DP for small graphs and to a blossom
// matcher above that; both are exact, so the split is purely a cost choice.
std::vector<int> min_weight_perfect_matching(const WeightMatrix& weights);

// The two exact engines, exposed so tests can cross-check them.
std::vector<int> mwpm_subset_dp(const WeightMatrix& weights);
std::vector<int> mwpm_blossom(const WeightMatrix& weights);

std::int64_t matching_weight(const WeightMatrix& weights, const std::vector<int>& mate);

}  // namespace qrl
