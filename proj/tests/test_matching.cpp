#include <numeric>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "qrl/matching.hpp"
#include "qrl/rng.hpp"

using namespace qrl;

namespace {

// Exhaustive oracle: recursively pairs the lowest unmatched node with every
// candidate partner. (2k-1)!! pairings, fine up to ~12 nodes.
std::int64_t brute_force_min(const WeightMatrix& w, std::vector<bool>& used) {
  const int n = static_cast<int>(w.size());
  int i = 0;
  while (i < n && used[i]) ++i;
  if (i == n) return 0;
  used[i] = true;
  std::int64_t best = std::numeric_limits<std::int64_t>::max() / 4;
  for (int j = i + 1; j < n; ++j) {
    if (used[j]) continue;
    used[j] = true;
    best = std::min(best, w[i][j] + brute_force_min(w, used));
    used[j] = false;
  }
  used[i] = false;
  return best;
}

std::int64_t brute_force_min(const WeightMatrix& w) {
  std::vector<bool> used(w.size(), false);
  return brute_force_min(w, used);
}

WeightMatrix random_instance(int n, Rng& rng, int max_w) {
  WeightMatrix w(n, std::vector<std::int64_t>(n, 0));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      w[i][j] = w[j][i] = rng.uniform_int(max_w + 1);
    }
  }
  return w;
}

void check_valid_matching(const WeightMatrix& w, const std::vector<int>& mate) {
  REQUIRE(mate.size() == w.size());
  for (size_t i = 0; i < mate.size(); ++i) {
    REQUIRE(mate[i] >= 0);
    REQUIRE(mate[i] < static_cast<int>(mate.size()));
    CHECK(mate[i] != static_cast<int>(i));
    CHECK(mate[mate[i]] == static_cast<int>(i));
  }
}

}  // namespace

TEST_CASE("two nodes match each other") {
  const WeightMatrix w = {{0, 7}, {7, 0}};
  for (auto* solve : {mwpm_subset_dp, mwpm_blossom, min_weight_perfect_matching}) {
    const auto mate = solve(w);
    CHECK(mate == std::vector<int>{1, 0});
    CHECK(matching_weight(w, mate) == 7);
  }
}

TEST_CASE("both engines match the exhaustive oracle") {
  Rng rng(11);
  for (int n : {4, 6, 8, 10, 12}) {
    for (int trial = 0; trial < 50; ++trial) {
      CAPTURE(n);
      CAPTURE(trial);
      const WeightMatrix w = random_instance(n, rng, 20);
      const std::int64_t expected = brute_force_min(w);

      const auto dp = mwpm_subset_dp(w);
      check_valid_matching(w, dp);
      CHECK(matching_weight(w, dp) == expected);

      const auto blossom = mwpm_blossom(w);
      check_valid_matching(w, blossom);
      CHECK(matching_weight(w, blossom) == expected);
    }
  }
}

TEST_CASE("tiny weight ranges stress ties and blossom contractions") {
  Rng rng(12);
  for (int n : {6, 8, 10}) {
    for (int trial = 0; trial < 80; ++trial) {
      CAPTURE(n);
      CAPTURE(trial);
      const WeightMatrix w = random_instance(n, rng, 2);
      const std::int64_t expected = brute_force_min(w);
      CHECK(matching_weight(w, mwpm_subset_dp(w)) == expected);
      CHECK(matching_weight(w, mwpm_blossom(w)) == expected);
    }
  }
}

TEST_CASE("engines agree above the oracle range") {
  Rng rng(13);
  for (int n : {14, 16, 18}) {
    for (int trial = 0; trial < 10; ++trial) {
      CAPTURE(n);
      CAPTURE(trial);
      const WeightMatrix w = random_instance(n, rng, 15);
      const auto dp = mwpm_subset_dp(w);
      const auto blossom = mwpm_blossom(w);
      check_valid_matching(w, dp);
      check_valid_matching(w, blossom);
      CHECK(matching_weight(w, dp) == matching_weight(w, blossom));
    }
  }
}

TEST_CASE("two triangles force one expensive cross edge") {
  // Nodes {0,1,2} and {3,4,5} are cheap internally but a perfect matching
  // must cross between the odd-sized clusters exactly once.
  WeightMatrix w(6, std::vector<std::int64_t>(6, 10));
  for (int i = 0; i < 6; ++i) w[i][i] = 0;
  for (int i : {0, 1, 2}) {
    for (int j : {0, 1, 2}) {
      if (i != j) w[i][j] = 1;
    }
  }
  for (int i : {3, 4, 5}) {
    for (int j : {3, 4, 5}) {
      if (i != j) w[i][j] = 1;
    }
  }
  CHECK(matching_weight(w, mwpm_subset_dp(w)) == 12);
  CHECK(matching_weight(w, mwpm_blossom(w)) == 12);
}

TEST_CASE("subset DP reconstruction is lowest-index-first") {
  // All weights equal: every pairing optimal, so node 0 must take node 1,
  // node 2 must take node 3, and so on.
  WeightMatrix w(6, std::vector<std::int64_t>(6, 4));
  for (int i = 0; i < 6; ++i) w[i][i] = 0;
  CHECK(mwpm_subset_dp(w) == std::vector<int>{1, 0, 3, 2, 5, 4});
}

TEST_CASE("dispatch uses both engines consistently") {
  Rng rng(14);
  const WeightMatrix small = random_instance(8, rng, 9);
  CHECK(min_weight_perfect_matching(small) == mwpm_subset_dp(small));

  const WeightMatrix large = random_instance(18, rng, 9);
  const auto via_dispatch = min_weight_perfect_matching(large);
  check_valid_matching(large, via_dispatch);
  CHECK(matching_weight(large, via_dispatch) ==
        matching_weight(large, mwpm_blossom(large)));
}

TEST_CASE("deterministic outputs") {
  Rng rng(15);
  const WeightMatrix w = random_instance(10, rng, 6);
  CHECK(mwpm_subset_dp(w) == mwpm_subset_dp(w));
  CHECK(mwpm_blossom(w) == mwpm_blossom(w));
}

TEST_CASE("input validation") {
  CHECK(min_weight_perfect_matching({}).empty());
  CHECK(mwpm_subset_dp({}).empty());
  CHECK(mwpm_blossom({}).empty());

  const WeightMatrix odd(3, std::vector<std::int64_t>(3, 1));
  CHECK_THROWS_AS(min_weight_perfect_matching(odd), std::invalid_argument);

  WeightMatrix ragged = {{0, 1}, {1}};
  CHECK_THROWS_AS(min_weight_perfect_matching(ragged), std::invalid_argument);

  WeightMatrix negative = {{0, -1}, {-1, 0}};
  CHECK_THROWS_AS(mwpm_blossom(negative), std::invalid_argument);
}
