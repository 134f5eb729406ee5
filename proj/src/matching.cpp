#include "qrl/matching.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <limits>
#include <stdexcept>

namespace qrl {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

void check_square_even(const WeightMatrix& w) {
  const size_t n = w.size();
  if (n % 2 != 0) {
    throw std::invalid_argument("perfect matching requires an even node count");
  }
  for (const auto& row : w) {
    if (row.size() != n) {
      throw std::invalid_argument("weight matrix must be square");
    }
  }
}

// Maximum-weight matching on a complete graph, primal-dual with blossom
// contraction, O(n^3). Classic formulation: integral duals are kept exact by
// measuring slack as lab[u] + lab[v] - 2*w(u,v). 1-indexed internally;
// indices above n denote contracted blossoms.
struct BlossomMatcher {
  struct Edge {
    int u = 0, v = 0;
    std::int64_t w = 0;
  };

  int n, n_x;
  std::vector<std::vector<Edge>> g;
  std::vector<std::int64_t> lab;
  std::vector<int> match, slack, st, pa, S, vis;
  std::vector<std::vector<int>> flower, flower_from;
  std::deque<int> q;
  int timestamp = 0;

  explicit BlossomMatcher(const WeightMatrix& weights) {
    n = static_cast<int>(weights.size());
    const int m = 2 * n + 1;
    g.assign(m, std::vector<Edge>(m));
    lab.assign(m, 0);
    match.assign(m, 0);
    slack.assign(m, 0);
    st.assign(m, 0);
    pa.assign(m, 0);
    S.assign(m, 0);
    vis.assign(m, 0);
    flower.assign(m, {});
    flower_from.assign(m, std::vector<int>(n + 1, 0));
    for (int u = 1; u <= n; ++u) {
      for (int v = 1; v <= n; ++v) {
        g[u][v] = {u, v, u == v ? 0 : weights[u - 1][v - 1]};
      }
    }
  }

  std::int64_t e_delta(const Edge& e) const {
    return lab[e.u] + lab[e.v] - g[e.u][e.v].w * 2;
  }

  void update_slack(int u, int x) {
    if (!slack[x] || e_delta(g[u][x]) < e_delta(g[slack[x]][x])) slack[x] = u;
  }

  void set_slack(int x) {
    slack[x] = 0;
    for (int u = 1; u <= n; ++u) {
      if (g[u][x].w > 0 && st[u] != x && S[st[u]] == 0) update_slack(u, x);
    }
  }

  void q_push(int x) {
    if (x <= n) {
      q.push_back(x);
    } else {
      for (int i : flower[x]) q_push(i);
    }
  }

  void set_st(int x, int b) {
    st[x] = b;
    if (x > n) {
      for (int i : flower[x]) set_st(i, b);
    }
  }

  int get_pr(int b, int xr) {
    int pr = static_cast<int>(std::find(flower[b].begin(), flower[b].end(), xr) -
                              flower[b].begin());
    if (pr % 2 == 1) {
      std::reverse(flower[b].begin() + 1, flower[b].end());
      return static_cast<int>(flower[b].size()) - pr;
    }
    return pr;
  }

  void set_match(int u, int v) {
    match[u] = g[u][v].v;
    if (u <= n) return;
    Edge e = g[u][v];
    int xr = flower_from[u][e.u];
    int pr = get_pr(u, xr);
    for (int i = 0; i < pr; ++i) set_match(flower[u][i], flower[u][i ^ 1]);
    set_match(xr, v);
    std::rotate(flower[u].begin(), flower[u].begin() + pr, flower[u].end());
  }

  void augment(int u, int v) {
    for (;;) {
      int xnv = st[match[u]];
      set_match(u, v);
      if (!xnv) return;
      set_match(xnv, st[pa[xnv]]);
      u = st[pa[xnv]];
      v = xnv;
    }
  }

  int get_lca(int u, int v) {
    for (++timestamp; u || v; std::swap(u, v)) {
      if (u == 0) continue;
      if (vis[u] == timestamp) return u;
      vis[u] = timestamp;
      u = st[match[u]];
      if (u) u = st[pa[u]];
    }
    return 0;
  }

  void add_blossom(int u, int lca, int v) {
    int b = n + 1;
    while (b <= n_x && st[b]) ++b;
    if (b > n_x) ++n_x;
    lab[b] = 0;
    S[b] = 0;
    match[b] = match[lca];
    flower[b].clear();
    flower[b].push_back(lca);
    for (int x = u, y; x != lca; x = st[pa[y]]) {
      flower[b].push_back(x);
      flower[b].push_back(y = st[match[x]]);
      q_push(y);
    }
    std::reverse(flower[b].begin() + 1, flower[b].end());
    for (int x = v, y; x != lca; x = st[pa[y]]) {
      flower[b].push_back(x);
      flower[b].push_back(y = st[match[x]]);
      q_push(y);
    }
    set_st(b, b);
    for (int x = 1; x <= n_x; ++x) g[b][x].w = g[x][b].w = 0;
    for (int x = 1; x <= n; ++x) flower_from[b][x] = 0;
    for (int xs : flower[b]) {
      for (int x = 1; x <= n_x; ++x) {
        if (g[b][x].w == 0 || e_delta(g[xs][x]) < e_delta(g[b][x])) {
          g[b][x] = g[xs][x];
          g[x][b] = g[x][xs];
        }
      }
      for (int x = 1; x <= n; ++x) {
        if (flower_from[xs][x]) flower_from[b][x] = xs;
      }
    }
    set_slack(b);
  }

  void expand_blossom(int b) {
    for (int i : flower[b]) set_st(i, i);
    int xr = flower_from[b][g[b][pa[b]].u];
    int pr = get_pr(b, xr);
    for (int i = 0; i < pr; i += 2) {
      int xs = flower[b][i];
      int xns = flower[b][i + 1];
      pa[xs] = g[xns][xs].u;
      S[xs] = 1;
      S[xns] = 0;
      slack[xs] = 0;
      set_slack(xns);
      q_push(xns);
    }
    S[xr] = 1;
    pa[xr] = pa[b];
    for (size_t i = pr + 1; i < flower[b].size(); ++i) {
      int xs = flower[b][i];
      S[xs] = -1;
      set_slack(xs);
    }
    st[b] = 0;
  }

  bool on_found_edge(const Edge& e) {
    int u = st[e.u];
    int v = st[e.v];
    if (S[v] == -1) {
      pa[v] = e.u;
      S[v] = 1;
      int nu = st[match[v]];
      slack[v] = slack[nu] = 0;
      S[nu] = 0;
      q_push(nu);
    } else if (S[v] == 0) {
      int lca = get_lca(u, v);
      if (!lca) {
        augment(u, v);
        augment(v, u);
        return true;
      }
      add_blossom(u, lca, v);
    }
    return false;
  }

  bool matching() {
    std::fill(S.begin(), S.begin() + n_x + 1, -1);
    std::fill(slack.begin(), slack.begin() + n_x + 1, 0);
    q.clear();
    for (int x = 1; x <= n_x; ++x) {
      if (st[x] == x && !match[x]) {
        pa[x] = 0;
        S[x] = 0;
        q_push(x);
      }
    }
    if (q.empty()) return false;
    for (;;) {
      while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        if (S[st[u]] == 1) continue;
        for (int v = 1; v <= n; ++v) {
          if (g[u][v].w > 0 && st[u] != st[v]) {
            if (e_delta(g[u][v]) == 0) {
              if (on_found_edge(g[u][v])) return true;
            } else {
              update_slack(u, st[v]);
            }
          }
        }
      }
      std::int64_t d = kInf;
      for (int b = n + 1; b <= n_x; ++b) {
        if (st[b] == b && S[b] == 1) d = std::min(d, lab[b] / 2);
      }
      for (int x = 1; x <= n_x; ++x) {
        if (st[x] == x && slack[x]) {
          if (S[x] == -1) {
            d = std::min(d, e_delta(g[slack[x]][x]));
          } else if (S[x] == 0) {
            d = std::min(d, e_delta(g[slack[x]][x]) / 2);
          }
        }
      }
      for (int u = 1; u <= n; ++u) {
        if (S[st[u]] == 0) {
          if (lab[u] <= d) return false;
          lab[u] -= d;
        } else if (S[st[u]] == 1) {
          lab[u] += d;
        }
      }
      for (int b = n + 1; b <= n_x; ++b) {
        if (st[b] == b) {
          if (S[b] == 0) {
            lab[b] += d * 2;
          } else if (S[b] == 1) {
            lab[b] -= d * 2;
          }
        }
      }
      q.clear();
      for (int x = 1; x <= n_x; ++x) {
        if (st[x] == x && slack[x] && st[slack[x]] != x &&
            e_delta(g[slack[x]][x]) == 0) {
          if (on_found_edge(g[slack[x]][x])) return true;
        }
      }
      for (int b = n + 1; b <= n_x; ++b) {
        if (st[b] == b && S[b] == 1 && lab[b] == 0) expand_blossom(b);
      }
    }
  }

  std::vector<int> solve() {
    n_x = n;
    std::int64_t w_max = 0;
    for (int u = 0; u < 2 * n + 1; ++u) st[u] = u;
    for (int u = 1; u <= n; ++u) {
      for (int v = 1; v <= n; ++v) {
        flower_from[u][v] = (u == v ? u : 0);
        w_max = std::max(w_max, g[u][v].w);
      }
    }
    for (int u = 1; u <= n; ++u) lab[u] = w_max;
    while (matching()) {
    }
    std::vector<int> mate(n, -1);
    for (int u = 1; u <= n; ++u) {
      if (match[u]) mate[u - 1] = match[u] - 1;
    }
    return mate;
  }
};

}  // namespace

std::vector<int> mwpm_subset_dp(const WeightMatrix& weights) {
  check_square_even(weights);
  const int n = static_cast<int>(weights.size());
  if (n == 0) return {};
  if (n > 22) {
    throw std::invalid_argument("subset DP limited to 22 nodes");
  }
  const std::uint32_t full = (1u << n) - 1;
  std::vector<std::int64_t> dp(full + 1, kInf);
  dp[0] = 0;
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    if (std::popcount(mask) % 2 != 0) continue;
    const int i = std::countr_zero(mask);
    const std::uint32_t rest = mask & ~(1u << i);
    std::int64_t best = kInf;
    for (std::uint32_t bits = rest; bits;) {
      const int j = std::countr_zero(bits);
      bits &= bits - 1;
      const std::int64_t sub = dp[rest & ~(1u << j)];
      if (sub < kInf) best = std::min(best, sub + weights[i][j]);
    }
    dp[mask] = best;
  }
  if (dp[full] >= kInf) {
    throw std::runtime_error("no perfect matching exists");
  }
  // Reconstruct lowest-index-first: the smallest unmatched node takes the
  // smallest partner that achieves the optimum.
  std::vector<int> mate(n, -1);
  std::uint32_t mask = full;
  while (mask) {
    const int i = std::countr_zero(mask);
    const std::uint32_t rest = mask & ~(1u << i);
    for (std::uint32_t bits = rest; bits;) {
      const int j = std::countr_zero(bits);
      bits &= bits - 1;
      const std::int64_t sub = dp[rest & ~(1u << j)];
      if (sub < kInf && sub + weights[i][j] == dp[mask]) {
        mate[i] = j;
        mate[j] = i;
        mask = rest & ~(1u << j);
        break;
      }
    }
  }
  return mate;
}

std::vector<int> mwpm_blossom(const WeightMatrix& weights) {
  check_square_even(weights);
  const int n = static_cast<int>(weights.size());
  if (n == 0) return {};
  // Reduce minimization to maximum-weight matching: flip weights around a
  // constant large enough that a perfect matching always outweighs leaving
  // nodes unmatched.
  std::int64_t w_max = 0;
  for (const auto& row : weights) {
    for (auto w : row) {
      if (w < 0) throw std::invalid_argument("matching weights must be non-negative");
      w_max = std::max(w_max, w);
    }
  }
  const std::int64_t big = w_max * (n / 2) + 1;
  WeightMatrix flipped(n, std::vector<std::int64_t>(n, 0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) flipped[i][j] = big - weights[i][j];
    }
  }
  BlossomMatcher matcher(flipped);
  std::vector<int> mate = matcher.solve();
  for (int i = 0; i < n; ++i) {
    if (mate[i] < 0 || mate[mate[i]] != i) {
      throw std::runtime_error("blossom matcher failed to produce a perfect matching");
    }
  }
  return mate;
}

std::vector<int> min_weight_perfect_matching(const WeightMatrix& weights) {
  check_square_even(weights);
  return weights.size() <= 16 ? mwpm_subset_dp(weights) : mwpm_blossom(weights);
}

std::int64_t matching_weight(const WeightMatrix& weights, const std::vector<int>& mate) {
  std::int64_t total = 0;
  for (size_t i = 0; i < mate.size(); ++i) {
    if (static_cast<size_t>(mate[i]) > i) total += weights[i][mate[i]];
  }
  return total;
}

}  // namespace qrl
