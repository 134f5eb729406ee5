#include "qrl/referee.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>

namespace qrl {

namespace {
constexpr int kUnreachable = std::numeric_limits<int>::max() / 2;
}

MatchingReferee::MatchingReferee(const CodeLayout& layout)
    : layout_(layout),
      x_sector_(build_sector(layout, StabilizerKind::kXType)),
      z_sector_(build_sector(layout, StabilizerKind::kZType)) {}

MatchingReferee::SectorGraph MatchingReferee::build_sector(const CodeLayout& layout,
                                                           StabilizerKind kind) {
  SectorGraph g;
  g.kind = kind;
  g.local_of_global.assign(layout.n_stabilizers(), -1);
  for (int s = 0; s < layout.n_stabilizers(); ++s) {
    if (layout.stabilizers()[s].kind == kind) {
      g.local_of_global[s] = static_cast<int>(g.stabs.size());
      g.stabs.push_back(s);
    }
  }
  const int n = static_cast<int>(g.stabs.size());
  const int boundary = n;
  g.adj.assign(n + 1, {});
  // Iterating qubits in ascending order keeps every adjacency list sorted by
  // qubit index, which is what the canonical-path tie-break scans.
  for (int q = 0; q < layout.n_qubits(); ++q) {
    const auto& on_q = layout.stabilizers_on_qubit(q, kind);
    if (on_q.size() == 2) {
      const int a = g.local_of_global[on_q[0]];
      const int b = g.local_of_global[on_q[1]];
      g.adj[a].emplace_back(b, q);
      g.adj[b].emplace_back(a, q);
    } else if (on_q.size() == 1) {
      const int a = g.local_of_global[on_q[0]];
      g.adj[a].emplace_back(boundary, q);
      g.adj[boundary].emplace_back(a, q);
    } else {
      throw std::logic_error("qubit outside every plaquette of a sector");
    }
  }
  g.dist.assign(n + 1, std::vector<int>(n + 1, kUnreachable));
  for (int src = 0; src <= n; ++src) {
    auto& dist = g.dist[src];
    dist[src] = 0;
    std::queue<int> frontier;
    frontier.push(src);
    while (!frontier.empty()) {
      const int x = frontier.front();
      frontier.pop();
      for (const auto& [nb, q] : g.adj[x]) {
        if (dist[nb] == kUnreachable) {
          dist[nb] = dist[x] + 1;
          frontier.push(nb);
        }
      }
    }
  }
  return g;
}

std::vector<int> MatchingReferee::canonical_path(const SectorGraph& g, int from,
                                                 int to) const {
  if (g.dist[from][to] >= kUnreachable) {
    throw std::logic_error("disconnected sector graph");
  }
  std::vector<int> qubits;
  int x = from;
  while (x != to) {
    bool advanced = false;
    for (const auto& [nb, q] : g.adj[x]) {
      if (g.dist[nb][to] + 1 == g.dist[x][to]) {
        qubits.push_back(q);
        x = nb;
        advanced = true;
        break;
      }
    }
    if (!advanced) throw std::logic_error("shortest-path walk stalled");
  }
  return qubits;
}

MatchingGraph MatchingReferee::build_matching_graph(const Syndrome& syndrome,
                                                    StabilizerKind kind) const {
  const SectorGraph& g = sector(kind);
  MatchingGraph out;
  out.sector = kind;
  for (int s = 0; s < layout_.n_stabilizers(); ++s) {
    if (syndrome.bits[s] && layout_.stabilizers()[s].kind == kind) {
      out.defects.push_back(s);
    }
  }
  const int n_defects = static_cast<int>(out.defects.size());
  const int boundary = static_cast<int>(g.stabs.size());
  out.boundary_dist.resize(n_defects);
  for (int i = 0; i < n_defects; ++i) {
    out.boundary_dist[i] = g.dist[g.local_of_global[out.defects[i]]][boundary];
  }
  out.has_boundary_node = n_defects % 2 == 1;
  const int n_nodes = n_defects + (out.has_boundary_node ? 1 : 0);
  out.weights.assign(n_nodes, std::vector<std::int64_t>(n_nodes, 0));
  for (int i = 0; i < n_defects; ++i) {
    for (int j = i + 1; j < n_defects; ++j) {
      const int li = g.local_of_global[out.defects[i]];
      const int lj = g.local_of_global[out.defects[j]];
      const std::int64_t w = std::min<std::int64_t>(
          g.dist[li][lj], out.boundary_dist[i] + out.boundary_dist[j]);
      out.weights[i][j] = out.weights[j][i] = w;
    }
    if (out.has_boundary_node) {
      out.weights[i][n_defects] = out.weights[n_defects][i] = out.boundary_dist[i];
    }
  }
  return out;
}

void MatchingReferee::decode_sector(const SectorGraph& g,
                                    const std::vector<int>& defects,
                                    PauliFrame& correction) const {
  if (defects.empty()) return;
  Syndrome marker;
  marker.bits.assign(layout_.n_stabilizers(), 0);
  for (int s : defects) marker.bits[s] = 1;
  const MatchingGraph graph = build_matching_graph(marker, g.kind);

  const int n_defects = static_cast<int>(defects.size());
  const int boundary = static_cast<int>(g.stabs.size());
  auto* flips = g.kind == StabilizerKind::kZType ? &correction.x_flips
                                                 : &correction.z_flips;
  auto toggle_path = [&](int from_node, int to_node) {
    for (int q : canonical_path(g, from_node, to_node)) (*flips)[q] ^= 1;
  };

  const std::vector<int> mate = min_weight_perfect_matching(graph.weights);
  for (int i = 0; i < n_defects; ++i) {
    const int j = mate[i];
    if (j < i) continue;  // each pair once; j == i is impossible
    const int li = g.local_of_global[defects[i]];
    if (j >= n_defects) {
      toggle_path(li, boundary);  // matched against the virtual boundary node
      continue;
    }
    const int lj = g.local_of_global[defects[j]];
    if (g.dist[li][lj] <= graph.boundary_dist[i] + graph.boundary_dist[j]) {
      toggle_path(li, lj);
    } else {
      toggle_path(li, boundary);
      toggle_path(lj, boundary);
    }
  }
}

PauliFrame MatchingReferee::decode(const Syndrome& syndrome) const {
  if (static_cast<int>(syndrome.bits.size()) != layout_.n_stabilizers()) {
    throw std::invalid_argument("syndrome size does not match layout");
  }
  PauliFrame correction(layout_.n_qubits());
  std::vector<int> x_defects;  // violated Z plaquettes, fixed by X flips
  std::vector<int> z_defects;  // violated X plaquettes, fixed by Z flips
  for (int s = 0; s < layout_.n_stabilizers(); ++s) {
    if (!syndrome.bits[s]) continue;
    (layout_.stabilizers()[s].kind == StabilizerKind::kZType ? x_defects
                                                             : z_defects)
        .push_back(s);
  }
  decode_sector(z_sector_, x_defects, correction);
  decode_sector(x_sector_, z_defects, correction);
  return correction;
}

bool MatchingReferee::verdict(const PauliFrame& frame) const {
  PauliFrame combined = frame;
  combined.xor_with(decode(perfect_syndrome(layout_, frame)));
  return is_trivial(layout_, combined);
}

PauliFrame referee_decode(const CodeLayout& layout, const Syndrome& syndrome) {
  return MatchingReferee(layout).decode(syndrome);
}

bool referee_verdict(const CodeLayout& layout, const PauliFrame& frame) {
  return MatchingReferee(layout).verdict(frame);
}

SweepResult sweep_low_weight_errors(const CodeLayout& layout, const Referee& referee,
                                    int max_weight) {
  SweepResult result;
  const int n = layout.n_qubits();
  std::vector<int> qubits;
  std::vector<int> paulis;  // 0 = X, 1 = Y, 2 = Z per chosen qubit

  auto check_assignment = [&]() {
    PauliFrame frame(n);
    for (size_t k = 0; k < qubits.size(); ++k) {
      if (paulis[k] != 2) frame.x_flips[qubits[k]] = 1;
      if (paulis[k] != 0) frame.z_flips[qubits[k]] = 1;
    }
    ++result.checked;
    if (!referee.verdict(frame)) ++result.failures;
  };

  auto enumerate_paulis = [&](auto&& self, size_t k) -> void {
    if (k == qubits.size()) {
      check_assignment();
      return;
    }
    for (int p = 0; p < 3; ++p) {
      paulis[k] = p;
      self(self, k + 1);
    }
  };

  auto enumerate_qubits = [&](auto&& self, int first, int remaining) -> void {
    if (remaining == 0) {
      paulis.assign(qubits.size(), 0);
      enumerate_paulis(enumerate_paulis, 0);
      return;
    }
    for (int q = first; q <= n - remaining; ++q) {
      qubits.push_back(q);
      self(self, q + 1, remaining - 1);
      qubits.pop_back();
    }
  };

  for (int w = 1; w <= max_weight; ++w) {
    enumerate_qubits(enumerate_qubits, 0, w);
  }
  return result;
}

}  // namespace qrl
