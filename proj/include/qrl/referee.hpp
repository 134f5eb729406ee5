#pragma once

#include <cstdint>
#include <vector>

#include "qrl/code.hpp"
#include "qrl/matching.hpp"

namespace qrl {

// Terminal-state oracle: a single-shot decoder for perfect syndromes. The
// environment only asks two things of it — suggest a correction that returns
// the state to the code space, and say whether the combined frame is still
// logically trivial.
class Referee {
 public:
  virtual ~Referee() = default;
  virtual PauliFrame decode(const Syndrome& syndrome) const = 0;
  // True iff frame ⊕ decode(syndrome(frame)) restores the encoded state.
  virtual bool verdict(const PauliFrame& frame) const = 0;
};

// Reduced defect graph for one Pauli sector, exposed for inspection: node i
// is the i-th violated plaquette of that sector (ascending stabilizer index),
// plus one trailing virtual boundary node when the defect count is odd.
// weights[i][j] = min(lattice distance i..j, boundary(i) + boundary(j)), so a
// pairing through the boundary is already folded into every edge.
struct MatchingGraph {
  StabilizerKind sector;
  std::vector<int> defects;                 // global stabilizer indices
  std::vector<std::int64_t> boundary_dist;  // per defect
  WeightMatrix weights;
  bool has_boundary_node = false;
};

// Exact referee: independent minimum-weight perfect matching in the X-error
// sector (violated Z plaquettes) and the Z-error sector (violated X
// plaquettes). Ties between equal-weight paths are broken by walking
// lowest-qubit-index-first, so corrections are canonical and reproducible.
class MatchingReferee final : public Referee {
 public:
  explicit MatchingReferee(const CodeLayout& layout);

  PauliFrame decode(const Syndrome& syndrome) const override;
  bool verdict(const PauliFrame& frame) const override;

  MatchingGraph build_matching_graph(const Syndrome& syndrome,
                                     StabilizerKind sector) const;

  const CodeLayout& layout() const { return layout_; }

 private:
  // One sector's connectivity: nodes are same-kind plaquettes, node `n_stabs`
  // is the shared boundary, and each data qubit contributes exactly one edge.
  struct SectorGraph {
    StabilizerKind kind;
    std::vector<int> stabs;           // global stabilizer ids, ascending
    std::vector<int> local_of_global; // -1 for stabilizers of the other kind
    std::vector<std::vector<std::pair<int, int>>> adj;  // (node, qubit), qubit-sorted
    std::vector<std::vector<int>> dist;                 // BFS, incl. boundary node
  };

  const SectorGraph& sector(StabilizerKind kind) const {
    return kind == StabilizerKind::kXType ? x_sector_ : z_sector_;
  }
  static SectorGraph build_sector(const CodeLayout& layout, StabilizerKind kind);
  // Qubits along the canonical shortest path between two sector nodes.
  std::vector<int> canonical_path(const SectorGraph& g, int from, int to) const;
  void decode_sector(const SectorGraph& g, const std::vector<int>& defects,
                     PauliFrame& correction) const;

  CodeLayout layout_;
  SectorGraph x_sector_;
  SectorGraph z_sector_;
};

// Convenience wrappers matching the operation-level interface. They build a
// MatchingReferee per call; hot paths should hold one instead.
PauliFrame referee_decode(const CodeLayout& layout, const Syndrome& syndrome);
bool referee_verdict(const CodeLayout& layout, const PauliFrame& frame);

// Exhaustively checks verdict = true for every error of weight <= max_weight
// (each chosen qubit independently X, Y or Z). The distance guarantee says
// this must hold for max_weight <= (d-1)/2.
struct SweepResult {
  std::uint64_t checked = 0;
  std::uint64_t failures = 0;
};
SweepResult sweep_low_weight_errors(const CodeLayout& layout, const Referee& referee,
                                    int max_weight);

}  // namespace qrl
