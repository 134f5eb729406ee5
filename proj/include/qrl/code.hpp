#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qrl {

enum class PauliAxis : std::uint8_t { kX, kZ };

enum class StabilizerKind : std::uint8_t { kXType, kZType };

// One plaquette operator: X⊗..⊗X or Z⊗..⊗Z over `support`.
struct StabilizerRecord {
  StabilizerKind kind;
  std::vector<int> support;      // sorted qubit indices, size 2 or 4
  int plaquette_row = 0;         // even coordinates in the (2d+1)x(2d+1) grid
  int plaquette_col = 0;
};

// Accumulated single-qubit X/Z flips (errors and corrections alike) relative
// to the initial logical state. Phases are dropped; composition is XOR.
struct PauliFrame {
  std::vector<std::uint8_t> x_flips;
  std::vector<std::uint8_t> z_flips;

  explicit PauliFrame(int n_qubits = 0)
      : x_flips(n_qubits, 0), z_flips(n_qubits, 0) {}

  int n_qubits() const { return static_cast<int>(x_flips.size()); }
  bool empty() const;
  void xor_with(const PauliFrame& other);
  bool operator==(const PauliFrame& other) const = default;
};

// Bit-vector over stabilizers, 1 = violated, aligned with CodeLayout order.
struct Syndrome {
  std::vector<std::uint8_t> bits;

  bool any() const;
  bool operator==(const Syndrome& other) const = default;
};

// Rotated d x d surface code: d^2 data qubits on vertices, d^2-1 plaquette
// stabilizers, one logical qubit.
//
// Convention (fixed so encodings and golden tests are deterministic):
//   - qubit (r, c) has index r*d + c and embeds at grid cell (2r+1, 2c+1)
//   - bulk plaquette over rows {r,r+1} x cols {c,c+1} is X-type iff r+c even
//   - weight-2 boundary plaquettes continue the checkerboard: X-type on the
//     top/bottom edges, Z-type on the left/right edges
//   - logical X is the column-0 X string, logical Z the row-0 Z string
class CodeLayout {
 public:
  static CodeLayout build(int distance);

  int distance() const { return d_; }
  int n_qubits() const { return d_ * d_; }
  int n_stabilizers() const { return static_cast<int>(stabilizers_.size()); }
  int grid_size() const { return 2 * d_ + 1; }

  const std::vector<StabilizerRecord>& stabilizers() const {
    return stabilizers_;
  }
  const std::vector<int>& logical_x_support() const { return logical_x_; }
  const std::vector<int>& logical_z_support() const { return logical_z_; }

  int qubit_row(int q) const { return q / d_; }
  int qubit_col(int q) const { return q % d_; }

  // Stabilizer indices (of the given kind) whose support contains q. Every
  // qubit sits in one or two stabilizers of each kind.
  const std::vector<int>& stabilizers_on_qubit(int q, StabilizerKind kind) const {
    return kind == StabilizerKind::kXType ? x_on_qubit_[q] : z_on_qubit_[q];
  }

  // Qubits sharing at least one plaquette with q, q itself included.
  const std::vector<int>& plaquette_neighborhood(int q) const {
    return neighborhood_[q];
  }

  // Deterministic JSON document with qubit coordinates, stabilizer supports
  // and logical supports, for golden tests and external tooling.
  std::string to_json() const;

 private:
  CodeLayout() = default;

  int d_ = 0;
  std::vector<StabilizerRecord> stabilizers_;
  std::vector<int> logical_x_;
  std::vector<int> logical_z_;
  std::vector<std::vector<int>> x_on_qubit_;
  std::vector<std::vector<int>> z_on_qubit_;
  std::vector<std::vector<int>> neighborhood_;
};

PauliFrame apply_flip(const PauliFrame& frame, PauliAxis axis, int qubit);

// Noiseless measurement of every stabilizer: Z-type plaquettes detect X
// flips, X-type plaquettes detect Z flips.
Syndrome perfect_syndrome(const CodeLayout& layout, const PauliFrame& frame);

struct HomologyClass {
  std::uint8_t x_class = 0;  // 1 iff the frame acts as logical X (up to stabilizers)
  std::uint8_t z_class = 0;
  bool operator==(const HomologyClass&) const = default;
};

// Requires a zero-syndrome frame; throws std::invalid_argument otherwise.
HomologyClass homology_class(const CodeLayout& layout, const PauliFrame& frame);

// True iff the frame has zero syndrome and trivial homology class, i.e. the
// encoded state is exactly restored. This is the reward predicate.
bool is_trivial(const CodeLayout& layout, const PauliFrame& frame);

}  // namespace qrl
