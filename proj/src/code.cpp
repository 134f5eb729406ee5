#include "qrl/code.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace qrl {

bool PauliFrame::empty() const {
  for (auto b : x_flips) {
    if (b) return false;
  }
  for (auto b : z_flips) {
    if (b) return false;
  }
  return true;
}

void PauliFrame::xor_with(const PauliFrame& other) {
  if (other.n_qubits() != n_qubits()) {
    throw std::invalid_argument("PauliFrame::xor_with: size mismatch");
  }
  for (size_t i = 0; i < x_flips.size(); ++i) {
    x_flips[i] ^= other.x_flips[i];
    z_flips[i] ^= other.z_flips[i];
  }
}

bool Syndrome::any() const {
  for (auto b : bits) {
    if (b) return true;
  }
  return false;
}

CodeLayout CodeLayout::build(int distance) {
  if (distance < 3 || distance % 2 == 0) {
    throw std::invalid_argument("code distance must be an odd integer >= 3, got " +
                                std::to_string(distance));
  }
  CodeLayout layout;
  const int d = distance;
  layout.d_ = d;

  auto qubit = [d](int r, int c) { return r * d + c; };
  // Plaquette type from its embedding cell (R, C), both even: the checkerboard
  // color is the parity of (R + C) / 2.
  auto x_type_at = [](int grid_r, int grid_c) {
    return ((grid_r + grid_c) / 2) % 2 == 0;
  };

  auto add = [&](StabilizerKind kind, std::vector<int> support, int grid_r, int grid_c) {
    std::sort(support.begin(), support.end());
    layout.stabilizers_.push_back({kind, std::move(support), grid_r, grid_c});
  };

  // Bulk weight-4 plaquettes.
  for (int r = 0; r + 1 < d; ++r) {
    for (int c = 0; c + 1 < d; ++c) {
      const int gr = 2 * r + 2, gc = 2 * c + 2;
      add(x_type_at(gr, gc) ? StabilizerKind::kXType : StabilizerKind::kZType,
          {qubit(r, c), qubit(r, c + 1), qubit(r + 1, c), qubit(r + 1, c + 1)}, gr, gc);
    }
  }
  // Boundary weight-2 plaquettes: keep only the cells whose checkerboard color
  // matches the edge type (X on top/bottom, Z on left/right).
  for (int c = 0; c + 1 < d; ++c) {
    if (x_type_at(0, 2 * c + 2)) {
      add(StabilizerKind::kXType, {qubit(0, c), qubit(0, c + 1)}, 0, 2 * c + 2);
    }
    if (x_type_at(2 * d, 2 * c + 2)) {
      add(StabilizerKind::kXType, {qubit(d - 1, c), qubit(d - 1, c + 1)}, 2 * d, 2 * c + 2);
    }
  }
  for (int r = 0; r + 1 < d; ++r) {
    if (!x_type_at(2 * r + 2, 0)) {
      add(StabilizerKind::kZType, {qubit(r, 0), qubit(r + 1, 0)}, 2 * r + 2, 0);
    }
    if (!x_type_at(2 * r + 2, 2 * d)) {
      add(StabilizerKind::kZType, {qubit(r, d - 1), qubit(r + 1, d - 1)}, 2 * r + 2, 2 * d);
    }
  }

  // Logical X: column-0 X string (top-bottom). Logical Z: row-0 Z string.
  for (int r = 0; r < d; ++r) layout.logical_x_.push_back(qubit(r, 0));
  for (int c = 0; c < d; ++c) layout.logical_z_.push_back(qubit(0, c));

  const int n = d * d;
  layout.x_on_qubit_.assign(n, {});
  layout.z_on_qubit_.assign(n, {});
  layout.neighborhood_.assign(n, {});
  for (int s = 0; s < layout.n_stabilizers(); ++s) {
    const auto& rec = layout.stabilizers_[s];
    auto& table = rec.kind == StabilizerKind::kXType ? layout.x_on_qubit_ : layout.z_on_qubit_;
    for (int q : rec.support) table[q].push_back(s);
    for (int q : rec.support) {
      for (int p : rec.support) layout.neighborhood_[q].push_back(p);
    }
  }
  for (int q = 0; q < n; ++q) {
    auto& nb = layout.neighborhood_[q];
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    // A qubit outside every stabilizer of some sector would admit an
    // undetectable single-qubit error; the construction above never
    // produces one.
    if (layout.x_on_qubit_[q].empty() || layout.z_on_qubit_[q].empty() ||
        layout.x_on_qubit_[q].size() > 2 || layout.z_on_qubit_[q].size() > 2) {
      throw std::logic_error("CodeLayout: qubit " + std::to_string(q) +
                             " has an invalid stabilizer incidence");
    }
  }
  return layout;
}

std::string CodeLayout::to_json() const {
  std::ostringstream out;
  out << "{\"distance\":" << d_ << ",\"qubits\":[";
  for (int q = 0; q < n_qubits(); ++q) {
    out << (q ? "," : "") << "[" << qubit_row(q) << "," << qubit_col(q) << "]";
  }
  out << "],\"stabilizers\":[";
  for (int s = 0; s < n_stabilizers(); ++s) {
    const auto& rec = stabilizers_[s];
    out << (s ? "," : "") << "{\"kind\":\""
        << (rec.kind == StabilizerKind::kXType ? "X" : "Z") << "\",\"support\":[";
    for (size_t i = 0; i < rec.support.size(); ++i) {
      out << (i ? "," : "") << rec.support[i];
    }
    out << "],\"plaquette\":[" << rec.plaquette_row << "," << rec.plaquette_col << "]}";
  }
  out << "],\"logical_x\":[";
  for (size_t i = 0; i < logical_x_.size(); ++i) out << (i ? "," : "") << logical_x_[i];
  out << "],\"logical_z\":[";
  for (size_t i = 0; i < logical_z_.size(); ++i) out << (i ? "," : "") << logical_z_[i];
  out << "]}";
  return out.str();
}

PauliFrame apply_flip(const PauliFrame& frame, PauliAxis axis, int qubit) {
  if (qubit < 0 || qubit >= frame.n_qubits()) {
    throw std::out_of_range("apply_flip: qubit " + std::to_string(qubit) +
                            " out of range for " + std::to_string(frame.n_qubits()) +
                            " qubits");
  }
  PauliFrame out = frame;
  auto& bits = axis == PauliAxis::kX ? out.x_flips : out.z_flips;
  bits[qubit] ^= 1;
  return out;
}

Syndrome perfect_syndrome(const CodeLayout& layout, const PauliFrame& frame) {
  if (frame.n_qubits() != layout.n_qubits()) {
    throw std::invalid_argument("perfect_syndrome: frame size mismatch");
  }
  Syndrome syn;
  syn.bits.resize(layout.n_stabilizers());
  for (int s = 0; s < layout.n_stabilizers(); ++s) {
    const auto& rec = layout.stabilizers()[s];
    const auto& flips =
        rec.kind == StabilizerKind::kZType ? frame.x_flips : frame.z_flips;
    std::uint8_t parity = 0;
    for (int q : rec.support) parity ^= flips[q];
    syn.bits[s] = parity;
  }
  return syn;
}

namespace {

std::uint8_t overlap_parity(const std::vector<std::uint8_t>& flips,
                            const std::vector<int>& support) {
  std::uint8_t parity = 0;
  for (int q : support) parity ^= flips[q];
  return parity;
}

}  // namespace

HomologyClass homology_class(const CodeLayout& layout, const PauliFrame& frame) {
  if (perfect_syndrome(layout, frame).any()) {
    throw std::invalid_argument("homology_class: frame is not in the code space");
  }
  HomologyClass cls;
  cls.x_class = overlap_parity(frame.x_flips, layout.logical_z_support());
  cls.z_class = overlap_parity(frame.z_flips, layout.logical_x_support());
  return cls;
}

bool is_trivial(const CodeLayout& layout, const PauliFrame& frame) {
  if (perfect_syndrome(layout, frame).any()) return false;
  return homology_class(layout, frame) == HomologyClass{};
}

}  // namespace qrl
