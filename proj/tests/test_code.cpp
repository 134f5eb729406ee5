#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "qrl/code.hpp"
#include "qrl/rng.hpp"

using namespace qrl;

namespace {

// Independent reconstruction of the layout by scanning the embedding grid:
// every even cell with four adjacent vertices is a bulk plaquette; cells with
// two adjacent vertices survive only on edges whose type matches the
// checkerboard color (X on top/bottom, Z on left/right).
struct OracleStab {
  bool x_type;
  std::vector<int> support;

  auto operator<=>(const OracleStab&) const = default;
};

std::vector<OracleStab> oracle_table(int d) {
  std::vector<OracleStab> out;
  const int g = 2 * d + 1;
  for (int R = 0; R < g; R += 2) {
    for (int C = 0; C < g; C += 2) {
      std::vector<int> support;
      for (int dr : {-1, 1}) {
        for (int dc : {-1, 1}) {
          const int r = R + dr, c = C + dc;
          if (r >= 1 && r <= 2 * d - 1 && c >= 1 && c <= 2 * d - 1) {
            support.push_back((r - 1) / 2 * d + (c - 1) / 2);
          }
        }
      }
      const bool x_color = ((R + C) / 2) % 2 == 0;
      if (support.size() == 4) {
        std::sort(support.begin(), support.end());
        out.push_back({x_color, support});
      } else if (support.size() == 2) {
        const bool horizontal_edge = (R == 0 || R == 2 * d);
        if (horizontal_edge && x_color) {
          std::sort(support.begin(), support.end());
          out.push_back({true, support});
        } else if (!horizontal_edge && !x_color) {
          std::sort(support.begin(), support.end());
          out.push_back({false, support});
        }
      }
    }
  }
  return out;
}

PauliFrame random_frame(const CodeLayout& layout, Rng& rng, double density = 0.3) {
  PauliFrame frame(layout.n_qubits());
  for (int q = 0; q < layout.n_qubits(); ++q) {
    frame.x_flips[q] = rng.bernoulli(density);
    frame.z_flips[q] = rng.bernoulli(density);
  }
  return frame;
}

int overlap(const std::vector<int>& a, const std::vector<int>& b) {
  int n = 0;
  for (int q : a) {
    n += std::count(b.begin(), b.end(), q) > 0;
  }
  return n;
}

// 9-bit masks for d=3 single-sector patterns.
std::uint32_t mask_of(const std::vector<int>& qubits) {
  std::uint32_t m = 0;
  for (int q : qubits) m |= 1u << q;
  return m;
}

}  // namespace

TEST_CASE("d=3 golden stabilizer table") {
  const CodeLayout layout = CodeLayout::build(3);
  struct Row {
    StabilizerKind kind;
    std::vector<int> support;
    int pr, pc;
  };
  // Derived by hand from the documented convention.
  const std::vector<Row> golden = {
      {StabilizerKind::kXType, {0, 1, 3, 4}, 2, 2},
      {StabilizerKind::kZType, {1, 2, 4, 5}, 2, 4},
      {StabilizerKind::kZType, {3, 4, 6, 7}, 4, 2},
      {StabilizerKind::kXType, {4, 5, 7, 8}, 4, 4},
      {StabilizerKind::kXType, {6, 7}, 6, 2},
      {StabilizerKind::kXType, {1, 2}, 0, 4},
      {StabilizerKind::kZType, {0, 3}, 2, 0},
      {StabilizerKind::kZType, {5, 8}, 4, 6},
  };
  REQUIRE(layout.n_stabilizers() == 8);
  for (size_t i = 0; i < golden.size(); ++i) {
    CAPTURE(i);
    const auto& rec = layout.stabilizers()[i];
    CHECK(rec.kind == golden[i].kind);
    CHECK(rec.support == golden[i].support);
    CHECK(rec.plaquette_row == golden[i].pr);
    CHECK(rec.plaquette_col == golden[i].pc);
  }
  CHECK(layout.logical_x_support() == std::vector<int>{0, 3, 6});
  CHECK(layout.logical_z_support() == std::vector<int>{0, 1, 2});
}

TEST_CASE("layout invariants across distances") {
  for (int d : {3, 5, 7, 9}) {
    CAPTURE(d);
    const CodeLayout layout = CodeLayout::build(d);
    CHECK(layout.n_qubits() == d * d);
    CHECK(layout.n_stabilizers() == d * d - 1);
    CHECK(layout.grid_size() == 2 * d + 1);

    int n_x = 0, n_z = 0, n_boundary = 0;
    for (const auto& rec : layout.stabilizers()) {
      (rec.kind == StabilizerKind::kXType ? n_x : n_z)++;
      CHECK((rec.support.size() == 2 || rec.support.size() == 4));
      n_boundary += rec.support.size() == 2;
      CHECK(rec.plaquette_row % 2 == 0);
      CHECK(rec.plaquette_col % 2 == 0);
      CHECK(std::is_sorted(rec.support.begin(), rec.support.end()));
    }
    CHECK(n_x == (d * d - 1) / 2);
    CHECK(n_z == (d * d - 1) / 2);
    CHECK(n_boundary == 2 * (d - 1));

    // Symplectic checks: X-type vs Z-type supports overlap evenly; logicals
    // commute with every stabilizer and anticommute with each other.
    const auto& stabs = layout.stabilizers();
    for (size_t i = 0; i < stabs.size(); ++i) {
      for (size_t j = i + 1; j < stabs.size(); ++j) {
        if (stabs[i].kind != stabs[j].kind) {
          CHECK(overlap(stabs[i].support, stabs[j].support) % 2 == 0);
        }
      }
      const auto& other = stabs[i].kind == StabilizerKind::kXType
                              ? layout.logical_z_support()
                              : layout.logical_x_support();
      CHECK(overlap(stabs[i].support, other) % 2 == 0);
    }
    CHECK(static_cast<int>(layout.logical_x_support().size()) == d);
    CHECK(static_cast<int>(layout.logical_z_support().size()) == d);
    CHECK(overlap(layout.logical_x_support(), layout.logical_z_support()) % 2 == 1);
  }
}

TEST_CASE("layout matches the grid-scan reconstruction oracle") {
  for (int d : {3, 5, 7}) {
    CAPTURE(d);
    const CodeLayout layout = CodeLayout::build(d);
    std::set<OracleStab> expected;
    for (auto& s : oracle_table(d)) expected.insert(s);
    std::set<OracleStab> actual;
    for (const auto& rec : layout.stabilizers()) {
      actual.insert({rec.kind == StabilizerKind::kXType, rec.support});
    }
    CHECK(expected == actual);
  }
}

TEST_CASE("build_code rejects invalid distances") {
  CHECK_THROWS_AS(CodeLayout::build(2), std::invalid_argument);
  CHECK_THROWS_AS(CodeLayout::build(4), std::invalid_argument);
  CHECK_THROWS_AS(CodeLayout::build(1), std::invalid_argument);
  CHECK_THROWS_AS(CodeLayout::build(-3), std::invalid_argument);
}

TEST_CASE("apply_flip toggles one bit and is an involution") {
  const CodeLayout layout = CodeLayout::build(3);
  PauliFrame frame(layout.n_qubits());

  PauliFrame once = apply_flip(frame, PauliAxis::kX, 0);
  CHECK(once.x_flips[0] == 1);
  CHECK(std::count(once.x_flips.begin(), once.x_flips.end(), 1) == 1);
  CHECK(once.z_flips == frame.z_flips);

  CHECK(apply_flip(once, PauliAxis::kX, 0) == frame);

  // X then Z on the same qubit is a Y up to phase: both sectors marked.
  PauliFrame y3 = apply_flip(apply_flip(frame, PauliAxis::kX, 3), PauliAxis::kZ, 3);
  CHECK(y3.x_flips[3] == 1);
  CHECK(y3.z_flips[3] == 1);

  CHECK_THROWS_AS(apply_flip(frame, PauliAxis::kX, 9), std::out_of_range);
  CHECK_THROWS_AS(apply_flip(frame, PauliAxis::kZ, -1), std::out_of_range);
}

TEST_CASE("perfect syndrome of single flips hits exactly the adjacent plaquettes") {
  for (int d : {3, 5}) {
    CAPTURE(d);
    const CodeLayout layout = CodeLayout::build(d);
    const PauliFrame clean(layout.n_qubits());
    CHECK_FALSE(perfect_syndrome(layout, clean).any());

    for (int q = 0; q < layout.n_qubits(); ++q) {
      const Syndrome sx = perfect_syndrome(layout, apply_flip(clean, PauliAxis::kX, q));
      const Syndrome sz = perfect_syndrome(layout, apply_flip(clean, PauliAxis::kZ, q));
      for (int s = 0; s < layout.n_stabilizers(); ++s) {
        const auto& rec = layout.stabilizers()[s];
        const bool in_support =
            std::count(rec.support.begin(), rec.support.end(), q) > 0;
        // X flips violate adjacent Z plaquettes only, and vice versa.
        CHECK(sx.bits[s] ==
              (rec.kind == StabilizerKind::kZType && in_support ? 1 : 0));
        CHECK(sz.bits[s] ==
              (rec.kind == StabilizerKind::kXType && in_support ? 1 : 0));
      }
    }
  }
}

TEST_CASE("horizontal X string syndrome sits at the string endpoints") {
  const CodeLayout layout = CodeLayout::build(3);
  // Full middle row: x flips on qubits 3,4,5.
  PauliFrame frame(layout.n_qubits());
  frame.x_flips[3] = frame.x_flips[4] = frame.x_flips[5] = 1;
  const Syndrome syn = perfect_syndrome(layout, frame);
  for (int s = 0; s < layout.n_stabilizers(); ++s) {
    const auto& rec = layout.stabilizers()[s];
    if (syn.bits[s]) {
      // Every violated plaquette touches an endpoint qubit (3 or 5).
      const bool touches_endpoint =
          std::count(rec.support.begin(), rec.support.end(), 3) +
              std::count(rec.support.begin(), rec.support.end(), 5) >
          0;
      CHECK(rec.kind == StabilizerKind::kZType);
      CHECK(touches_endpoint);
    }
  }
  // The interior of the string is invisible: XOR-ing in a bulk X-stabilizer
  // support deforms the path without changing the syndrome.
  PauliFrame deformed = frame;
  for (int q : layout.stabilizers()[0].support) deformed.x_flips[q] ^= 1;
  CHECK(perfect_syndrome(layout, deformed) == syn);
}

TEST_CASE("syndrome agrees with the explicit parity-check oracle and is linear") {
  for (int d : {3, 5}) {
    CAPTURE(d);
    const CodeLayout layout = CodeLayout::build(d);
    const auto oracle = oracle_table(d);
    // Match oracle rows to layout rows by (kind, support).
    std::map<std::pair<bool, std::vector<int>>, int> layout_index;
    for (int s = 0; s < layout.n_stabilizers(); ++s) {
      const auto& rec = layout.stabilizers()[s];
      layout_index[{rec.kind == StabilizerKind::kXType, rec.support}] = s;
    }
    REQUIRE(static_cast<int>(oracle.size()) == layout.n_stabilizers());

    Rng rng(2026);
    for (int trial = 0; trial < 1000; ++trial) {
      const PauliFrame a = random_frame(layout, rng);
      const PauliFrame b = random_frame(layout, rng);
      const Syndrome sa = perfect_syndrome(layout, a);

      // Independent parity-check product over the reconstructed table.
      for (const auto& stab : oracle) {
        std::uint8_t parity = 0;
        for (int q : stab.support) {
          parity ^= stab.x_type ? a.z_flips[q] : a.x_flips[q];
        }
        CHECK(sa.bits[layout_index.at({stab.x_type, stab.support})] == parity);
      }

      // Linearity: syndrome of the XOR is the XOR of syndromes.
      PauliFrame both = a;
      both.xor_with(b);
      const Syndrome sb = perfect_syndrome(layout, b);
      const Syndrome sab = perfect_syndrome(layout, both);
      for (int s = 0; s < layout.n_stabilizers(); ++s) {
        CHECK(sab.bits[s] == (sa.bits[s] ^ sb.bits[s]));
      }
    }
  }
}

TEST_CASE("homology class via exhaustive d=3 subgroup enumeration") {
  const CodeLayout layout = CodeLayout::build(3);

  // Span of the four X-type stabilizer supports, as x-flip bit masks.
  std::vector<std::uint32_t> x_gen, z_gen;
  for (const auto& rec : layout.stabilizers()) {
    (rec.kind == StabilizerKind::kXType ? x_gen : z_gen).push_back(mask_of(rec.support));
  }
  REQUIRE(x_gen.size() == 4);
  REQUIRE(z_gen.size() == 4);
  auto span_of = [](const std::vector<std::uint32_t>& gen) {
    std::set<std::uint32_t> span;
    for (std::uint32_t pick = 0; pick < (1u << gen.size()); ++pick) {
      std::uint32_t m = 0;
      for (size_t i = 0; i < gen.size(); ++i) {
        if (pick >> i & 1) m ^= gen[i];
      }
      span.insert(m);
    }
    return span;
  };
  const std::set<std::uint32_t> x_span = span_of(x_gen);
  const std::uint32_t logical_x_mask = mask_of(layout.logical_x_support());

  int in_code_space = 0;
  for (std::uint32_t m = 0; m < (1u << 9); ++m) {
    PauliFrame frame(9);
    for (int q = 0; q < 9; ++q) frame.x_flips[q] = m >> q & 1;
    if (perfect_syndrome(layout, frame).any()) {
      CHECK_THROWS_AS(homology_class(layout, frame), std::invalid_argument);
      continue;
    }
    ++in_code_space;
    const HomologyClass cls = homology_class(layout, frame);
    CHECK(cls.z_class == 0);
    const bool is_stabilizer = x_span.count(m) > 0;
    const bool is_logical = x_span.count(m ^ logical_x_mask) > 0;
    CHECK(is_stabilizer != is_logical);  // the two cosets partition the kernel
    CHECK(cls.x_class == (is_stabilizer ? 0 : 1));
    CHECK(is_trivial(layout, frame) == is_stabilizer);
  }
  // 9 bits modulo 4 independent Z-type checks: 2^5 frames in the code space.
  CHECK(in_code_space == 32);
}

TEST_CASE("stabilizer invariance and logical action") {
  for (int d : {3, 5}) {
    CAPTURE(d);
    const CodeLayout layout = CodeLayout::build(d);
    Rng rng(7 + d);
    for (int trial = 0; trial < 200; ++trial) {
      PauliFrame frame = random_frame(layout, rng);
      const Syndrome before = perfect_syndrome(layout, frame);

      // XOR a random stabilizer into its own sector (an X-type plaquette is a
      // product of X operators): syndrome unchanged.
      const auto& rec = layout.stabilizers()[rng.uniform_int(layout.n_stabilizers())];
      PauliFrame deformed = frame;
      auto& bits = rec.kind == StabilizerKind::kXType ? deformed.x_flips
                                                      : deformed.z_flips;
      for (int q : rec.support) bits[q] ^= 1;
      CHECK(perfect_syndrome(layout, deformed) == before);

      // Flipping a logical string flips exactly one class bit.
      PauliFrame zeroed(layout.n_qubits());
      for (int q : layout.logical_x_support()) zeroed.x_flips[q] = 1;
      const HomologyClass cls = homology_class(layout, zeroed);
      CHECK(cls.x_class == 1);
      CHECK(cls.z_class == 0);
    }
  }
}

TEST_CASE("frames differing by a stabilizer are jointly trivial") {
  const CodeLayout layout = CodeLayout::build(3);
  // Error and correction that differ by the X plaquette {0,1,3,4}: their XOR
  // is a stabilizer, so applying the correction restores the logical state.
  PauliFrame error(9), correction(9);
  error.x_flips[0] = error.x_flips[1] = 1;
  correction.x_flips[3] = correction.x_flips[4] = 1;
  PauliFrame combined = error;
  combined.xor_with(correction);
  CHECK(is_trivial(layout, combined));
  // Whereas correcting along the logically inequivalent path fails.
  PauliFrame bad(9);
  for (int q : layout.logical_x_support()) bad.x_flips[q] = 1;
  bad.xor_with(error);
  PauliFrame combined_bad = error;
  combined_bad.xor_with(bad);
  CHECK_FALSE(is_trivial(layout, combined_bad));
}

TEST_CASE("layout JSON dump is deterministic and well-formed") {
  const CodeLayout a = CodeLayout::build(5);
  const CodeLayout b = CodeLayout::build(5);
  CHECK(a.to_json() == b.to_json());

  const nlohmann::json doc = nlohmann::json::parse(a.to_json());
  CHECK(doc["distance"] == 5);
  CHECK(doc["qubits"].size() == 25);
  CHECK(doc["stabilizers"].size() == 24);
  CHECK(doc["logical_x"].size() == 5);
  CHECK(doc["logical_z"].size() == 5);
  for (const auto& stab : doc["stabilizers"]) {
    CHECK((stab["kind"] == "X" || stab["kind"] == "Z"));
    CHECK((stab["support"].size() == 2 || stab["support"].size() == 4));
  }
}

TEST_CASE("plaquette neighborhoods are symmetric and contain the qubit") {
  for (int d : {3, 5}) {
    CAPTURE(d);
    const CodeLayout layout = CodeLayout::build(d);
    for (int q = 0; q < layout.n_qubits(); ++q) {
      const auto& nb = layout.plaquette_neighborhood(q);
      CHECK(std::count(nb.begin(), nb.end(), q) == 1);
      CHECK(std::is_sorted(nb.begin(), nb.end()));
      for (int p : nb) {
        const auto& back = layout.plaquette_neighborhood(p);
        CHECK(std::count(back.begin(), back.end(), q) == 1);
      }
    }
    // Incidence tables point back at supports containing the qubit.
    for (int q = 0; q < layout.n_qubits(); ++q) {
      for (auto kind : {StabilizerKind::kXType, StabilizerKind::kZType}) {
        const auto& on_q = layout.stabilizers_on_qubit(q, kind);
        CHECK(!on_q.empty());
        CHECK(on_q.size() <= 2);
        for (int s : on_q) {
          const auto& rec = layout.stabilizers()[s];
          CHECK(rec.kind == kind);
          CHECK(std::count(rec.support.begin(), rec.support.end(), q) == 1);
        }
      }
    }
  }
}
