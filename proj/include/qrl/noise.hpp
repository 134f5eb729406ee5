#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qrl/code.hpp"
#include "qrl/rng.hpp"

namespace qrl {

enum class NoiseModel : std::uint8_t { kBitFlip, kDepolarizing };

// "bitflip" / "depolarizing"; the names used in configs and checkpoints.
std::string noise_model_name(NoiseModel model);
NoiseModel noise_model_from_name(const std::string& name);

struct NoiseConfig {
  NoiseModel model = NoiseModel::kBitFlip;
  double p_phys = 0.0;   // per-qubit physical error probability, per round
  double p_meas = 0.0;   // per-stabilizer measurement flip probability, per round
  int volume_depth = 5;  // syndromes per volume

  void validate() const;
};

// Ordered stack of `volume_depth` faulty syndromes, oldest first.
struct SyndromeVolume {
  std::vector<Syndrome> slices;

  bool any() const {
    for (const auto& s : slices) {
      if (s.any()) return true;
    }
    return false;
  }
  bool operator==(const SyndromeVolume&) const = default;
};

// One application of the physical error channel. Bit-flip: each qubit gets X
// with probability p_phys. Depolarizing: each qubit gets X, Y or Z (equal
// probability) with probability p_phys; Y sets both sectors.
PauliFrame apply_physical_channel(const PauliFrame& frame, const NoiseConfig& config,
                                  Rng& rng);

// Measurement error process: each syndrome bit flips independently with
// probability p_meas. Draws one variate per bit regardless of p_meas so the
// rng stream position does not depend on parameter values.
Syndrome corrupt_syndrome(const Syndrome& syndrome, double p_meas, Rng& rng);

// The two-stage round, repeated volume_depth times: physical channel on the
// frame, then a corrupted readout of the resulting perfect syndrome.
// Measurement errors never touch the frame.
std::pair<PauliFrame, SyndromeVolume> generate_volume(const CodeLayout& layout,
                                                      const PauliFrame& frame,
                                                      const NoiseConfig& config,
                                                      Rng& rng);

}  // namespace qrl
