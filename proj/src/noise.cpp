#include "qrl/noise.hpp"

#include <stdexcept>
#include <string>

namespace qrl {

std::string noise_model_name(NoiseModel model) {
  return model == NoiseModel::kBitFlip ? "bitflip" : "depolarizing";
}

NoiseModel noise_model_from_name(const std::string& name) {
  if (name == "bitflip") return NoiseModel::kBitFlip;
  if (name == "depolarizing") return NoiseModel::kDepolarizing;
  throw std::invalid_argument("unknown noise model: " + name);
}

void NoiseConfig::validate() const {
  if (p_phys < 0.0 || p_phys > 1.0) {
    throw std::invalid_argument("p_phys must be in [0,1], got " + std::to_string(p_phys));
  }
  if (p_meas < 0.0 || p_meas > 1.0) {
    throw std::invalid_argument("p_meas must be in [0,1], got " + std::to_string(p_meas));
  }
  if (volume_depth < 1) {
    throw std::invalid_argument("volume_depth must be positive, got " +
                                std::to_string(volume_depth));
  }
}

PauliFrame apply_physical_channel(const PauliFrame& frame, const NoiseConfig& config,
                                  Rng& rng) {
  PauliFrame out = frame;
  const int n = out.n_qubits();
  if (config.model == NoiseModel::kBitFlip) {
    for (int q = 0; q < n; ++q) {
      if (rng.bernoulli(config.p_phys)) out.x_flips[q] ^= 1;
    }
  } else {
    for (int q = 0; q < n; ++q) {
      if (!rng.bernoulli(config.p_phys)) continue;
      switch (rng.uniform_int(3)) {
        case 0:  // X
          out.x_flips[q] ^= 1;
          break;
        case 1:  // Y = X·Z up to phase
          out.x_flips[q] ^= 1;
          out.z_flips[q] ^= 1;
          break;
        default:  // Z
          out.z_flips[q] ^= 1;
          break;
      }
    }
  }
  return out;
}

Syndrome corrupt_syndrome(const Syndrome& syndrome, double p_meas, Rng& rng) {
  if (p_meas < 0.0 || p_meas > 1.0) {
    throw std::invalid_argument("p_meas must be in [0,1], got " + std::to_string(p_meas));
  }
  Syndrome out = syndrome;
  for (auto& bit : out.bits) {
    bit ^= static_cast<std::uint8_t>(rng.bernoulli(p_meas));
  }
  return out;
}

std::pair<PauliFrame, SyndromeVolume> generate_volume(const CodeLayout& layout,
                                                      const PauliFrame& frame,
                                                      const NoiseConfig& config,
                                                      Rng& rng) {
  config.validate();
  PauliFrame current = frame;
  SyndromeVolume volume;
  volume.slices.reserve(config.volume_depth);
  for (int round = 0; round < config.volume_depth; ++round) {
    current = apply_physical_channel(current, config, rng);
    volume.slices.push_back(
        corrupt_syndrome(perfect_syndrome(layout, current), config.p_meas, rng));
  }
  return {std::move(current), std::move(volume)};
}

}  // namespace qrl
