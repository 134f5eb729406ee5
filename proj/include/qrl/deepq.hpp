#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qrl/code.hpp"
#include "qrl/env.hpp"
#include "qrl/nn.hpp"
#include "qrl/noise.hpp"
#include "qrl/rng.hpp"

namespace qrl {

// Binary observation tensor handed to the q-network: `volume_depth` syndrome
// slices (oldest -> newest) followed by the X- and Z-history slices, each
// embedded into the (2d+1) x (2d+1) grid. Channel-first layout.
struct EncodedState {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> bits;  // [channel][row][col], entries 0/1

  std::uint8_t at(int c, int r, int col) const {
    return bits[(static_cast<std::size_t>(c) * height + r) * width + col];
  }

  bool operator==(const EncodedState&) const = default;
};

// Grid cell carrying a stabilizer's constant type-indicator bit. Each
// plaquette marks one adjacent edge cell: X-type the cell above (below for
// the top row), Z-type the cell to the left (right for the leftmost column).
// Marks never collide: same-kind neighbours alternate colour, and the two
// kinds use different cell parities.
std::pair<int, int> type_indicator_cell(const StabilizerRecord& stab);

// Grid embedding per the layout: violated plaquettes at their plaquette
// coordinates per slice, type indicators constant across slices, history
// flips at vertex (2r+1, 2c+1) of the X/Z history channel.
EncodedState encode_state(const CodeLayout& layout, const EnvState& state);

// Channel-first binary tensor -> channel-last scalars for the network.
template <typename T>
std::vector<T> to_network_input(const EncodedState& s) {
  std::vector<T> out(s.bits.size());
  const std::size_t plane = static_cast<std::size_t>(s.height) * s.width;
  for (int c = 0; c < s.channels; ++c) {
    for (std::size_t yx = 0; yx < plane; ++yx) {
      out[yx * s.channels + c] = static_cast<T>(s.bits[c * plane + yx]);
    }
  }
  return out;
}

// One environment transition as stored for replay.
struct Experience {
  EncodedState s;
  int action = 0;
  float reward = 0.0f;
  EncodedState s_next;
  bool terminal = false;

  bool operator==(const Experience&) const = default;
};

// Fixed-capacity ring buffer with uniform with-replacement sampling.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  void push(Experience e);  // evicts the oldest entry at capacity
  std::size_t size() const { return buffer_.size(); }
  std::size_t capacity() const { return capacity_; }

  // i = 0 is the oldest surviving entry.
  const Experience& at(std::size_t i) const;

  // Uniform with replacement. Pointers stay valid until the next push.
  std::vector<const Experience*> sample(std::size_t batch_size, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // slot the next push overwrites once full
  std::vector<Experience> buffer_;
};

using Batch = std::vector<const Experience*>;

// Online/target pair sharing one spec; the target only moves on sync.
struct QNetwork {
  nn::NetworkSpec spec;
  nn::Network<float> online;
  nn::Network<float> target;

  QNetwork(const nn::NetworkSpec& s, Rng& rng)
      : spec(s), online(s, rng), target(online) {}
};

template <typename T>
void sync_target(const nn::Network<T>& online, nn::Network<T>& target) {
  target.copy_weights_from(online);
}

// epsilon-greedy: with probability epsilon a uniform draw over mask-allowed
// actions, otherwise the unmasked argmax (ties -> lowest index). The mask
// constrains exploration only.
int select_action(const nn::Network<float>& net, const EncodedState& s,
                  double epsilon, const std::vector<std::uint8_t>& mask,
                  Rng& rng);

// Linear anneal from `initial` at step 0 to `final_value` at
// `exploration_steps`, constant afterwards.
double annealed_epsilon(double initial, double final_value,
                        std::int64_t exploration_steps, std::int64_t step);

// doubleQ targets: y = r + gamma * target(s')[argmax_a online(s')[a]] for
// non-terminal transitions, y = r for terminal ones.
template <typename T>
std::vector<T> bellman_targets(const Batch& batch, const nn::Network<T>& online,
                               const nn::Network<T>& target, double gamma) {
  if (gamma < 0.0 || gamma > 1.0) {
    throw std::invalid_argument("gamma must be in [0, 1]");
  }
  std::vector<T> targets(batch.size());
  typename nn::Network<T>::Cache online_cache, target_cache;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Experience& e = *batch[i];
    T y = static_cast<T>(e.reward);
    if (!e.terminal && gamma > 0.0) {
      const auto input = to_network_input<T>(e.s_next);
      const auto& q_online = online.forward(input, online_cache);
      int best = 0;
      for (std::size_t a = 1; a < q_online.size(); ++a) {
        if (q_online[a] > q_online[best]) best = static_cast<int>(a);
      }
      const auto& q_target = target.forward(input, target_cache);
      y += static_cast<T>(gamma) * q_target[best];
    }
    targets[i] = y;
  }
  return targets;
}

// One optimizer step on the mean squared error between q(s,a) of the taken
// actions and the doubleQ targets. Only `online` changes. Dropout is live,
// driven by `rng`. Throws on a non-finite loss.
template <typename T>
T train_step(nn::Network<T>& online, const nn::Network<T>& target,
             const Batch& batch, double gamma, nn::Adam<T>& optimizer,
             Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("empty training batch");
  const auto targets = bellman_targets(batch, online, target, gamma);
  auto grads = online.make_gradients();
  grads.zero();
  typename nn::Network<T>::Cache cache;
  std::vector<T> dq(online.spec().n_actions, T(0));
  T loss = T(0);
  const T inv_b = T(1) / static_cast<T>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Experience& e = *batch[i];
    if (e.action < 0 || e.action >= online.spec().n_actions) {
      throw std::invalid_argument("experience action out of range");
    }
    const auto input = to_network_input<T>(e.s);
    const auto& q = online.forward(input, cache, /*training=*/true, &rng);
    const T err = q[e.action] - targets[i];
    loss += err * err * inv_b;
    std::fill(dq.begin(), dq.end(), T(0));
    dq[e.action] = T(2) * err * inv_b;
    online.backward(cache, dq, grads);
  }
  if (!std::isfinite(static_cast<double>(loss))) {
    throw std::runtime_error(
        "non-finite training loss (lr " +
        std::to_string(static_cast<double>(optimizer.learning_rate())) +
        ", batch " + std::to_string(batch.size()) + ")");
  }
  optimizer.step(online, grads);
  return loss;
}

// ---------------------------------------------------------------------------
// Checkpoints: one binary file = "QRLAGNT1" magic, u64-LE manifest length,
// JSON manifest, then the named float32-LE weight arrays in manifest order,
// then (optionally) the replay memory records. Documented in the README.

struct CheckpointMeta {
  int distance = 0;
  NoiseModel model = NoiseModel::kBitFlip;
  int volume_depth = 0;
  std::int64_t train_steps = 0;
  double epsilon = 0.0;

  bool operator==(const CheckpointMeta&) const = default;
};

void save_agent(const std::string& path, const CheckpointMeta& meta,
                const nn::Network<float>& online,
                const ReplayMemory* replay = nullptr);

struct LoadedAgent {
  CheckpointMeta meta;
  nn::Network<float> network;
  std::optional<ReplayMemory> replay;
};

LoadedAgent load_agent(const std::string& path);

}  // namespace qrl
