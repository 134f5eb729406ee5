#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "qrl/code.hpp"
#include "qrl/noise.hpp"
#include "qrl/referee.hpp"
#include "qrl/rng.hpp"

namespace qrl {

// One agent action: a single-qubit Pauli flip or a request for a fresh
// syndrome volume.
struct Action {
  enum class Kind : std::uint8_t { kFlip, kRequest };

  Kind kind = Kind::kRequest;
  PauliAxis axis = PauliAxis::kX;  // meaningful for kFlip only
  int qubit = -1;                  // meaningful for kFlip only

  static Action flip(PauliAxis axis, int qubit) {
    return {Kind::kFlip, axis, qubit};
  }
  static Action request() { return {}; }

  bool operator==(const Action&) const = default;
};

// Canonical action ordering shared by the environment, the mask, and the
// q-network output layer: X flips by qubit index, then (depolarizing only)
// Z flips by qubit index, then the request action last.
std::vector<Action> action_space(const CodeLayout& layout, NoiseModel model);

// What the agent sees: the faulty syndrome volume plus the flips taken since
// that volume was issued (insertion order, no duplicates).
struct EnvState {
  SyndromeVolume volume;
  std::vector<Action> history;

  bool operator==(const EnvState&) const = default;
};

struct StepOutcome {
  EnvState state;
  double reward = 0.0;
  bool terminal = false;
  bool truncated = false;  // episode ended by the step cap, not the referee
};

// Exploration mask over action_space(layout, model): a flip is allowed iff
// its qubit supports a stabilizer violated in any slice of the volume, or
// shares a plaquette with a qubit already acted on; request is always
// allowed. Applies to exploratory action selection only.
std::vector<std::uint8_t> exploration_mask(const CodeLayout& layout, NoiseModel model,
                                           const EnvState& state);

// The episodic environment: hidden Pauli frame + noise + referee. Reward and
// terminal signals are recomputed whenever the hidden frame changes (agent
// flips and noise rounds alike); a request returns the signals of the frame
// it left untouched, which is what "carried over from the previous step"
// means once noise is allowed to kill the qubit between requests.
class Environment {
 public:
  Environment(CodeLayout layout, NoiseConfig noise, std::uint64_t seed,
              std::uint64_t step_cap = 1000000,
              std::shared_ptr<const Referee> referee = nullptr);

  EnvState reset();
  StepOutcome step(const Action& action);

  const CodeLayout& layout() const { return layout_; }
  const NoiseConfig& noise() const { return noise_; }
  const EnvState& state() const { return state_; }
  std::vector<std::uint8_t> mask() const {
    return exploration_mask(layout_, noise_.model, state_);
  }

  // Physical-time bookkeeping: every volume generation (including trivial
  // discards and the reset volume) applies volume_depth noise rounds.
  std::uint64_t volumes_generated() const { return volumes_generated_; }
  std::uint64_t syndromes_seen() const {
    return volumes_generated_ * static_cast<std::uint64_t>(noise_.volume_depth);
  }
  std::uint64_t steps_in_episode() const { return steps_in_episode_; }
  bool episode_over() const { return episode_over_; }

  // White-box hooks for tests and oracle stubs; never used by agents.
  const PauliFrame& hidden_frame() const { return hidden_; }
  const Referee& referee() const { return *referee_; }

  // Optional JSON-lines trace (one record per reset/step); not owned.
  void set_trace(std::ostream* sink) { trace_ = sink; }

 private:
  void issue_volume();
  void refresh_signals();
  void check_action(const Action& action) const;
  void trace_step(const Action& action, const StepOutcome& outcome) const;

  CodeLayout layout_;
  NoiseConfig noise_;
  std::shared_ptr<const Referee> referee_;
  Rng rng_;
  std::uint64_t step_cap_;

  PauliFrame hidden_;
  EnvState state_;
  double last_reward_ = 0.0;
  bool last_terminal_ = false;
  bool episode_over_ = true;  // must reset() before stepping
  std::uint64_t volumes_generated_ = 0;
  std::uint64_t steps_in_episode_ = 0;
  std::ostream* trace_ = nullptr;
};

}  // namespace qrl
