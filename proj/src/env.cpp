#include "qrl/env.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace qrl {

std::vector<Action> action_space(const CodeLayout& layout, NoiseModel model) {
  std::vector<Action> actions;
  for (int q = 0; q < layout.n_qubits(); ++q) {
    actions.push_back(Action::flip(PauliAxis::kX, q));
  }
  if (model == NoiseModel::kDepolarizing) {
    for (int q = 0; q < layout.n_qubits(); ++q) {
      actions.push_back(Action::flip(PauliAxis::kZ, q));
    }
  }
  actions.push_back(Action::request());
  return actions;
}

std::vector<std::uint8_t> exploration_mask(const CodeLayout& layout, NoiseModel model,
                                           const EnvState& state) {
  std::vector<std::uint8_t> qubit_ok(layout.n_qubits(), 0);
  for (const auto& slice : state.volume.slices) {
    for (int s = 0; s < layout.n_stabilizers(); ++s) {
      if (!slice.bits[s]) continue;
      for (int q : layout.stabilizers()[s].support) qubit_ok[q] = 1;
    }
  }
  for (const auto& action : state.history) {
    for (int q : layout.plaquette_neighborhood(action.qubit)) qubit_ok[q] = 1;
  }

  const int n = layout.n_qubits();
  const int n_actions = (model == NoiseModel::kDepolarizing ? 2 * n : n) + 1;
  std::vector<std::uint8_t> mask(n_actions, 0);
  for (int q = 0; q < n; ++q) {
    mask[q] = qubit_ok[q];
    if (model == NoiseModel::kDepolarizing) mask[n + q] = qubit_ok[q];
  }
  mask[n_actions - 1] = 1;  // request is always available
  return mask;
}

Environment::Environment(CodeLayout layout, NoiseConfig noise, std::uint64_t seed,
                         std::uint64_t step_cap, std::shared_ptr<const Referee> referee)
    : layout_(std::move(layout)),
      noise_(noise),
      referee_(std::move(referee)),
      rng_(seed),
      step_cap_(step_cap) {
  noise_.validate();
  if (noise_.p_phys == 0.0 && noise_.p_meas == 0.0) {
    throw std::invalid_argument(
        "environment requires p_phys > 0 or p_meas > 0: every volume would be "
        "trivial and the discard loop could not terminate");
  }
  if (step_cap_ == 0) {
    throw std::invalid_argument("step cap must be positive");
  }
  if (!referee_) {
    referee_ = std::make_shared<MatchingReferee>(layout_);
  }
  hidden_ = PauliFrame(layout_.n_qubits());
}

void Environment::refresh_signals() {
  last_reward_ = is_trivial(layout_, hidden_) ? 1.0 : 0.0;
  last_terminal_ = !referee_->verdict(hidden_);
}

void Environment::issue_volume() {
  // Trivial volumes carry no decoding information and are discarded, but the
  // noise they applied stays in the hidden frame: physical time passes.
  for (;;) {
    auto [frame, volume] = generate_volume(layout_, hidden_, noise_, rng_);
    hidden_ = std::move(frame);
    ++volumes_generated_;
    if (volume.any()) {
      state_.volume = std::move(volume);
      break;
    }
  }
  state_.history.clear();
  refresh_signals();
}

EnvState Environment::reset() {
  hidden_ = PauliFrame(layout_.n_qubits());
  episode_over_ = false;
  steps_in_episode_ = 0;
  issue_volume();
  if (trace_) {
    *trace_ << "{\"event\":\"reset\",\"volumes_generated\":" << volumes_generated_
            << "}\n";
  }
  return state_;
}

void Environment::check_action(const Action& action) const {
  if (action.kind == Action::Kind::kRequest) return;
  if (action.qubit < 0 || action.qubit >= layout_.n_qubits()) {
    throw std::invalid_argument("flip action qubit out of range");
  }
  if (action.axis == PauliAxis::kZ && noise_.model == NoiseModel::kBitFlip) {
    throw std::invalid_argument("Z flips are not in the bit-flip action space");
  }
}

StepOutcome Environment::step(const Action& action) {
  if (episode_over_) {
    throw std::logic_error("step() called on a finished episode; reset() first");
  }
  check_action(action);
  ++steps_in_episode_;

  const bool is_flip = action.kind == Action::Kind::kFlip;
  const bool fresh =
      is_flip && std::find(state_.history.begin(), state_.history.end(), action) ==
                     state_.history.end();

  StepOutcome outcome;
  if (fresh) {
    // Fig. 5(b,c): apply the flip, extend the history, keep the volume.
    hidden_ = apply_flip(hidden_, action.axis, action.qubit);
    state_.history.push_back(action);
    refresh_signals();
    outcome.reward = last_reward_;
    outcome.terminal = last_terminal_;
  } else {
    // Fig. 5(d,e): a repeat still hits the hidden frame and is judged like a
    // fresh flip; a request changes nothing and returns the standing
    // signals. Either way a new volume follows unless the episode ended.
    if (is_flip) {
      hidden_ = apply_flip(hidden_, action.axis, action.qubit);
      refresh_signals();
    }
    outcome.reward = last_reward_;
    outcome.terminal = last_terminal_;
    if (!outcome.terminal) issue_volume();
  }

  if (!outcome.terminal && steps_in_episode_ >= step_cap_) {
    outcome.truncated = true;
  }
  episode_over_ = outcome.terminal || outcome.truncated;
  outcome.state = state_;
  trace_step(action, outcome);
  return outcome;
}

void Environment::trace_step(const Action& action, const StepOutcome& outcome) const {
  if (!trace_) return;
  int allowed = 0;
  for (auto b : mask()) allowed += b;
  *trace_ << "{\"step\":" << steps_in_episode_ << ",\"action\":\"";
  if (action.kind == Action::Kind::kRequest) {
    *trace_ << "request";
  } else {
    *trace_ << (action.axis == PauliAxis::kX ? 'X' : 'Z') << action.qubit;
  }
  *trace_ << "\",\"masked_actions\":" << allowed << ",\"reward\":" << outcome.reward
          << ",\"terminal\":" << (outcome.terminal ? "true" : "false")
          << ",\"truncated\":" << (outcome.truncated ? "true" : "false") << "}\n";
}

}  // namespace qrl
