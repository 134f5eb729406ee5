#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "json.hpp"
#include "qrl/env.hpp"

using namespace qrl;

namespace {

NoiseConfig bitflip(double p_phys, double p_meas, int depth = 5) {
  NoiseConfig cfg;
  cfg.model = NoiseModel::kBitFlip;
  cfg.p_phys = p_phys;
  cfg.p_meas = p_meas;
  cfg.volume_depth = depth;
  return cfg;
}

}  // namespace

TEST_CASE("action space sizes and ordering") {
  const CodeLayout layout = CodeLayout::build(3);
  const auto bits = action_space(layout, NoiseModel::kBitFlip);
  REQUIRE(bits.size() == 10);  // d^2 + 1
  for (int q = 0; q < 9; ++q) {
    CHECK(bits[q] == Action::flip(PauliAxis::kX, q));
  }
  CHECK(bits.back() == Action::request());

  const auto depol = action_space(layout, NoiseModel::kDepolarizing);
  REQUIRE(depol.size() == 19);  // 2 d^2 + 1
  CHECK(depol[9] == Action::flip(PauliAxis::kZ, 0));
  CHECK(depol[17] == Action::flip(PauliAxis::kZ, 8));
  CHECK(depol.back() == Action::request());
}

TEST_CASE("degenerate noiseless configuration is rejected") {
  CHECK_THROWS_AS(Environment(CodeLayout::build(3), bitflip(0.0, 0.0), 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(Environment(CodeLayout::build(3), bitflip(0.1, 0.1), 1, 0),
                  std::invalid_argument);
}

TEST_CASE("reset yields a non-trivial volume and empty history") {
  Environment env(CodeLayout::build(3), bitflip(0.02, 0.02), 5);
  const EnvState state = env.reset();
  CHECK(state.history.empty());
  CHECK(state.volume.any());
  CHECK(state.volume.slices.size() == 5);
  CHECK(env.volumes_generated() >= 1);
  CHECK(env.syndromes_seen() == env.volumes_generated() * 5);

  Environment twin(CodeLayout::build(3), bitflip(0.02, 0.02), 5);
  CHECK(twin.reset() == state);
}

TEST_CASE("stepping before reset or after the episode is a contract violation") {
  Environment env(CodeLayout::build(3), bitflip(0.0, 0.4), 7);
  CHECK_THROWS_AS(env.step(Action::request()), std::logic_error);
}

TEST_CASE("action legality checks") {
  Environment env(CodeLayout::build(3), bitflip(0.05, 0.05), 9);
  env.reset();
  CHECK_THROWS_AS(env.step(Action::flip(PauliAxis::kZ, 0)), std::invalid_argument);
  CHECK_THROWS_AS(env.step(Action::flip(PauliAxis::kX, 9)), std::invalid_argument);
  CHECK_THROWS_AS(env.step(Action::flip(PauliAxis::kX, -1)), std::invalid_argument);
}

TEST_CASE("fresh flip keeps the volume and extends the history") {
  Environment env(CodeLayout::build(3), bitflip(0.05, 0.05), 11);
  const EnvState start = env.reset();
  const StepOutcome out = env.step(Action::flip(PauliAxis::kX, 4));
  CHECK(out.state.volume == start.volume);
  REQUIRE(out.state.history.size() == 1);
  CHECK(out.state.history[0] == Action::flip(PauliAxis::kX, 4));
  // White-box soundness: signals reflect the hidden frame.
  CHECK(out.reward == (is_trivial(env.layout(), env.hidden_frame()) ? 1.0 : 0.0));
  CHECK(out.terminal == !env.referee().verdict(env.hidden_frame()));
}

TEST_CASE("request resets the history, issues a new volume, carries signals") {
  Environment env(CodeLayout::build(3), bitflip(0.05, 0.05), 13);
  env.reset();
  const StepOutcome after_flip = env.step(Action::flip(PauliAxis::kX, 2));
  if (after_flip.terminal) return;  // unlucky seed would end the episode
  const EnvState before = env.state();
  const StepOutcome out = env.step(Action::request());
  // The hidden frame was not touched by the action itself, so the signals
  // are exactly the previous step's.
  CHECK(out.reward == after_flip.reward);
  CHECK(out.terminal == after_flip.terminal);
  CHECK(out.state.history.empty());
  CHECK(out.state.volume.slices != before.volume.slices);
}

TEST_CASE("repeated flip is judged like a fresh flip and triggers a new volume") {
  Environment env(CodeLayout::build(3), bitflip(0.01, 0.05), 17);
  env.reset();
  const Action a = Action::flip(PauliAxis::kX, 0);
  const StepOutcome first = env.step(a);
  if (first.terminal) return;
  const PauliFrame before_repeat = env.hidden_frame();
  const std::uint64_t volumes_before = env.volumes_generated();
  const StepOutcome repeat = env.step(a);
  // The flip really happened (second toggle cancels the first)...
  PauliFrame expected = apply_flip(before_repeat, PauliAxis::kX, 0);
  if (!repeat.terminal) {
    // ...and a fresh volume advanced the frame afterwards.
    CHECK(repeat.state.history.empty());
    CHECK(env.volumes_generated() > volumes_before);
  } else {
    CHECK(env.hidden_frame() == expected);
  }
}

TEST_CASE("scripted episode: walking a logical string ends at the referee") {
  // Nearly noiseless physical channel: the hidden frame stays whatever the
  // agent makes it, while measurement noise keeps volumes non-trivial.
  const CodeLayout layout = CodeLayout::build(3);
  Environment env(layout, bitflip(1e-12, 0.3), 19);
  env.reset();
  const MatchingReferee oracle(layout);

  PauliFrame expected(layout.n_qubits());
  bool oracle_terminal = false;
  for (int q : layout.logical_x_support()) {
    expected = apply_flip(expected, PauliAxis::kX, q);
    oracle_terminal = !oracle.verdict(expected);
    const StepOutcome out = env.step(Action::flip(PauliAxis::kX, q));
    CHECK(env.hidden_frame() == expected);
    CHECK(out.terminal == oracle_terminal);
    CHECK(out.reward == (is_trivial(layout, expected) ? 1.0 : 0.0));
    if (out.terminal) break;
  }
  // Building up a clean logical operator must kill the episode on the way:
  // at the latest when the full string (zero syndrome, class (1,0)) is there.
  CHECK(oracle_terminal);
}

TEST_CASE("fresh flip canceling the only error is rewarded") {
  // Deterministic construction: nearly-noiseless env, inject one error by
  // stepping, then cancel it; the cancel step must return reward 1.
  const CodeLayout layout = CodeLayout::build(3);
  Environment env(layout, bitflip(1e-12, 0.3), 23);
  env.reset();
  const StepOutcome poke = env.step(Action::flip(PauliAxis::kX, 4));
  CHECK(poke.reward == 0.0);
  CHECK_FALSE(poke.terminal);  // single error is always recoverable
  const StepOutcome heal = env.step(Action::flip(PauliAxis::kX, 4));
  // The repeat branch judges the post-flip frame: back to trivial.
  CHECK(heal.reward == 1.0);
  CHECK_FALSE(heal.terminal);
}

TEST_CASE("exploration mask follows violated supports and history neighborhoods") {
  const CodeLayout layout = CodeLayout::build(3);

  EnvState state;
  state.volume.slices.assign(5, Syndrome{std::vector<std::uint8_t>(8, 0)});

  SUBCASE("all-zero volume leaves only the request") {
    const auto mask = exploration_mask(layout, NoiseModel::kBitFlip, state);
    REQUIRE(mask.size() == 10);
    for (int i = 0; i < 9; ++i) CHECK(mask[i] == 0);
    CHECK(mask[9] == 1);
  }

  SUBCASE("one violated weight-4 plaquette enables exactly its support") {
    state.volume.slices[2].bits[0] = 1;  // stabilizer {0,1,3,4}
    const auto mask = exploration_mask(layout, NoiseModel::kBitFlip, state);
    for (int q = 0; q < 9; ++q) {
      const bool expected = q == 0 || q == 1 || q == 3 || q == 4;
      CHECK(mask[q] == (expected ? 1 : 0));
    }
    CHECK(mask[9] == 1);
  }

  SUBCASE("history qubits open their plaquette neighborhoods") {
    state.history.push_back(Action::flip(PauliAxis::kX, 8));
    const auto mask = exploration_mask(layout, NoiseModel::kBitFlip, state);
    for (int q = 0; q < 9; ++q) {
      const auto& nb = layout.plaquette_neighborhood(8);
      const bool expected = std::count(nb.begin(), nb.end(), q) > 0;
      CHECK(mask[q] == (expected ? 1 : 0));
    }
  }

  SUBCASE("depolarizing masks X and Z alike") {
    state.volume.slices[0].bits[3] = 1;  // stabilizer {4,5,7,8}
    const auto mask = exploration_mask(layout, NoiseModel::kDepolarizing, state);
    REQUIRE(mask.size() == 19);
    for (int q = 0; q < 9; ++q) {
      CHECK(mask[q] == mask[9 + q]);
    }
    CHECK(mask[4] == 1);
    CHECK(mask[0] == 0);
    CHECK(mask[18] == 1);
  }
}

TEST_CASE("random-walk invariants over many steps") {
  const CodeLayout layout = CodeLayout::build(3);
  Environment env(layout, bitflip(0.01, 0.01), 29);
  Rng rng(31);
  const auto actions = action_space(layout, NoiseModel::kBitFlip);
  env.reset();
  int steps = 0;
  while (steps < 10000) {
    const Action action = actions[rng.uniform_int(actions.size())];
    const bool expect_branch2 =
        action.kind == Action::Kind::kRequest ||
        std::find(env.state().history.begin(), env.state().history.end(), action) !=
            env.state().history.end();
    const StepOutcome out = env.step(action);
    ++steps;
    // Branch-1 steps leave the judged frame in place, so reward soundness is
    // directly observable there; branch 2 advances the frame with new noise.
    if (!expect_branch2 && out.reward == 1.0) {
      CHECK(is_trivial(layout, env.hidden_frame()));
    }
    if (out.terminal) {
      CHECK_FALSE(env.referee().verdict(env.hidden_frame()));
      CHECK(env.episode_over());
      env.reset();
      continue;
    }
    // History empties exactly on branch-2 steps.
    CHECK(out.state.history.empty() == expect_branch2);
  }
}

TEST_CASE("request-only policy eventually dies and time is accounted") {
  Environment env(CodeLayout::build(3), bitflip(0.05, 0.05), 37);
  env.reset();
  bool died = false;
  for (int i = 0; i < 200000; ++i) {
    if (env.step(Action::request()).terminal) {
      died = true;
      break;
    }
  }
  CHECK(died);
  CHECK(env.syndromes_seen() == env.volumes_generated() * 5);
  CHECK_FALSE(env.referee().verdict(env.hidden_frame()));
}

TEST_CASE("step cap truncates without a terminal flag") {
  // Pure measurement noise: the hidden frame stays clean, so the episode can
  // only end through the cap.
  Environment env(CodeLayout::build(3), bitflip(0.0, 0.3), 41, 3);
  env.reset();
  StepOutcome out = env.step(Action::request());
  CHECK_FALSE(out.truncated);
  out = env.step(Action::request());
  CHECK_FALSE(out.truncated);
  out = env.step(Action::request());
  CHECK(out.truncated);
  CHECK_FALSE(out.terminal);
  CHECK(env.episode_over());
  CHECK_THROWS_AS(env.step(Action::request()), std::logic_error);
}

TEST_CASE("identical seeds replay identical trajectories") {
  const CodeLayout layout = CodeLayout::build(3);
  Environment a(layout, bitflip(0.03, 0.03), 43);
  Environment b(layout, bitflip(0.03, 0.03), 43);
  Rng script(47);
  const auto actions = action_space(layout, NoiseModel::kBitFlip);
  a.reset();
  b.reset();
  for (int i = 0; i < 2000; ++i) {
    const Action action = actions[script.uniform_int(actions.size())];
    const StepOutcome oa = a.step(action);
    const StepOutcome ob = b.step(action);
    CHECK(oa.state == ob.state);
    CHECK(oa.reward == ob.reward);
    CHECK(oa.terminal == ob.terminal);
    if (oa.terminal || oa.truncated) {
      a.reset();
      b.reset();
    }
  }
}

TEST_CASE("trace emits one JSON record per step") {
  Environment env(CodeLayout::build(3), bitflip(0.02, 0.02), 53);
  std::ostringstream sink;
  env.set_trace(&sink);
  env.reset();
  env.step(Action::flip(PauliAxis::kX, 1));
  if (!env.episode_over()) env.step(Action::request());
  env.set_trace(nullptr);

  std::istringstream lines(sink.str());
  std::string line;
  int records = 0;
  while (std::getline(lines, line)) {
    const nlohmann::json doc = nlohmann::json::parse(line);
    ++records;
    if (doc.contains("event")) {
      CHECK(doc["event"] == "reset");
    } else {
      CHECK(doc.contains("action"));
      CHECK(doc.contains("masked_actions"));
      CHECK(doc.contains("reward"));
      CHECK(doc.contains("terminal"));
    }
  }
  CHECK(records >= 2);
}
