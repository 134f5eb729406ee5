#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qrl/deepq.hpp"
#include "qrl/env.hpp"

namespace qrl {

// Deployment-style decoding policy: given the environment's current visible
// state, produce the next action. Implementations must not mutate the
// environment; white-box stubs may read its hidden frame.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual Action act(const Environment& env) = 0;
};

// Greedy q-network policy (inference mode, no exploration).
class GreedyNetworkAgent final : public Agent {
 public:
  explicit GreedyNetworkAgent(const nn::Network<float>& net) : net_(net) {}
  Action act(const Environment& env) override;

 private:
  const nn::Network<float>& net_;
  std::vector<Action> actions_;  // cached canonical action order
};

// Degenerate policy that always asks for a fresh volume: pure error
// accumulation, the do-nothing baseline.
class RequestAgent final : public Agent {
 public:
  Action act(const Environment& env) override;
};

// White-box reference policy that reads the hidden frame and cancels it one
// flip at a time; requests once the frame is clean. Test/benchmark use only.
class OracleAgent final : public Agent {
 public:
  Action act(const Environment& env) override;
};

struct EpisodeResult {
  std::uint64_t lifetime = 0;  // noise rounds survived (syndromes seen)
  bool censored = false;       // ended by the step cap, not the referee
};

// Runs one Fig.-6-style episode: reset, then greedy actions until the
// referee fails (or the step cap censors the episode). The lifetime counts
// volume_depth rounds per volume generated, the reset volume included.
EpisodeResult decode_episode(Agent& agent, Environment& env);

struct EvalConfig {
  int distance = 3;
  NoiseConfig noise;
  std::uint64_t seed = 1;
  std::uint64_t step_cap = 1000000;
  std::uint64_t min_syndromes = 1000000;
  std::string agent_id;  // checkpoint identifier echoed into the report
};

struct EvalReport {
  double error_rate = 0.0;
  std::uint64_t episodes = 0;
  std::uint64_t total_syndromes_seen = 0;
  double mean_lifetime = 0.0;  // = total_syndromes_seen / episodes
  double standard_error = 0.0;
  double baseline_lifetime = 0.0;
  std::uint64_t cap_hits = 0;
  std::uint64_t seed = 0;
  std::string agent_id;

  // cap_hits > 0 means some episodes were cut short, so the mean only lower-
  // bounds the true lifetime.
  bool mean_is_lower_bound() const { return cap_hits > 0; }
};

// Expected rounds until a single unencoded qubit first fails at per-round
// error probability p: the geometric mean 1/p.
double baseline_lifetime(double p);

// Episode-level aggregation, separated from episode generation so stub
// processes can calibrate the estimator.
EvalReport aggregate_episodes(const std::vector<EpisodeResult>& episodes,
                              const EvalConfig& config);

// Repeats decode_episode on independently seeded environments until at least
// min_syndromes rounds have been observed in total.
EvalReport evaluate_agent(Agent& agent, const EvalConfig& config);

// One JSON object (single line) for JSON-lines metric logs.
std::string eval_report_json(const EvalReport& report);

// Header "p,mean_lifetime,stderr,baseline" plus one row per report.
std::string eval_reports_csv(const std::vector<EvalReport>& reports);

}  // namespace qrl
