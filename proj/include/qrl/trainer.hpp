#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qrl/deepq.hpp"
#include "qrl/env.hpp"
#include "qrl/eval.hpp"

namespace qrl {

// One hyper-parameter grid point (the Table-I variables).
struct HyperParamPoint {
  double initial_epsilon = 1.0;
  double final_epsilon = 0.02;
  std::int64_t exploration_steps = 100000;
  double learning_rate = 1e-4;
  std::int64_t target_update_freq = 5000;

  bool operator==(const HyperParamPoint&) const = default;
};

// Fixed training hyper-parameters (Table-I constants).
struct FixedParams {
  int batch_size = 32;
  std::int64_t rolling_window = 1000;  // episodes
  std::int64_t patience = 1000;        // episodes without rolling improvement
  std::int64_t max_training_steps = 1000000;
  std::size_t memory_capacity = 50000;
  int volume_depth = 5;
  double gamma = 0.99;

  bool operator==(const FixedParams&) const = default;
};

// Environment of one training run; the error rate sets p_phys = p_meas.
struct TrainEnvConfig {
  int distance = 3;
  NoiseModel model = NoiseModel::kBitFlip;
  double error_rate = 1e-3;
  std::uint64_t episode_step_cap = 100000;

  NoiseConfig noise(int volume_depth) const {
    return NoiseConfig{model, error_rate, error_rate, volume_depth};
  }
};

// The full 144-point Table-I grid, in row-major order over (initial epsilon,
// final epsilon, exploration steps, learning rate, target sync).
std::vector<HyperParamPoint> full_grid();

// An 8-point sub-grid of Table-I values sized for a desk run.
std::vector<HyperParamPoint> desk_grid();

// Rolling-average early stopping: stop once `patience` episodes pass without
// a strict improvement of the rolling mean lifetime.
class EarlyStopTracker {
 public:
  EarlyStopTracker(std::int64_t window, std::int64_t patience);

  // Records one episode lifetime; true once training should stop.
  bool record(std::uint64_t lifetime);

  double rolling_average() const { return rolling_; }
  double best() const { return best_; }
  std::int64_t best_episode() const { return best_episode_; }
  std::int64_t episodes() const { return episodes_; }
  bool improved_last() const { return improved_last_; }

 private:
  std::int64_t window_;
  std::int64_t patience_;
  std::vector<std::uint64_t> recent_;  // ring of the last `window_` lifetimes
  std::uint64_t recent_sum_ = 0;
  std::int64_t episodes_ = 0;
  double rolling_ = 0.0;
  double best_ = -1.0;
  std::int64_t best_episode_ = -1;
  std::int64_t since_best_ = 0;
  bool improved_last_ = false;
};

// Metrics of one training run; everything needed to re-rank or plot.
struct TrainRecord {
  HyperParamPoint hp;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> episode_lifetimes;
  std::vector<double> rolling_average;  // aligned with episode_lifetimes
  double best_rolling = 0.0;
  std::int64_t best_rolling_episode = -1;
  std::int64_t training_steps_used = 0;
  std::int64_t episodes = 0;
  bool early_stopped = false;
  double final_epsilon_state = 0.0;
  std::optional<EvalReport> evaluation;  // filled by rank_and_promote
};

// Trained artifacts: metrics, the best-rolling-average weights, and the
// final replay memory (what a later curriculum stage inherits).
struct TrainResult {
  TrainRecord record;
  nn::Network<float> network;
  ReplayMemory memory;
  CheckpointMeta meta;
};

// Runs the deepQ loop (act, store, sample, train, periodic sync) until
// max_training_steps or early stop. `init` (weights + optionally memory)
// seeds the run for curriculum promotion.
TrainResult train_agent(const TrainEnvConfig& env_cfg, const HyperParamPoint& hp,
                        const FixedParams& fixed, std::uint64_t seed,
                        const LoadedAgent* init = nullptr);

// One curriculum stage: a grid of points at a single error rate.
struct StageConfig {
  TrainEnvConfig env;
  FixedParams fixed;
  std::vector<HyperParamPoint> grid;
  std::uint64_t base_seed = 1;  // point i trains with child stream i
  int workers = 1;
  std::uint64_t rank_min_syndromes = 100000;
  std::uint64_t eval_step_cap = 100000;
};

struct GridPointResult {
  int grid_index = -1;
  std::optional<TrainResult> result;  // empty iff the point failed
  std::string error;                  // failure diagnostic
};

// Trains every grid point on a bounded worker pool; results are
// order-stable by grid index and independent of the worker count.
// Throws only if every point fails.
std::vector<GridPointResult> run_grid(const StageConfig& stage,
                                      const LoadedAgent* init = nullptr);

// Pluggable evaluation so tests can stub lifetimes; the default plays the
// greedy policy through evaluate_agent.
using NetworkEvaluator =
    std::function<EvalReport(const nn::Network<float>&, const EvalConfig&)>;
NetworkEvaluator default_network_evaluator();

struct LeaderboardEntry {
  int grid_index = -1;
  bool failed = false;
  double evaluated_mean_lifetime = 0.0;
  double standard_error = 0.0;
  std::int64_t training_steps = 0;
  std::string error;
};

struct RankedStage {
  std::vector<LeaderboardEntry> leaderboard;  // sorted, winner first
  int winner_index = -1;                      // grid index of the winner
  EvalReport winner_report;
};

// Evaluates every successful record at the stage's error rate, sorts by
// evaluated mean lifetime (ties: fewer training steps, then grid index) and
// fills records' `evaluation`. Throws if no point succeeded.
RankedStage rank_and_promote(std::vector<GridPointResult>& results,
                             const StageConfig& stage,
                             const NetworkEvaluator& evaluator);

// Winner's weights + replay memory as a loadable agent for the next stage.
LoadedAgent promote(const GridPointResult& winner);

struct CurriculumConfig {
  double p_start = 1e-3;
  double p_increment = 2e-3;
  double p_final = 1e-3;  // inclusive; stages at p_start + k * p_increment
  TrainEnvConfig env;     // error_rate is overridden per stage
  FixedParams fixed;
  std::vector<HyperParamPoint> grid;
  std::uint64_t base_seed = 1;
  int workers = 1;
  std::uint64_t rank_min_syndromes = 100000;
  std::uint64_t report_min_syndromes = 1000000;
  std::uint64_t eval_step_cap = 100000;
  std::string out_dir;  // stage artifacts under <out_dir>/stage-<k>/ if set

  std::vector<double> rates() const;
};

struct StageSummary {
  int stage = 0;
  double error_rate = 0.0;
  RankedStage ranking;
  EvalReport report;  // winner re-evaluated at the reporting budget
};

struct CurriculumResult {
  std::vector<StageSummary> stages;
  bool stopped_by_baseline = false;  // best lifetime fell below 1/p
};

// Appendix-A iterative procedure: run a grid per rate, promote the winner's
// weights and memory into the next stage, stop at p_final or when the best
// agent is worse than a single faulty qubit.
CurriculumResult run_curriculum(const CurriculumConfig& config,
                                const NetworkEvaluator& evaluator);

// JSON-lines log of a training run: one line per episode plus a summary.
std::string train_record_jsonl(const TrainRecord& record);

// Leaderboard of one ranked stage as a JSON document.
std::string leaderboard_json(const RankedStage& stage);

}  // namespace qrl
