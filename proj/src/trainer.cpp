#include "qrl/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "qrl/referee.hpp"

namespace qrl {

namespace {

std::vector<std::vector<float>> param_copy(const nn::Network<float>& net) {
  std::vector<std::vector<float>> out;
  for (const auto& p : net.parameters()) out.push_back(*p.data);
  return out;
}

void param_restore(nn::Network<float>& net, const std::vector<std::vector<float>>& w) {
  auto params = net.parameters();
  for (size_t i = 0; i < params.size(); ++i) *params[i].data = w[i];
}

void validate_point(const HyperParamPoint& hp) {
  if (hp.initial_epsilon < 0.0 || hp.initial_epsilon > 1.0 ||
      hp.final_epsilon < 0.0 || hp.final_epsilon > 1.0) {
    throw std::invalid_argument("epsilon values must be in [0, 1]");
  }
  if (hp.exploration_steps <= 0) {
    throw std::invalid_argument("exploration_steps must be positive");
  }
  if (hp.learning_rate <= 0.0) {
    throw std::invalid_argument("learning_rate must be positive");
  }
  if (hp.target_update_freq <= 0) {
    throw std::invalid_argument("target_update_freq must be positive");
  }
}

void validate_fixed(const FixedParams& fixed) {
  if (fixed.batch_size < 1) throw std::invalid_argument("batch_size must be positive");
  if (fixed.max_training_steps < 0) {
    throw std::invalid_argument("max_training_steps must be non-negative");
  }
  if (fixed.memory_capacity < static_cast<std::size_t>(fixed.batch_size)) {
    throw std::invalid_argument("memory capacity below the batch size");
  }
  if (fixed.rolling_window < 1 || fixed.patience < 1) {
    throw std::invalid_argument("rolling window and patience must be positive");
  }
  if (fixed.gamma < 0.0 || fixed.gamma > 1.0) {
    throw std::invalid_argument("gamma must be in [0, 1]");
  }
}

nlohmann::json hp_json(const HyperParamPoint& hp) {
  return {{"initial_epsilon", hp.initial_epsilon},
          {"final_epsilon", hp.final_epsilon},
          {"exploration_steps", hp.exploration_steps},
          {"learning_rate", hp.learning_rate},
          {"target_update_freq", hp.target_update_freq}};
}

}  // namespace

std::vector<HyperParamPoint> full_grid() {
  std::vector<HyperParamPoint> grid;
  for (double ie : {1.0, 0.5, 0.25}) {
    for (double fe : {0.04, 0.02, 0.001}) {
      for (std::int64_t ex : {100000, 200000}) {
        for (double lr : {1e-4, 5e-5, 1e-5, 5e-6}) {
          for (std::int64_t sync : {2500, 5000}) {
            grid.push_back({ie, fe, ex, lr, sync});
          }
        }
      }
    }
  }
  return grid;
}

std::vector<HyperParamPoint> desk_grid() {
  std::vector<HyperParamPoint> grid;
  for (double ie : {1.0, 0.5}) {
    for (double lr : {1e-4, 5e-5}) {
      for (std::int64_t sync : {2500, 5000}) {
        grid.push_back({ie, 0.02, 100000, lr, sync});
      }
    }
  }
  return grid;
}

EarlyStopTracker::EarlyStopTracker(std::int64_t window, std::int64_t patience)
    : window_(window), patience_(patience) {
  if (window < 1 || patience < 1) {
    throw std::invalid_argument("window and patience must be positive");
  }
}

bool EarlyStopTracker::record(std::uint64_t lifetime) {
  if (static_cast<std::int64_t>(recent_.size()) < window_) {
    recent_.push_back(lifetime);
  } else {
    const std::size_t slot = episodes_ % window_;
    recent_sum_ -= recent_[slot];
    recent_[slot] = lifetime;
  }
  recent_sum_ += lifetime;
  ++episodes_;
  rolling_ = static_cast<double>(recent_sum_) /
             static_cast<double>(std::min<std::int64_t>(episodes_, window_));
  // Best-tracking waits for a full window: a partial-window average over a
  // couple of lucky episodes would otherwise freeze `best` at a value the
  // true rolling mean can never beat, stopping runs that never trained.
  if (episodes_ < window_) {
    improved_last_ = false;
    return false;
  }
  improved_last_ = rolling_ > best_;
  if (improved_last_) {
    best_ = rolling_;
    best_episode_ = episodes_ - 1;
    since_best_ = 0;
  } else {
    ++since_best_;
  }
  return since_best_ >= patience_;
}

TrainResult train_agent(const TrainEnvConfig& env_cfg, const HyperParamPoint& hp,
                        const FixedParams& fixed, std::uint64_t seed,
                        const LoadedAgent* init) {
  validate_point(hp);
  validate_fixed(fixed);
  const CodeLayout layout = CodeLayout::build(env_cfg.distance);
  const NoiseConfig noise = env_cfg.noise(fixed.volume_depth);
  noise.validate();
  const auto referee = std::make_shared<MatchingReferee>(layout);
  const std::vector<Action> actions = action_space(layout, env_cfg.model);
  const nn::NetworkSpec spec = nn::default_network_spec(
      env_cfg.distance, fixed.volume_depth, static_cast<int>(actions.size()));

  // One independent stream per role, all derived from the run seed.
  const Rng root(seed);
  Rng init_rng = root.child(0);
  Rng policy_rng = root.child(1);
  Rng dropout_rng = root.child(2);
  Rng replay_rng = root.child(3);

  nn::Network<float> online(spec, init_rng);
  if (init) {
    if (!(init->network.spec() == spec)) {
      throw std::invalid_argument("init checkpoint does not match this run's network");
    }
    online.copy_weights_from(init->network);
  }
  nn::Network<float> target(online);
  ReplayMemory memory(fixed.memory_capacity);
  if (init && init->replay) {
    for (std::size_t i = 0; i < init->replay->size(); ++i) {
      memory.push(init->replay->at(i));  // re-ring under this run's capacity
    }
  }
  nn::Adam<float> opt(static_cast<float>(hp.learning_rate));
  Environment env(layout, noise, root.child(4).seed(), env_cfg.episode_step_cap,
                  referee);
  EarlyStopTracker stopper(fixed.rolling_window, fixed.patience);

  TrainRecord record;
  record.hp = hp;
  record.seed = seed;
  std::vector<std::vector<float>> best_params = param_copy(online);
  std::int64_t train_steps = 0;
  bool stop = fixed.max_training_steps == 0;
  while (!stop) {
    const std::uint64_t ep_start = env.syndromes_seen();
    env.reset();
    EncodedState s = encode_state(layout, env.state());
    bool ep_done = false;
    while (!ep_done && !stop) {
      const double eps = annealed_epsilon(hp.initial_epsilon, hp.final_epsilon,
                                          hp.exploration_steps, train_steps);
      const int a = select_action(online, s, eps, env.mask(), policy_rng);
      const StepOutcome out = env.step(actions[a]);
      Experience e;
      e.s = std::move(s);
      e.action = a;
      e.reward = static_cast<float>(out.reward);
      e.s_next = encode_state(layout, out.state);
      e.terminal = out.terminal;
      s = e.s_next;
      memory.push(std::move(e));
      if (memory.size() >= static_cast<std::size_t>(fixed.batch_size)) {
        const Batch batch = memory.sample(fixed.batch_size, replay_rng);
        train_step(online, target, batch, fixed.gamma, opt, dropout_rng);
        ++train_steps;
        if (train_steps % hp.target_update_freq == 0) sync_target(online, target);
        if (train_steps >= fixed.max_training_steps) stop = true;
      }
      ep_done = out.terminal || out.truncated;
    }
    if (!ep_done) break;  // step budget ran out mid-episode
    const std::uint64_t lifetime = env.syndromes_seen() - ep_start;
    record.episode_lifetimes.push_back(lifetime);
    const bool early = stopper.record(lifetime);
    record.rolling_average.push_back(stopper.rolling_average());
    if (stopper.improved_last()) best_params = param_copy(online);
    if (early) {
      record.early_stopped = true;
      stop = true;
    }
  }
  record.training_steps_used = train_steps;
  record.episodes = stopper.episodes();
  record.best_rolling = stopper.best_episode() >= 0 ? stopper.best() : 0.0;
  record.best_rolling_episode = stopper.best_episode();
  record.final_epsilon_state = annealed_epsilon(
      hp.initial_epsilon, hp.final_epsilon, hp.exploration_steps, train_steps);

  // Hand back the best-rolling weights; runs too short to ever fill the
  // rolling window keep their final weights instead.
  if (stopper.best_episode() >= 0) param_restore(online, best_params);
  CheckpointMeta meta;
  meta.distance = env_cfg.distance;
  meta.model = env_cfg.model;
  meta.volume_depth = fixed.volume_depth;
  meta.train_steps = train_steps;
  meta.epsilon = record.final_epsilon_state;
  return {std::move(record), std::move(online), std::move(memory), meta};
}

std::vector<GridPointResult> run_grid(const StageConfig& stage,
                                      const LoadedAgent* init) {
  const int n = static_cast<int>(stage.grid.size());
  if (n == 0) throw std::invalid_argument("grid must contain at least one point");
  std::vector<GridPointResult> results(n);
  const Rng base(stage.base_seed);
  std::vector<std::uint64_t> seeds(n);
  for (int i = 0; i < n; ++i) seeds[i] = base.child(i).seed();

  std::atomic<int> next{0};
  auto work = [&]() {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      results[i].grid_index = i;
      try {
        results[i].result =
            train_agent(stage.env, stage.grid[i], stage.fixed, seeds[i], init);
      } catch (const std::exception& e) {
        results[i].error = e.what();
      } catch (...) {
        results[i].error = "unknown error";
      }
    }
  };
  const int workers = std::clamp(stage.workers, 1, n);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  const bool any_ok = std::any_of(results.begin(), results.end(),
                                  [](const auto& r) { return r.result.has_value(); });
  if (!any_ok) {
    throw std::runtime_error("all grid points failed; first error: " +
                             results.front().error);
  }
  return results;
}

NetworkEvaluator default_network_evaluator() {
  return [](const nn::Network<float>& net, const EvalConfig& cfg) {
    GreedyNetworkAgent agent(net);
    return evaluate_agent(agent, cfg);
  };
}

RankedStage rank_and_promote(std::vector<GridPointResult>& results,
                             const StageConfig& stage,
                             const NetworkEvaluator& evaluator) {
  if (results.empty()) throw std::invalid_argument("no grid results to rank");
  const Rng base(stage.base_seed);
  RankedStage ranked;
  for (GridPointResult& r : results) {
    LeaderboardEntry entry;
    entry.grid_index = r.grid_index;
    if (!r.result) {
      entry.failed = true;
      entry.error = r.error;
    } else {
      EvalConfig ecfg;
      ecfg.distance = stage.env.distance;
      ecfg.noise = stage.env.noise(stage.fixed.volume_depth);
      ecfg.seed = base.child(1000000 + r.grid_index).seed();
      ecfg.step_cap = stage.eval_step_cap;
      ecfg.min_syndromes = stage.rank_min_syndromes;
      ecfg.agent_id = "grid-" + std::to_string(r.grid_index);
      const EvalReport rep = evaluator(r.result->network, ecfg);
      r.result->record.evaluation = rep;
      entry.evaluated_mean_lifetime = rep.mean_lifetime;
      entry.standard_error = rep.standard_error;
      entry.training_steps = r.result->record.training_steps_used;
    }
    ranked.leaderboard.push_back(std::move(entry));
  }
  std::stable_sort(ranked.leaderboard.begin(), ranked.leaderboard.end(),
                   [](const LeaderboardEntry& a, const LeaderboardEntry& b) {
                     if (a.failed != b.failed) return !a.failed;
                     if (a.evaluated_mean_lifetime != b.evaluated_mean_lifetime) {
                       return a.evaluated_mean_lifetime > b.evaluated_mean_lifetime;
                     }
                     if (a.training_steps != b.training_steps) {
                       return a.training_steps < b.training_steps;
                     }
                     return a.grid_index < b.grid_index;
                   });
  if (ranked.leaderboard.front().failed) {
    throw std::runtime_error("no successful grid point to promote");
  }
  ranked.winner_index = ranked.leaderboard.front().grid_index;
  ranked.winner_report = *results[ranked.winner_index].result->record.evaluation;
  return ranked;
}

LoadedAgent promote(const GridPointResult& winner) {
  if (!winner.result) throw std::invalid_argument("cannot promote a failed point");
  return {winner.result->meta, winner.result->network, winner.result->memory};
}

std::vector<double> CurriculumConfig::rates() const {
  if (p_start <= 0.0) throw std::invalid_argument("p_start must be positive");
  if (p_increment <= 0.0) {
    throw std::invalid_argument("rate sequence must be strictly increasing");
  }
  if (p_final < p_start) throw std::invalid_argument("p_final below p_start");
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double p = p_start + k * p_increment;
    if (p > p_final + 1e-12) break;
    out.push_back(p);
  }
  return out;
}

namespace {

void persist_stage(const std::string& out_dir, int stage_index, double rate,
                   const std::vector<GridPointResult>& results,
                   const RankedStage& ranked, const EvalReport& report) {
  namespace fs = std::filesystem;
  std::ostringstream name;
  name << "stage-" << std::setw(2) << std::setfill('0') << stage_index;
  const fs::path stage_dir = fs::path(out_dir) / name.str();
  for (const GridPointResult& r : results) {
    const fs::path point_dir = stage_dir / std::to_string(r.grid_index);
    fs::create_directories(point_dir);
    if (!r.result) {
      std::ofstream((point_dir / "error.txt")) << r.error << "\n";
      continue;
    }
    // Weights-only checkpoints per point; the winner's memory travels in the
    // stage-level promoted checkpoint below.
    save_agent((point_dir / "agent.ckpt").string(), r.result->meta,
               r.result->network, nullptr);
    std::ofstream log(point_dir / "train_log.jsonl");
    log << train_record_jsonl(r.result->record);
  }
  const GridPointResult& winner = results[ranked.winner_index];
  save_agent((stage_dir / "promoted.ckpt").string(), winner.result->meta,
             winner.result->network, &winner.result->memory);
  std::ofstream lb(stage_dir / "leaderboard.json");
  lb << leaderboard_json(ranked) << "\n";
  std::ofstream rep(stage_dir / "winner_report.json");
  rep << eval_report_json(report) << "\n";
  std::ostringstream meta;
  meta << "{\"stage\":" << stage_index << ",\"error_rate\":" << rate << "}";
  std::ofstream((stage_dir / "stage.json")) << meta.str() << "\n";
}

}  // namespace

CurriculumResult run_curriculum(const CurriculumConfig& config,
                                const NetworkEvaluator& evaluator) {
  const std::vector<double> rates = config.rates();
  CurriculumResult out;
  std::optional<LoadedAgent> inherited;
  const Rng base(config.base_seed);
  for (std::size_t k = 0; k < rates.size(); ++k) {
    StageConfig stage;
    stage.env = config.env;
    stage.env.error_rate = rates[k];
    stage.fixed = config.fixed;
    stage.grid = config.grid;
    stage.base_seed = base.child(100 + k).seed();
    stage.workers = config.workers;
    stage.rank_min_syndromes = config.rank_min_syndromes;
    stage.eval_step_cap = config.eval_step_cap;

    auto results = run_grid(stage, inherited ? &*inherited : nullptr);
    RankedStage ranked = rank_and_promote(results, stage, evaluator);

    // Winner re-evaluated at the (bigger) reporting budget.
    EvalConfig rcfg;
    rcfg.distance = stage.env.distance;
    rcfg.noise = stage.env.noise(stage.fixed.volume_depth);
    rcfg.seed = base.child(200 + k).seed();
    rcfg.step_cap = config.eval_step_cap;
    rcfg.min_syndromes = config.report_min_syndromes;
    rcfg.agent_id = "stage-" + std::to_string(k) + "-winner";
    const EvalReport report =
        evaluator(results[ranked.winner_index].result->network, rcfg);

    if (!config.out_dir.empty()) {
      persist_stage(config.out_dir, static_cast<int>(k), rates[k], results,
                    ranked, report);
    }
    const bool below_baseline = report.mean_lifetime < report.baseline_lifetime;
    out.stages.push_back({static_cast<int>(k), rates[k], std::move(ranked), report});
    if (below_baseline) {
      out.stopped_by_baseline = true;
      break;
    }
    inherited = promote(results[out.stages.back().ranking.winner_index]);
  }
  return out;
}

std::string train_record_jsonl(const TrainRecord& record) {
  std::ostringstream out;
  for (std::size_t i = 0; i < record.episode_lifetimes.size(); ++i) {
    nlohmann::json line = {{"episode", i},
                           {"lifetime", record.episode_lifetimes[i]},
                           {"rolling_average", record.rolling_average[i]}};
    out << line.dump() << "\n";
  }
  nlohmann::json summary = {{"summary", true},
                            {"hp", hp_json(record.hp)},
                            {"seed", record.seed},
                            {"episodes", record.episodes},
                            {"training_steps_used", record.training_steps_used},
                            {"best_rolling", record.best_rolling},
                            {"best_rolling_episode", record.best_rolling_episode},
                            {"early_stopped", record.early_stopped},
                            {"final_epsilon_state", record.final_epsilon_state}};
  if (record.evaluation) {
    summary["evaluation"] = nlohmann::json::parse(eval_report_json(*record.evaluation));
  }
  out << summary.dump() << "\n";
  return out.str();
}

std::string leaderboard_json(const RankedStage& stage) {
  nlohmann::json entries = nlohmann::json::array();
  for (const LeaderboardEntry& e : stage.leaderboard) {
    entries.push_back({{"grid_index", e.grid_index},
                       {"failed", e.failed},
                       {"evaluated_mean_lifetime", e.evaluated_mean_lifetime},
                       {"standard_error", e.standard_error},
                       {"training_steps", e.training_steps},
                       {"error", e.error}});
  }
  nlohmann::json doc = {{"winner_index", stage.winner_index},
                        {"entries", entries},
                        {"winner_report",
                         nlohmann::json::parse(eval_report_json(stage.winner_report))}};
  return doc.dump();
}

}  // namespace qrl
