// Command-line surface: train / sweep / evaluate / referee-check / dump-layout.
//
// Option precedence: built-in defaults < --config file < --preset < explicit
// flags. Exit codes: 0 success, 1 usage error, 2 runtime failure, 3 check
// failed (referee-check found an uncorrected low-weight error).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qrl/code.hpp"
#include "qrl/config.hpp"
#include "qrl/deepq.hpp"
#include "qrl/eval.hpp"
#include "qrl/referee.hpp"
#include "qrl/trainer.hpp"

namespace {

constexpr int kExitRuntime = 2;
constexpr int kExitCheckFailed = 3;

struct CommonOpts {
  std::string config_path;
  std::string preset;
  int distance = 0;
  std::string noise;
  double p = 0.0;
  int depth = 0;
  std::uint64_t seed = 0;
  std::string out_dir;

  CLI::Option* config_opt = nullptr;
  CLI::Option* preset_opt = nullptr;
  CLI::Option* distance_opt = nullptr;
  CLI::Option* noise_opt = nullptr;
  CLI::Option* p_opt = nullptr;
  CLI::Option* depth_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  o.config_opt = cmd->add_option("--config", o.config_path,
                                 "JSON run configuration file");
  o.preset_opt = cmd->add_option("--preset", o.preset, "desk or paper")
                     ->check(CLI::IsMember({"desk", "paper"}));
  o.distance_opt = cmd->add_option("--distance", o.distance, "code distance");
  o.noise_opt = cmd->add_option("--noise", o.noise, "bitflip or depolarizing")
                    ->check(CLI::IsMember({"bitflip", "depolarizing"}));
  o.p_opt = cmd->add_option("--p", o.p, "error rate (p_phys = p_meas)");
  o.depth_opt = cmd->add_option("--depth", o.depth, "syndromes per volume");
  o.seed_opt = cmd->add_option("--seed", o.seed, "master seed");
  o.out_opt = cmd->add_option("--out", o.out_dir, "output directory");
}

qrl::RunConfig resolve_config(const CommonOpts& o) {
  qrl::RunConfig config;
  if (o.config_opt->count() > 0) config = qrl::load_config(o.config_path);
  if (o.preset_opt->count() > 0) qrl::apply_preset(config, o.preset);
  if (o.distance_opt->count() > 0) config.distance = o.distance;
  if (o.noise_opt->count() > 0) config.model = qrl::noise_model_from_name(o.noise);
  if (o.p_opt->count() > 0) {
    config.p = o.p;
    config.p_start = o.p;
    if (config.p_final < o.p) config.p_final = o.p;
  }
  if (o.depth_opt->count() > 0) config.depth = o.depth;
  if (o.seed_opt->count() > 0) config.seed = o.seed;
  if (o.out_opt->count() > 0) config.out_dir = o.out_dir;
  return config;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int cmd_train(const CommonOpts& common, int grid_index, std::int64_t steps,
              double lr, bool lr_set, std::int64_t eval_syndromes,
              const std::string& init_path) {
  qrl::RunConfig config = resolve_config(common);
  const auto grid = qrl::grid_for(config);
  if (grid_index < 0 || grid_index >= static_cast<int>(grid.size())) {
    throw std::runtime_error("--grid-index out of range (grid has " +
                             std::to_string(grid.size()) + " points)");
  }
  qrl::HyperParamPoint hp = grid[static_cast<std::size_t>(grid_index)];
  if (steps >= 0) config.fixed.max_training_steps = steps;
  if (lr_set) hp.learning_rate = lr;

  qrl::FixedParams fixed = config.fixed;
  fixed.volume_depth = config.depth;
  const qrl::TrainEnvConfig env = qrl::env_config(config);

  std::optional<qrl::LoadedAgent> init;
  if (!init_path.empty()) init = qrl::load_agent(init_path);

  qrl::TrainResult result =
      qrl::train_agent(env, hp, fixed, config.seed, init ? &*init : nullptr);

  if (eval_syndromes > 0) {
    qrl::EvalConfig ecfg;
    ecfg.distance = config.distance;
    ecfg.noise = env.noise(config.depth);
    ecfg.seed = qrl::Rng(config.seed).child(1000000 + grid_index).seed();
    ecfg.step_cap = static_cast<std::uint64_t>(config.eval_step_cap);
    ecfg.min_syndromes = static_cast<std::uint64_t>(eval_syndromes);
    ecfg.agent_id = "train-" + std::to_string(grid_index);
    result.record.evaluation =
        qrl::default_network_evaluator()(result.network, ecfg);
  }

  const std::string log = qrl::train_record_jsonl(result.record);
  std::filesystem::create_directories(config.out_dir);
  const std::filesystem::path out(config.out_dir);
  write_text(out / "train_log.jsonl", log);
  write_text(out / "config.json", qrl::config_to_json(config));
  qrl::save_agent((out / "agent.ckpt").string(), result.meta, result.network,
                  &result.memory);

  // Echo the summary line (the log's last line) for quick inspection.
  const auto cut = log.find_last_of('\n', log.size() - 2);
  std::cout << log.substr(cut == std::string::npos ? 0 : cut + 1);
  std::cerr << "wrote " << (out / "agent.ckpt").string() << " and train_log.jsonl\n";
  return 0;
}

int cmd_sweep(const CommonOpts& common, int workers) {
  qrl::RunConfig config = resolve_config(common);
  if (workers > 0) config.workers = workers;
  qrl::CurriculumConfig cur = qrl::curriculum_config(config);

  std::filesystem::create_directories(config.out_dir);
  write_text(std::filesystem::path(config.out_dir) / "config.json",
             qrl::config_to_json(config));

  const qrl::CurriculumResult result =
      qrl::run_curriculum(cur, qrl::default_network_evaluator());

  std::vector<qrl::EvalReport> reports;
  for (const auto& stage : result.stages) {
    reports.push_back(stage.report);
    std::cout << "stage " << stage.stage << "  p=" << stage.error_rate
              << "  winner=grid-" << stage.ranking.winner_index
              << "  mean_lifetime=" << stage.report.mean_lifetime
              << "  baseline=" << stage.report.baseline_lifetime << "\n";
  }
  if (result.stopped_by_baseline) {
    std::cout << "stopped: winner fell below the single-qubit baseline\n";
  }
  const auto csv_path = std::filesystem::path(config.out_dir) / "sweep.csv";
  write_text(csv_path, qrl::eval_reports_csv(reports));
  std::cerr << "wrote " << csv_path.string() << "\n";
  return 0;
}

int cmd_evaluate(const CommonOpts& common, const std::string& ckpt_path,
                 std::vector<double> rates, std::int64_t min_syndromes,
                 std::int64_t step_cap) {
  qrl::RunConfig config = resolve_config(common);
  const qrl::LoadedAgent agent = qrl::load_agent(ckpt_path);
  if (common.distance_opt->count() > 0 && common.distance != agent.meta.distance) {
    throw std::runtime_error("--distance " + std::to_string(common.distance) +
                             " does not match the checkpoint (d=" +
                             std::to_string(agent.meta.distance) + ")");
  }
  if (rates.empty()) rates.push_back(config.p);
  if (min_syndromes > 0) config.report_min_syndromes = min_syndromes;
  if (step_cap > 0) config.eval_step_cap = step_cap;

  qrl::GreedyNetworkAgent greedy(agent.network);
  std::vector<qrl::EvalReport> reports;
  std::string jsonl;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    qrl::EvalConfig ecfg;
    ecfg.distance = agent.meta.distance;
    ecfg.noise.model = agent.meta.model;
    ecfg.noise.p_phys = rates[i];
    ecfg.noise.p_meas = rates[i];
    ecfg.noise.volume_depth = agent.meta.volume_depth;
    ecfg.seed = qrl::Rng(config.seed).child(i).seed();
    ecfg.step_cap = static_cast<std::uint64_t>(config.eval_step_cap);
    ecfg.min_syndromes = static_cast<std::uint64_t>(config.report_min_syndromes);
    ecfg.agent_id = std::filesystem::path(ckpt_path).filename().string();
    reports.push_back(qrl::evaluate_agent(greedy, ecfg));
    jsonl += qrl::eval_report_json(reports.back()) + "\n";
  }

  const std::string csv = qrl::eval_reports_csv(reports);
  std::cout << csv;
  if (common.out_opt->count() > 0) {
    std::filesystem::create_directories(config.out_dir);
    const std::filesystem::path out(config.out_dir);
    write_text(out / "evaluate.csv", csv);
    write_text(out / "evaluate.jsonl", jsonl);
    std::cerr << "wrote " << (out / "evaluate.csv").string() << " and evaluate.jsonl\n";
  }
  return 0;
}

int cmd_referee_check(const CommonOpts& common, int max_weight) {
  const qrl::RunConfig config = resolve_config(common);
  const qrl::CodeLayout layout = qrl::CodeLayout::build(config.distance);
  const qrl::MatchingReferee referee(layout);
  if (max_weight < 0) max_weight = (config.distance - 1) / 2;
  const qrl::SweepResult result =
      qrl::sweep_low_weight_errors(layout, referee, max_weight);
  std::cout << "d=" << config.distance << " weight<=" << max_weight << ": checked "
            << result.checked << " errors, " << result.failures << " failures\n";
  return result.failures == 0 ? 0 : kExitCheckFailed;
}

int cmd_dump_layout(const CommonOpts& common) {
  const qrl::RunConfig config = resolve_config(common);
  const qrl::CodeLayout layout = qrl::CodeLayout::build(config.distance);
  std::cout << layout.to_json() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"surface-code decoding agents: training, evaluation, referee checks"};
  app.require_subcommand(1);

  CommonOpts train_opts, sweep_opts, eval_opts, referee_opts, layout_opts;

  auto* train = app.add_subcommand("train", "train a single grid point");
  add_common(train, train_opts);
  int grid_index = 0;
  std::int64_t train_steps = -1;
  double lr = 0.0;
  std::int64_t eval_syndromes = 0;
  std::string init_path;
  train->add_option("--grid-index", grid_index, "index into the preset grid");
  train->add_option("--steps", train_steps, "override max training steps");
  auto* lr_opt = train->add_option("--lr", lr, "override learning rate");
  train->add_option("--eval-syndromes", eval_syndromes,
                    "evaluate after training over at least this many syndromes");
  train->add_option("--init", init_path, "checkpoint to initialize from");

  auto* sweep = app.add_subcommand("sweep", "run the error-rate curriculum");
  add_common(sweep, sweep_opts);
  int workers = 0;
  sweep->add_option("--workers", workers, "parallel grid workers");

  auto* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint");
  add_common(evaluate, eval_opts);
  std::string ckpt_path;
  std::vector<double> rates;
  std::int64_t min_syndromes = 0;
  std::int64_t step_cap = 0;
  evaluate->add_option("--ckpt", ckpt_path, "agent checkpoint")->required();
  evaluate->add_option("--rates", rates, "error rates to sweep (overrides --p)");
  evaluate->add_option("--min-syndromes", min_syndromes,
                       "minimum syndromes per rate (default 1000000)");
  evaluate->add_option("--step-cap", step_cap, "episode step cap");

  auto* referee = app.add_subcommand("referee-check",
                                     "exhaustive low-weight error sweep");
  add_common(referee, referee_opts);
  int max_weight = -1;
  referee->add_option("--max-weight", max_weight,
                      "maximum error weight (default (d-1)/2)");

  auto* layout = app.add_subcommand("dump-layout", "print the code layout as JSON");
  add_common(layout, layout_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      return cmd_train(train_opts, grid_index, train_steps, lr,
                       lr_opt->count() > 0, eval_syndromes, init_path);
    }
    if (sweep->parsed()) return cmd_sweep(sweep_opts, workers);
    if (evaluate->parsed()) {
      return cmd_evaluate(eval_opts, ckpt_path, rates, min_syndromes, step_cap);
    }
    if (referee->parsed()) return cmd_referee_check(referee_opts, max_weight);
    if (layout->parsed()) return cmd_dump_layout(layout_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
