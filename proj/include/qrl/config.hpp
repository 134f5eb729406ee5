#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qrl/noise.hpp"
#include "qrl/trainer.hpp"

namespace qrl {

// Versioned run configuration: the single document behind every CLI
// subcommand. Defaults describe the desk preset; apply_preset() switches
// between the desk sub-grid and the full Table-I campaign.
inline constexpr int kConfigVersion = 1;

struct RunConfig {
  int distance = 3;
  NoiseModel model = NoiseModel::kBitFlip;
  double p = 5e-3;  // p_phys = p_meas for both training and evaluation
  int depth = 5;    // syndromes per volume
  std::uint64_t seed = 1;

  // "desk" | "paper" | "custom"; custom uses the explicit grid below.
  std::string preset = "desk";
  std::vector<HyperParamPoint> grid;

  FixedParams fixed;
  std::int64_t episode_step_cap = 100000;

  // Curriculum ladder (sweep): p_start, p_start + p_increment, ... <= p_final.
  double p_start = 5e-3;
  double p_increment = 2e-3;
  double p_final = 5e-3;

  std::int64_t rank_min_syndromes = 100000;    // per-point ranking budget
  std::int64_t report_min_syndromes = 1000000; // winner reporting budget
  std::int64_t eval_step_cap = 100000;
  int workers = 1;
  std::string out_dir = "runs/out";

  bool operator==(const RunConfig&) const = default;
};

// Overwrites the preset-controlled fields; throws on an unknown name.
void apply_preset(RunConfig& config, const std::string& name);

// The hyper-parameter grid this config asks for. "custom" requires a
// non-empty explicit grid.
std::vector<HyperParamPoint> grid_for(const RunConfig& config);

TrainEnvConfig env_config(const RunConfig& config);
CurriculumConfig curriculum_config(const RunConfig& config);

// JSON round trip. Parsing is strict: unknown keys and version mismatches
// are rejected so config typos fail loudly instead of silently defaulting.
std::string config_to_json(const RunConfig& config);
RunConfig config_from_json(const std::string& text);
RunConfig load_config(const std::string& path);
void save_config(const std::string& path, const RunConfig& config);

}  // namespace qrl
