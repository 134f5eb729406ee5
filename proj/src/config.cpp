#include "qrl/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace qrl {

namespace {

nlohmann::json hp_to_json(const HyperParamPoint& hp) {
  return {{"initial_epsilon", hp.initial_epsilon},
          {"final_epsilon", hp.final_epsilon},
          {"exploration_steps", hp.exploration_steps},
          {"learning_rate", hp.learning_rate},
          {"target_update_freq", hp.target_update_freq}};
}

HyperParamPoint hp_from_json(const nlohmann::json& doc) {
  HyperParamPoint hp;
  hp.initial_epsilon = doc.at("initial_epsilon").get<double>();
  hp.final_epsilon = doc.at("final_epsilon").get<double>();
  hp.exploration_steps = doc.at("exploration_steps").get<std::int64_t>();
  hp.learning_rate = doc.at("learning_rate").get<double>();
  hp.target_update_freq = doc.at("target_update_freq").get<std::int64_t>();
  return hp;
}

// Rejects keys outside `allowed` so a misspelled option cannot silently
// fall back to its default.
void check_keys(const nlohmann::json& doc, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (allowed.count(it.key()) == 0) {
      throw std::invalid_argument("unknown config key " + where + "." + it.key());
    }
  }
}

}  // namespace

void apply_preset(RunConfig& config, const std::string& name) {
  if (name == "desk") {
    config.preset = "desk";
    config.distance = 3;
    config.model = NoiseModel::kBitFlip;
    config.p = 5e-3;
    config.p_start = 5e-3;
    config.p_increment = 2e-3;
    config.p_final = 5e-3;  // single stage
    config.fixed.max_training_steps = 200000;
    config.rank_min_syndromes = 100000;
    config.report_min_syndromes = 1000000;
  } else if (name == "paper") {
    config.preset = "paper";
    config.distance = 5;
    config.p = 1e-3;
    config.p_start = 1e-3;
    config.p_increment = 2e-3;
    config.p_final = 1.5e-2;
    config.fixed.max_training_steps = 1000000;
    config.rank_min_syndromes = 1000000;
    config.report_min_syndromes = 1000000;
  } else {
    throw std::invalid_argument("unknown preset: " + name +
                                " (expected desk or paper)");
  }
}

std::vector<HyperParamPoint> grid_for(const RunConfig& config) {
  if (config.preset == "desk") return desk_grid();
  if (config.preset == "paper") return full_grid();
  if (config.preset == "custom") {
    if (config.grid.empty()) {
      throw std::invalid_argument("custom preset requires a non-empty grid");
    }
    return config.grid;
  }
  throw std::invalid_argument("unknown preset: " + config.preset);
}

TrainEnvConfig env_config(const RunConfig& config) {
  TrainEnvConfig env;
  env.distance = config.distance;
  env.model = config.model;
  env.error_rate = config.p;
  env.episode_step_cap = config.episode_step_cap;
  return env;
}

CurriculumConfig curriculum_config(const RunConfig& config) {
  CurriculumConfig cur;
  cur.p_start = config.p_start;
  cur.p_increment = config.p_increment;
  cur.p_final = config.p_final;
  cur.env = env_config(config);
  cur.fixed = config.fixed;
  cur.fixed.volume_depth = config.depth;
  cur.grid = grid_for(config);
  cur.base_seed = config.seed;
  cur.workers = config.workers;
  cur.rank_min_syndromes = config.rank_min_syndromes;
  cur.report_min_syndromes = config.report_min_syndromes;
  cur.eval_step_cap = config.eval_step_cap;
  cur.out_dir = config.out_dir;
  return cur;
}

std::string config_to_json(const RunConfig& config) {
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& hp : config.grid) grid.push_back(hp_to_json(hp));
  nlohmann::json doc = {
      {"version", kConfigVersion},
      {"distance", config.distance},
      {"noise", noise_model_name(config.model)},
      {"p", config.p},
      {"depth", config.depth},
      {"seed", config.seed},
      {"preset", config.preset},
      {"grid", grid},
      {"fixed",
       {{"batch_size", config.fixed.batch_size},
        {"rolling_window", config.fixed.rolling_window},
        {"patience", config.fixed.patience},
        {"max_training_steps", config.fixed.max_training_steps},
        {"memory_capacity", config.fixed.memory_capacity},
        {"gamma", config.fixed.gamma}}},
      {"episode_step_cap", config.episode_step_cap},
      {"curriculum",
       {{"p_start", config.p_start},
        {"p_increment", config.p_increment},
        {"p_final", config.p_final}}},
      {"rank_min_syndromes", config.rank_min_syndromes},
      {"report_min_syndromes", config.report_min_syndromes},
      {"eval_step_cap", config.eval_step_cap},
      {"workers", config.workers},
      {"out_dir", config.out_dir}};
  return doc.dump(2) + "\n";
}

RunConfig config_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
  check_keys(doc,
             {"version", "distance", "noise", "p", "depth", "seed", "preset",
              "grid", "fixed", "episode_step_cap", "curriculum",
              "rank_min_syndromes", "report_min_syndromes", "eval_step_cap",
              "workers", "out_dir"},
             "config");
  if (!doc.contains("version")) {
    throw std::invalid_argument("config is missing the version field");
  }
  const int version = doc.at("version").get<int>();
  if (version != kConfigVersion) {
    throw std::invalid_argument("unsupported config version " +
                                std::to_string(version) + " (expected " +
                                std::to_string(kConfigVersion) + ")");
  }

  RunConfig config;
  if (doc.contains("preset")) {
    const auto preset = doc.at("preset").get<std::string>();
    if (preset != "custom") apply_preset(config, preset);
    config.preset = preset;
  }
  if (doc.contains("distance")) config.distance = doc.at("distance").get<int>();
  if (doc.contains("noise")) {
    config.model = noise_model_from_name(doc.at("noise").get<std::string>());
  }
  if (doc.contains("p")) config.p = doc.at("p").get<double>();
  if (doc.contains("depth")) config.depth = doc.at("depth").get<int>();
  if (doc.contains("seed")) config.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("grid")) {
    config.grid.clear();
    for (const auto& item : doc.at("grid")) config.grid.push_back(hp_from_json(item));
  }
  if (doc.contains("fixed")) {
    const auto& f = doc.at("fixed");
    check_keys(f,
               {"batch_size", "rolling_window", "patience", "max_training_steps",
                "memory_capacity", "gamma"},
               "fixed");
    if (f.contains("batch_size")) config.fixed.batch_size = f.at("batch_size").get<int>();
    if (f.contains("rolling_window")) {
      config.fixed.rolling_window = f.at("rolling_window").get<std::int64_t>();
    }
    if (f.contains("patience")) config.fixed.patience = f.at("patience").get<std::int64_t>();
    if (f.contains("max_training_steps")) {
      config.fixed.max_training_steps = f.at("max_training_steps").get<std::int64_t>();
    }
    if (f.contains("memory_capacity")) {
      config.fixed.memory_capacity = f.at("memory_capacity").get<std::int64_t>();
    }
    if (f.contains("gamma")) config.fixed.gamma = f.at("gamma").get<double>();
  }
  if (doc.contains("episode_step_cap")) {
    config.episode_step_cap = doc.at("episode_step_cap").get<std::int64_t>();
  }
  if (doc.contains("curriculum")) {
    const auto& c = doc.at("curriculum");
    check_keys(c, {"p_start", "p_increment", "p_final"}, "curriculum");
    if (c.contains("p_start")) config.p_start = c.at("p_start").get<double>();
    if (c.contains("p_increment")) config.p_increment = c.at("p_increment").get<double>();
    if (c.contains("p_final")) config.p_final = c.at("p_final").get<double>();
  }
  if (doc.contains("rank_min_syndromes")) {
    config.rank_min_syndromes = doc.at("rank_min_syndromes").get<std::int64_t>();
  }
  if (doc.contains("report_min_syndromes")) {
    config.report_min_syndromes = doc.at("report_min_syndromes").get<std::int64_t>();
  }
  if (doc.contains("eval_step_cap")) {
    config.eval_step_cap = doc.at("eval_step_cap").get<std::int64_t>();
  }
  if (doc.contains("workers")) config.workers = doc.at("workers").get<int>();
  if (doc.contains("out_dir")) config.out_dir = doc.at("out_dir").get<std::string>();
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return config_from_json(text);
}

void save_config(const std::string& path, const RunConfig& config) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << config_to_json(config);
}

}  // namespace qrl
