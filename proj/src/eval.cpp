#include "qrl/eval.hpp"

#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace qrl {

Action GreedyNetworkAgent::act(const Environment& env) {
  if (actions_.empty()) {
    actions_ = action_space(env.layout(), env.noise().model);
    if (static_cast<int>(actions_.size()) != net_.spec().n_actions) {
      throw std::invalid_argument("agent network does not match the action space");
    }
  }
  const std::vector<float> q =
      net_.predict(to_network_input<float>(encode_state(env.layout(), env.state())));
  int best = 0;
  for (int a = 1; a < static_cast<int>(q.size()); ++a) {
    if (q[a] > q[best]) best = a;
  }
  return actions_[best];
}

Action RequestAgent::act(const Environment&) { return Action::request(); }

Action OracleAgent::act(const Environment& env) {
  const PauliFrame& frame = env.hidden_frame();
  for (int q = 0; q < frame.n_qubits(); ++q) {
    if (frame.x_flips[q]) return Action::flip(PauliAxis::kX, q);
  }
  for (int q = 0; q < frame.n_qubits(); ++q) {
    if (frame.z_flips[q]) return Action::flip(PauliAxis::kZ, q);
  }
  return Action::request();
}

EpisodeResult decode_episode(Agent& agent, Environment& env) {
  // Volume accounting is cumulative in the environment, so an episode's
  // lifetime is the delta across it (reset volume included).
  const std::uint64_t before = env.syndromes_seen();
  env.reset();
  while (true) {
    const StepOutcome out = env.step(agent.act(env));
    if (out.terminal) return {env.syndromes_seen() - before, false};
    if (out.truncated) return {env.syndromes_seen() - before, true};
  }
}

double baseline_lifetime(double p) {
  if (p <= 0.0 || p > 1.0) {
    throw std::invalid_argument("baseline rate must be in (0, 1]");
  }
  return 1.0 / p;
}

EvalReport aggregate_episodes(const std::vector<EpisodeResult>& episodes,
                              const EvalConfig& config) {
  if (episodes.empty()) {
    throw std::invalid_argument("cannot aggregate zero episodes");
  }
  EvalReport report;
  report.error_rate = config.noise.p_phys;
  report.episodes = episodes.size();
  report.seed = config.seed;
  report.agent_id = config.agent_id;
  report.baseline_lifetime = baseline_lifetime(config.noise.p_phys);
  for (const EpisodeResult& e : episodes) {
    report.total_syndromes_seen += e.lifetime;
    report.cap_hits += e.censored ? 1 : 0;
  }
  const double n = static_cast<double>(report.episodes);
  report.mean_lifetime = static_cast<double>(report.total_syndromes_seen) / n;
  if (report.episodes > 1) {
    double ss = 0.0;
    for (const EpisodeResult& e : episodes) {
      const double d = static_cast<double>(e.lifetime) - report.mean_lifetime;
      ss += d * d;
    }
    report.standard_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return report;
}

EvalReport evaluate_agent(Agent& agent, const EvalConfig& config) {
  if (config.min_syndromes < 10000) {
    throw std::invalid_argument("min_syndromes must be at least 10^4");
  }
  config.noise.validate();
  const CodeLayout layout = CodeLayout::build(config.distance);
  const auto referee = std::make_shared<MatchingReferee>(layout);
  const Rng root(config.seed);
  std::vector<EpisodeResult> episodes;
  std::uint64_t total = 0;
  for (std::uint64_t ep = 0; total < config.min_syndromes; ++ep) {
    Environment env(layout, config.noise, root.child(ep).seed(), config.step_cap,
                    referee);
    const EpisodeResult r = decode_episode(agent, env);
    total += r.lifetime;
    episodes.push_back(r);
  }
  return aggregate_episodes(episodes, config);
}

std::string eval_report_json(const EvalReport& report) {
  nlohmann::json j;
  j["error_rate"] = report.error_rate;
  j["episodes"] = report.episodes;
  j["total_syndromes_seen"] = report.total_syndromes_seen;
  j["mean_lifetime"] = report.mean_lifetime;
  j["standard_error"] = report.standard_error;
  j["baseline_lifetime"] = report.baseline_lifetime;
  j["cap_hits"] = report.cap_hits;
  j["mean_is_lower_bound"] = report.mean_is_lower_bound();
  j["seed"] = report.seed;
  j["agent_id"] = report.agent_id;
  return j.dump();
}

std::string eval_reports_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  out << "p,mean_lifetime,stderr,baseline\n";
  out.precision(12);
  for (const EvalReport& r : reports) {
    out << r.error_rate << ',' << r.mean_lifetime << ',' << r.standard_error
        << ',' << r.baseline_lifetime << '\n';
  }
  return out.str();
}

}  // namespace qrl
