#include "sumrecom/policy.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "sumrecom/error.hpp"
#include "sumrecom/preflearn.hpp"

namespace sumrecom {

DraftState initial_state(int L) {
  if (L < 1) fail(ErrorCode::kValidation, "summary length limit must be at least 1");
  return DraftState{{}, L - 1, false};
}

std::vector<Action> actions(const DraftState& state, const DocumentCluster& cluster) {
  if (state.terminated) fail(ErrorCode::kPrecondition, "no actions from a terminated draft");
  std::vector<Action> out{{true, -1}};
  for (const auto& s : cluster.sentences) {
    const bool used = std::find(state.chosen_sentence_ids.begin(), state.chosen_sentence_ids.end(),
                                s.index_in_cluster) != state.chosen_sentence_ids.end();
    if (!used && s.length <= state.remaining_budget) out.push_back({false, s.index_in_cluster});
  }
  return out;
}

DraftState apply_action(const DraftState& state, const Action& action,
                        const DocumentCluster& cluster) {
  if (state.terminated) fail(ErrorCode::kPrecondition, "draft already terminated");
  DraftState next = state;
  if (action.terminate) {
    next.terminated = true;
    return next;
  }
  const auto& s = cluster.sentences.at(static_cast<std::size_t>(action.sentence));
  if (s.length > state.remaining_budget) fail(ErrorCode::kValidation, "sentence does not fit");
  next.chosen_sentence_ids.push_back(action.sentence);
  next.remaining_budget -= s.length;
  return next;
}

Summary draft_summary(const DraftState& state, const DocumentCluster& cluster,
                      const ConceptWeights& weights) {
  return make_summary(cluster, state.chosen_sentence_ids, weights);
}

double episode_reward(const DraftState& state, const DocumentCluster& cluster,
                      const ConceptWeights& weights, const SummaryReward& reward) {
  if (!state.terminated) return 0.0;
  return reward(draft_summary(state, cluster, weights));
}

std::vector<double> softmax(const std::vector<double>& values, double temperature) {
  if (values.empty()) return {};
  if (!(temperature > 0.0)) fail(ErrorCode::kValidation, "temperature must be positive");
  const double hi = *std::max_element(values.begin(), values.end());
  std::vector<double> p(values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    p[i] = std::exp((values[i] - hi) / temperature);
    total += p[i];
  }
  for (double& x : p) x /= total;
  return p;
}

namespace {

std::size_t argmax_first(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::size_t sample(const std::vector<double>& probs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (r < acc) return i;
  }
  return probs.size() - 1;
}

double temperature_at(const PolicyOptions& o, int episode) {
  if (o.episodes <= 1) return o.final_temperature;
  const double t = static_cast<double>(episode) / (o.episodes - 1);
  return o.initial_temperature + t * (o.final_temperature - o.initial_temperature);
}

// Bandit features: the summary's own features followed by a one-hot pool slot.
std::vector<double> bandit_row(const PolicyInputs& in, std::size_t i) {
  std::vector<double> row = (*in.pool_features)[i];
  const std::size_t n = in.pool->summaries.size();
  row.resize(row.size() + n, 0.0);
  row[row.size() - n + i] = 1.0;
  return row;
}

std::vector<std::vector<double>> bandit_rows(const PolicyInputs& in) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < in.pool->summaries.size(); ++i) rows.push_back(bandit_row(in, i));
  return rows;
}

void check_bandit(const PolicyInputs& in) {
  if (!in.pool || in.pool->summaries.empty()) {
    fail(ErrorCode::kValidation, "policy training needs a nonempty summary pool");
  }
  if (!in.pool_features || in.pool_features->size() != in.pool->summaries.size()) {
    fail(ErrorCode::kValidation, "pool features missing or misaligned");
  }
}

// Afterstate features for sequential mode: draft features, marginal concept
// gain of the last action, terminal flag, bias.
std::vector<double> afterstate(const PolicyInputs& in, const DraftState& s, double gain) {
  auto f = in.featurize(draft_summary(s, *in.cluster, in.concept_weights));
  f.push_back(gain);
  f.push_back(s.terminated ? 1.0 : 0.0);
  f.push_back(1.0);
  return f;
}

struct Candidate {
  DraftState next;
  std::vector<double> features;
};

std::vector<Candidate> expand(const PolicyInputs& in, const DraftState& s) {
  const double base = draft_summary(s, *in.cluster, in.concept_weights).score;
  std::vector<Candidate> out;
  for (const auto& a : actions(s, *in.cluster)) {
    auto next = apply_action(s, a, *in.cluster);
    const double gain = a.terminate ? 0.0 : draft_summary(next, *in.cluster, in.concept_weights).score - base;
    out.push_back({next, afterstate(in, next, gain)});
  }
  return out;
}

DraftState greedy_rollout(const PolicyModel& m, const PolicyInputs& in) {
  DraftState s = initial_state(in.L);
  while (!s.terminated) {
    auto cands = expand(in, s);
    std::vector<double> q;
    for (const auto& c : cands) q.push_back(dot(m.weights, c.features));
    s = cands[argmax_first(q)].next;
  }
  return s;
}

PolicyResult train_bandit(const PolicyInputs& in, const PolicyOptions& o) {
  check_bandit(in);
  const auto rows = bandit_rows(in);
  const std::size_t n = rows.size();
  std::vector<double> rewards(n);
  for (std::size_t i = 0; i < n; ++i) rewards[i] = in.reward(in.pool->summaries[i]);

  PolicyResult result;
  result.model.mode = PolicyMode::kBandit;
  result.model.weights.assign(rows.front().size(), 0.0);
  std::mt19937_64 rng(o.seed);
  const int every = std::max(1, o.episodes / std::max(1, o.checkpoints));
  std::vector<double> q(n);
  for (int e = 0; e < o.episodes; ++e) {
    auto& w = result.model.weights;
    for (std::size_t i = 0; i < n; ++i) q[i] = dot(w, rows[i]);
    result.model.temperature = temperature_at(o, e);
    const std::size_t pick = sample(softmax(q, result.model.temperature), rng);
    // Single-step episode: the TD target is the terminal reward.
    const double delta = rewards[pick] - q[pick];
    for (std::size_t k = 0; k < w.size(); ++k) w[k] += o.learning_rate * delta * rows[pick][k];
    if ((e + 1) % every == 0 || e + 1 == o.episodes) {
      for (std::size_t i = 0; i < n; ++i) q[i] = dot(w, rows[i]);
      result.curve.push_back({e + 1, rewards[argmax_first(q)]});
    }
  }
  return result;
}

PolicyResult train_sequential(const PolicyInputs& in, const PolicyOptions& o) {
  if (!in.cluster || in.cluster->sentences.empty()) {
    fail(ErrorCode::kValidation, "policy training needs a nonempty sentence set");
  }
  if (!in.featurize) fail(ErrorCode::kValidation, "sequential mode needs a draft featurizer");
  PolicyResult result;
  result.model.mode = PolicyMode::kSequential;
  std::mt19937_64 rng(o.seed);
  const int every = std::max(1, o.episodes / std::max(1, o.checkpoints));
  for (int e = 0; e < o.episodes; ++e) {
    result.model.temperature = temperature_at(o, e);
    DraftState s = initial_state(in.L);
    std::vector<double> phi;  // features of the current afterstate
    while (!s.terminated) {
      auto cands = expand(in, s);
      auto& w = result.model.weights;
      if (w.empty()) w.assign(cands.front().features.size(), 0.0);
      std::vector<double> q;
      for (const auto& c : cands) q.push_back(dot(w, c.features));
      const std::size_t pick = sample(softmax(q, result.model.temperature), rng);
      if (!phi.empty()) {
        const double delta = q[pick] - dot(w, phi);
        for (std::size_t k = 0; k < w.size(); ++k) w[k] += o.learning_rate * delta * phi[k];
      }
      phi = cands[pick].features;
      s = cands[pick].next;
    }
    auto& w = result.model.weights;
    const double r = episode_reward(s, *in.cluster, in.concept_weights, in.reward);
    const double delta = r - dot(w, phi);
    for (std::size_t k = 0; k < w.size(); ++k) w[k] += o.learning_rate * delta * phi[k];
    if ((e + 1) % every == 0 || e + 1 == o.episodes) {
      auto g = greedy_rollout(result.model, in);
      result.curve.push_back({e + 1, episode_reward(g, *in.cluster, in.concept_weights, in.reward)});
    }
  }
  return result;
}

}  // namespace

PolicyResult train_policy(const PolicyInputs& inputs, const PolicyOptions& options) {
  if (options.episodes < 1) fail(ErrorCode::kValidation, "episodes must be at least 1");
  if (!inputs.reward) fail(ErrorCode::kValidation, "policy training needs a reward");
  return options.mode == PolicyMode::kBandit ? train_bandit(inputs, options)
                                             : train_sequential(inputs, options);
}

std::vector<double> pool_distribution(const PolicyModel& model, const PolicyInputs& inputs) {
  check_bandit(inputs);
  const auto rows = bandit_rows(inputs);
  std::vector<double> q;
  for (const auto& r : rows) {
    q.push_back(model.weights.empty() ? 0.0 : dot(model.weights, r));
  }
  return softmax(q, model.temperature);
}

std::size_t best_pool_index(const PolicyModel& model, const PolicyInputs& inputs) {
  check_bandit(inputs);
  const auto rows = bandit_rows(inputs);
  std::vector<double> q;
  for (const auto& r : rows) q.push_back(model.weights.empty() ? 0.0 : dot(model.weights, r));
  return argmax_first(q);
}

Summary best_summary(const PolicyModel& model, const PolicyInputs& inputs) {
  if (model.mode == PolicyMode::kBandit) {
    return inputs.pool->summaries[best_pool_index(model, inputs)];
  }
  auto s = greedy_rollout(model, inputs);
  auto ids = s.chosen_sentence_ids;
  std::sort(ids.begin(), ids.end());
  return make_summary(*inputs.cluster, ids, inputs.concept_weights);
}

std::string learning_curve_csv(const std::vector<LearningCurvePoint>& curve) {
  std::ostringstream out;
  out.precision(17);
  out << "episode,greedy_value\n";
  for (const auto& p : curve) out << p.episode << ',' << p.greedy_value << '\n';
  return out.str();
}

}  // namespace sumrecom
