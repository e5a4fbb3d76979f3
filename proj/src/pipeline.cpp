#include "sumrecom/pipeline.hpp"

#include <algorithm>

#include "sumrecom/error.hpp"
#include "sumrecom/text.hpp"

namespace sumrecom {

using nlohmann::json;

UserFactory planted_user(const SyntheticInput& raw, const SyntheticSpec& spec, double noise,
                         std::uint64_t seed) {
  return [importance = raw.word_importance, jitter = spec.jitter, noise,
          seed](const DocumentCluster& cluster) {
    return planted_concept_user(cluster, importance, noise, seed, jitter);
  };
}

GroundTruthUser make_reference_user(const DocumentCluster& cluster, double noise,
                                    std::uint64_t seed) {
  std::vector<std::vector<std::string>> refs;
  for (const auto& r : cluster.references) refs.push_back(text::tokenize(r));
  std::vector<double> counts;
  for (const auto& c : cluster.concepts) {
    double n = 0.0;
    for (const auto& ref : refs) {
      if (c.tokens.empty() || ref.size() < c.tokens.size()) continue;
      for (std::size_t i = 0; i + c.tokens.size() <= ref.size(); ++i) {
        if (std::equal(c.tokens.begin(), c.tokens.end(), ref.begin() + static_cast<long>(i))) n += 1.0;
      }
    }
    counts.push_back(n);
  }
  // Reuse the planted-user construction with a one-column "feature".
  DocumentCluster view;
  view.concepts = cluster.concepts;
  for (std::size_t i = 0; i < view.concepts.size(); ++i) view.concepts[i].features.values = {counts[i]};
  return make_ground_truth_user(view, {1.0}, noise, seed, 1e-3);
}

UserFactory reference_user(double noise, std::uint64_t seed) {
  return [noise, seed](const DocumentCluster& cluster) {
    return make_reference_user(cluster, noise, seed);
  };
}

void answer_concept_queries(Session& session, const GroundTruthUser& user,
                            const std::function<void(Session&)>& after_each) {
  const std::uint64_t base = mix_seed(session.config().seed, 0xa11ce);
  while (true) {
    const json q = session.next_query();
    if (q.at("status") != "pending") break;
    const int left = q["left"]["id"].get<int>();
    const int right = q["right"]["id"].get<int>();
    const int round = q["round"].get<int>();
    const auto rec = answer_preference(user, left, right, mix_seed(base, static_cast<std::uint64_t>(round)), round);
    session.post_feedback(left, right, rec.label);
    if (after_each) after_each(session);
  }
}

void answer_summary_queries(Session& session, const GroundTruthReward& expert) {
  while (session.stage() == Stage::kReward) {
    const auto q = session.pending_summary_query();
    if (q.empty()) fail(ErrorCode::kPrecondition, "reward stage stalled without a query");
    const auto& pool = session.pool().summaries;
    if (q.size() == 2) {
      const auto rec = answer_summary_preference(expert, pool[q[0]], pool[q[1]], session.cluster(),
                                                 static_cast<int>(q[0]), static_cast<int>(q[1]));
      session.post_summary_preference(rec.left_id, rec.right_id, rec.label);
    } else {
      session.post_summary_score(static_cast<int>(q[0]),
                                 score_summary(expert, pool[q[0]], session.cluster()));
    }
  }
}

SimulationResult run_simulation(const ClusterInput& input,
                                const std::optional<EmbeddingTable>& embeddings,
                                const RunConfig& config, const UserFactory& make_user,
                                const SimulationOptions& options) {
  if (input.references.empty()) {
    fail(ErrorCode::kValidation, "simulation needs reference summaries for the expert");
  }
  Session session = Session::create("offline", input, embeddings, config);
  const EmbeddingTable* emb = embeddings ? &*embeddings : nullptr;
  const DocumentCluster full = featurize_concepts(build_cluster(input, config.unit), emb);
  const GroundTruthUser user = make_user(full);
  const auto rouge_opts = rouge_options(config);
  const auto refs = rouge_tokens(input.references);
  auto r1_of = [&](const Summary& s) {
    return rouge_n(rouge_tokens(summary_text(s, session.cluster())), refs, 1, rouge_opts);
  };

  SimulationResult result;
  answer_concept_queries(session, user, [&](Session& s) {
    if (options.track_drafts) result.draft_rouge1.push_back(r1_of(s.draft()));
  });
  result.rounds = static_cast<int>(session.query_state().history.size());
  if (options.track_drafts) {
    GeneratorOptions g;
    g.seed = config.seed;
    result.oracle_draft_rouge1 =
        r1_of(generate_optimal(session.cluster(), rank_weights(user.true_utilities),
                               config.length_limit, g));
  }
  result.kendall_tau = kendall_tau(utilities(session.utility_model(), session.cluster()),
                                   user.true_utilities);

  const auto expert = make_ground_truth_reward(input.references, config.alpha, config.beta,
                                               config.gamma, rouge_opts);
  answer_summary_queries(session, expert);
  if (!session.final_summary()) fail(ErrorCode::kPrecondition, "session did not reach a final summary");

  result.final_summary = *session.final_summary();
  result.final_json = session.summary("final");
  const auto score = rouge(rouge_tokens(summary_text(result.final_summary, session.cluster())), refs,
                           rouge_opts);
  result.rouge1 = score.rouge1;
  result.rouge2 = score.rouge2;
  result.rougeL = score.rougeL;
  result.ground_truth = score_summary(expert, result.final_summary, session.cluster());
  result.log = session.events();
  return result;
}

int rounds_to_convergence(const std::vector<double>& draft, double oracle, double tolerance) {
  int first = static_cast<int>(draft.size()) + 1;
  for (int r = static_cast<int>(draft.size()); r >= 1; --r) {
    if (draft[static_cast<std::size_t>(r - 1)] >= oracle - tolerance) {
      first = r;
    } else {
      break;
    }
  }
  return first;
}

json metrics_json(const SimulationResult& r, const RunConfig& config) {
  return json{{"config", to_json(config)},
              {"rouge1", r.rouge1},
              {"rouge2", r.rouge2},
              {"rougeL", r.rougeL},
              {"ground_truth_value", r.ground_truth},
              {"kendall_tau", r.kendall_tau},
              {"rounds", r.rounds},
              {"events", r.log.size()}};
}

}  // namespace sumrecom
