#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sumrecom/config.hpp"
#include "sumrecom/session.hpp"
#include "sumrecom/simuser.hpp"

namespace sumrecom {

/// Builds the simulated user for a cluster carrying the full feature schema.
using UserFactory = std::function<GroundTruthUser(const DocumentCluster&)>;

/// Planted-importance user for generated clusters.
UserFactory planted_user(const SyntheticInput& raw, const SyntheticSpec& spec, double noise,
                         std::uint64_t seed);

/// Reference-driven user for ingested clusters: U(c) counts occurrences of the
/// concept's tokens in the references, plus a distinct jitter.
UserFactory reference_user(double noise, std::uint64_t seed);
GroundTruthUser make_reference_user(const DocumentCluster& cluster, double noise,
                                    std::uint64_t seed);

struct SimulationOptions {
  bool track_drafts = false;
};

struct SimulationResult {
  Summary final_summary;
  nlohmann::json final_json;
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rougeL = 0.0;
  double ground_truth = 0.0;
  double kendall_tau = 0.0;
  int rounds = 0;
  std::vector<double> draft_rouge1;  // after each answered query
  double oracle_draft_rouge1 = 0.0;  // draft under the true ranking
  std::vector<Event> log;
};

/// Runs the whole interactive loop against the simulated user and expert,
/// through the same Session engine the HTTP service uses.
SimulationResult run_simulation(const ClusterInput& input,
                                const std::optional<EmbeddingTable>& embeddings,
                                const RunConfig& config, const UserFactory& make_user,
                                const SimulationOptions& options = {});

/// First answered-query count from which the draft ROUGE-1 never falls more
/// than `tolerance` below `oracle` (the convergence target); budget + 1 when
/// that never happens.
int rounds_to_convergence(const std::vector<double>& draft_rouge1, double oracle, double tolerance);

nlohmann::json metrics_json(const SimulationResult& result, const RunConfig& config);

/// Drives a Session with scripted simulated answers; shared by the offline
/// pipeline and the tests that exercise the service.
void answer_concept_queries(Session& session, const GroundTruthUser& user,
                            const std::function<void(Session&)>& after_each = {});
void answer_summary_queries(Session& session, const GroundTruthReward& expert);

}  // namespace sumrecom
