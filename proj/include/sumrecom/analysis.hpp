#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sumrecom/config.hpp"
#include "sumrecom/simuser.hpp"

namespace sumrecom {

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for one value
  std::size_t n = 0;
};

Stat summarize(const std::vector<double>& values);

/// Header row plus data rows, rendered as CSV.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const;
};

std::string format_number(double v);

struct BudgetRow {
  int budget = 0;
  Stat rouge1, rouge2, ground_truth;
};

std::vector<BudgetRow> run_budget_analysis(const SyntheticSpec& spec, RunConfig config,
                                           const std::vector<int>& budgets,
                                           const std::vector<std::uint64_t>& seeds);
Table budget_table(const std::vector<BudgetRow>& rows);

struct StrategyRow {
  Strategy strategy = Strategy::kHeuristic;
  Stat rouge1, rouge2, kendall_tau;
};

std::vector<StrategyRow> run_strategy_analysis(const SyntheticSpec& spec, RunConfig config,
                                               const std::vector<Strategy>& strategies,
                                               const std::vector<std::uint64_t>& seeds);
Table strategy_table(const std::vector<StrategyRow>& rows);

struct UnitRow {
  ConceptUnit unit = ConceptUnit::kUnigram;
  Stat rounds_to_converge, rouge1, concepts;
};

std::vector<UnitRow> run_unit_analysis(const SyntheticSpec& spec, RunConfig config,
                                       const std::vector<ConceptUnit>& units,
                                       const std::vector<std::uint64_t>& seeds,
                                       double tolerance = 0.02);
Table unit_table(const std::vector<UnitRow>& rows);

/// Concept features in the order the feature analysis adds them.
const std::vector<std::string>& feature_importance_order();

struct FeatureRow {
  int requested = 0;
  int used = 0;  // requested clamped to the schema size
  Stat rouge1, kendall_tau;
};

std::vector<FeatureRow> run_feature_analysis(const SyntheticSpec& spec, RunConfig config,
                                             const std::vector<int>& sizes,
                                             const std::vector<std::uint64_t>& seeds);
Table feature_table(const std::vector<FeatureRow>& rows);

struct AblationRow {
  Variant variant = Variant::kFull;
  Stat ground_truth, rouge1, rouge2;
};

std::vector<AblationRow> run_ablation(const SyntheticSpec& spec, RunConfig config,
                                      const std::vector<Variant>& variants,
                                      const std::vector<std::uint64_t>& seeds);
Table ablation_table(const std::vector<AblationRow>& rows);

struct OracleRow {
  std::uint64_t seed = 0;
  double bound = 0.0;
};

std::vector<OracleRow> run_oracle_bounds(const SyntheticSpec& spec, const RunConfig& config,
                                         const std::vector<std::uint64_t>& seeds);
Table oracle_table(const std::vector<OracleRow>& rows);

/// Seeds base, base+1, ..., base+count-1.
std::vector<std::uint64_t> seed_range(std::uint64_t base, int count);

/// Runs a named analysis (budget, strategy, unit, feature, ablation, oracle)
/// with its default grid; unknown names are a validation error.
Table run_named_analysis(const std::string& name, const SyntheticSpec& spec,
                         const RunConfig& config);

/// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace sumrecom
