#pragma once

// Data-parallel kernels. Each has a serial reference implementation that the
// tests compare against; the OpenMP versions must return identical results.

#include <cstddef>
#include <limits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sumrecom/active.hpp"

namespace sumrecom::kernels {

ProbabilityTable coreference_table_serial(const DocumentCluster& cluster,
                                          const SimilarityModel& model,
                                          const EmbeddingTable* embeddings);
ProbabilityTable coreference_table_parallel(const DocumentCluster& cluster,
                                            const SimilarityModel& model,
                                            const EmbeddingTable* embeddings);

/// Parallel when built with OpenMP, serial otherwise.
ProbabilityTable coreference_table(const DocumentCluster& cluster, const SimilarityModel& model,
                                   const EmbeddingTable* embeddings);

struct ScanResult {
  double score = std::numeric_limits<double>::infinity();
  std::size_t index = std::numeric_limits<std::size_t>::max();

  bool better_than(const ScanResult& o) const {
    return score < o.score || (score == o.score && index < o.index);
  }
};

/// argmin over [0, n) of score(i); ties go to the smallest index.
template <typename Score>
ScanResult argmin_serial(std::size_t n, Score&& score) {
  ScanResult best;
  for (std::size_t i = 0; i < n; ++i) {
    ScanResult cand{score(i), i};
    if (cand.better_than(best)) best = cand;
  }
  return best;
}

template <typename Score>
ScanResult argmin_parallel(std::size_t n, Score&& score) {
  ScanResult best;
#ifdef _OPENMP
#pragma omp parallel
  {
    ScanResult local;
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
      ScanResult cand{score(static_cast<std::size_t>(i)), static_cast<std::size_t>(i)};
      if (cand.better_than(local)) local = cand;
    }
#pragma omp critical(sumrecom_argmin)
    {
      if (local.better_than(best)) best = local;
    }
  }
#else
  best = argmin_serial(n, score);
#endif
  return best;
}

/// Scores below this many candidates are not worth a parallel region.
inline constexpr std::size_t kParallelThreshold = 4096;

template <typename Score>
ScanResult argmin(std::size_t n, Score&& score) {
  return n >= kParallelThreshold ? argmin_parallel(n, score) : argmin_serial(n, score);
}

/// Evaluates score(i) for all i.
template <typename Score>
std::vector<double> evaluate_serial(std::size_t n, Score&& score) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = score(i);
  return out;
}

template <typename Score>
std::vector<double> evaluate_parallel(std::size_t n, Score&& score) {
  std::vector<double> out(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    out[static_cast<std::size_t>(i)] = score(static_cast<std::size_t>(i));
  }
  return out;
}

template <typename Score>
std::vector<double> evaluate(std::size_t n, Score&& score) {
  return n >= kParallelThreshold ? evaluate_parallel(n, score) : evaluate_serial(n, score);
}

}  // namespace sumrecom::kernels
