#include "sumrecom/kernels.hpp"

namespace sumrecom::kernels {

ProbabilityTable coreference_table_serial(const DocumentCluster& cluster,
                                          const SimilarityModel& model,
                                          const EmbeddingTable* embeddings) {
  const std::size_t n = cluster.concepts.size();
  ProbabilityTable table(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      table.set(i, j, coreference_probability(model, cluster.concepts[i], cluster.concepts[j],
                                              embeddings));
    }
  }
  return table;
}

ProbabilityTable coreference_table_parallel(const DocumentCluster& cluster,
                                            const SimilarityModel& model,
                                            const EmbeddingTable* embeddings) {
  const auto n = static_cast<std::ptrdiff_t>(cluster.concepts.size());
  ProbabilityTable table(static_cast<std::size_t>(n));
  // Each (i, j) cell is written by exactly one iteration; rows are uneven so
  // the schedule is dynamic.
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::ptrdiff_t j = i + 1; j < n; ++j) {
      table.set(static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                coreference_probability(model, cluster.concepts[i], cluster.concepts[j],
                                        embeddings));
    }
  }
  return table;
}

ProbabilityTable coreference_table(const DocumentCluster& cluster, const SimilarityModel& model,
                                   const EmbeddingTable* embeddings) {
#ifdef _OPENMP
  return coreference_table_parallel(cluster, model, embeddings);
#else
  return coreference_table_serial(cluster, model, embeddings);
#endif
}

}  // namespace sumrecom::kernels
