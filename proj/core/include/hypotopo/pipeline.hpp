#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hypotopo/aggregate.hpp"
#include "hypotopo/config.hpp"
#include "hypotopo/ghg.hpp"
#include "hypotopo/homology.hpp"
#include "hypotopo/metric_space.hpp"
#include "hypotopo/providers.hpp"
#include "hypotopo/relation.hpp"
#include "hypotopo/skeleton.hpp"
#include "hypotopo/trace_model.hpp"

namespace hypotopo {

/// Providers shared by every instance of a batch. A fresh relation oracle is
/// made per instance so the budget cap applies per instance.
struct PipelineContext {
  std::shared_ptr<EmbeddingProvider> embedder;
  std::function<std::unique_ptr<RelationOracle>()> make_oracle;
  std::shared_ptr<RelationCache> relation_cache;  // may be null
};

/// Builds providers for `config`. Remote modes use the given transports, or
/// HTTP clients from EMBED_URL/EMBED_KEY and RELATION_URL/RELATION_KEY when
/// none is given (ConfigError when the URL is unset).
PipelineContext make_context(const RunConfig& config, Transport embed_transport = {},
                             Transport relation_transport = {});

/// Every intermediate product of one instance.
struct InstanceAnalysis {
  HypothesisGraph graph;
  RelationInference relations;
  std::vector<std::vector<double>> semantic;
  std::vector<NodeFeatures> features;
  DistanceMatrix distances;
  SparseMetricGraph metric;
  PersistenceDiagram diagram;
  SelectedFeatures selected;
  OperatingScales scales;
  SkeletonSet skeletons;
  VoteTally tally;
  std::optional<VerificationFlags> verification;
  std::size_t oracle_calls = 0;
  std::size_t budget_cap = 0;
};

/// Graph -> relations -> features -> metric graph -> persistence -> skeletons
/// -> vote -> verification.
InstanceAnalysis analyze_instance(const ProblemInstance& instance, const RunConfig& config, PipelineContext& context);

InstanceReport make_report(const ProblemInstance& instance, const InstanceAnalysis& analysis);

/// analyze_instance + make_report; an exception becomes report.error.
InstanceReport run_instance(const ProblemInstance& instance, const RunConfig& config, PipelineContext& context);

struct BatchResult {
  std::vector<InstanceReport> reports;  // sorted by instance_id
  std::size_t failures = 0;
};

/// Runs instances on `config.workers` threads. Output order does not depend
/// on completion order.
BatchResult run_batch(const std::vector<ProblemInstance>& instances, const RunConfig& config,
                      PipelineContext& context);

/// reports.jsonl and summary.csv in `out_dir` (created if missing).
void write_batch_outputs(const BatchResult& batch, const std::string& out_dir);

}  // namespace hypotopo
