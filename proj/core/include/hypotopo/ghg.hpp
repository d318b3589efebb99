#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hypotopo/trace_model.hpp"

namespace hypotopo {

using NodeId = std::size_t;

/// One (path, step) occurrence folded into a node. `step_index` is 0-based.
struct SourceRef {
  std::string path_id;
  std::size_t step_index = 0;

  friend bool operator==(const SourceRef&, const SourceRef&) = default;
};

struct HypothesisNode {
  NodeId id = 0;
  std::string text;   // first-seen source text
  std::string canon;
  double confidence = 0.0;  // mean over sources
  double progress = 0.0;    // max over sources
  std::vector<SourceRef> provenance;
  std::optional<std::string> answer;
  bool terminal = false;    // some source is the last step of its path
  double confidence_sum = 0.0;
};

enum class EdgeKind { adjacency, support, refute };

std::string_view to_string(EdgeKind kind);

struct HypothesisEdge {
  NodeId src = 0;
  NodeId dst = 0;
  EdgeKind kind = EdgeKind::adjacency;
};

struct HypothesisGraph {
  std::string instance_id;
  std::vector<HypothesisNode> nodes;  // indexed by NodeId
  std::vector<HypothesisEdge> edges;

  std::size_t size() const noexcept { return nodes.size(); }
  /// Node that absorbed (path_id, step_index); throws if absent.
  NodeId node_of(std::string_view path_id, std::size_t step_index) const;
};

enum class SimilarityMode { canon_jaccard, embedding_cosine, blend };

struct MergePolicy {
  double theta_merge = 0.85;
  SimilarityMode similarity_mode = SimilarityMode::canon_jaccard;
  double blend_weight = 0.5;
};

/// Unit vectors keyed by canonical string; consulted by the cosine and blend
/// similarity modes.
using EmbeddingTable = std::unordered_map<std::string, std::vector<double>>;

/// Token-set Jaccard of two canonical strings. Two empty strings score 1.
double jaccard_similarity(std::string_view a, std::string_view b);

/// Similarity in [0,1] under `policy`. Cosine is clamped at 0. Throws
/// ConfigError when an embedding mode is requested without a table or the
/// table lacks a key.
double similarity(std::string_view a, std::string_view b, const MergePolicy& policy,
                  const EmbeddingTable* embeddings = nullptr);

/// Folds one more source into `target`: running mean of confidence over all
/// sources, max of progress, provenance append, first non-empty answer kept.
void merge_into(HypothesisNode& target, const ReasoningStep& step, double progress, SourceRef source,
                bool terminal);

/// Streaming merge over paths in order, steps in order. Each step joins its
/// best-matching existing node when the similarity exceeds theta_merge
/// (ties to the earliest node), otherwise opens a new node. Consecutive steps
/// of a path are linked by an adjacency edge unless they landed in the same
/// node.
HypothesisGraph build_graph(const ProblemInstance& instance, const MergePolicy& policy = {},
                            const EmbeddingTable* embeddings = nullptr);

/// JSON document with nodes[] and edges[].
std::string serialize_graph(const HypothesisGraph& graph);

}  // namespace hypotopo
