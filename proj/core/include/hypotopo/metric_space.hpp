#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "hypotopo/ghg.hpp"
#include "hypotopo/relation.hpp"

namespace hypotopo {

class EmbeddingProvider;

inline constexpr double kConfidenceFloor = 1e-6;

struct NodeFeatures {
  std::vector<double> semantic;         // unit L2 norm
  std::array<double, 3> structural{};   // z-scored [progress, bfs depth, degree centrality]
  double uncertainty = 0.0;             // -ln(confidence + 1e-6)
};

struct MetricParams {
  double alpha = 0.6;  // semantic
  double beta = 0.3;   // structural
  double nu = 0.1;     // uncertainty
  std::size_t k = 15;
  double tau_percentile = 95.0;
  RelationParams relation;
};

/// alpha + beta + nu = 1 (to 1e-9), weights non-negative, k >= 1,
/// tau_percentile in (0, 100].
void validate(const MetricParams& params);

double uncertainty_of(double confidence);

/// Raw structural coordinates before standardization, one row per node:
/// progress, multi-source BFS depth from path starts over adjacency edges
/// divided by the deepest level reached, distinct-neighbour degree / (|V|-1).
std::vector<std::array<double, 3>> raw_structural(const HypothesisGraph& graph);

/// Per-column z-score (population std). A column with zero variance maps to 0.
void standardize(std::vector<std::array<double, 3>>& rows);

/// Features for every node, embedding each node's canon with `embedder`.
std::vector<NodeFeatures> compute_features(const HypothesisGraph& graph, EmbeddingProvider& embedder);

/// Same, from semantic vectors already in node order.
std::vector<NodeFeatures> compute_features(const HypothesisGraph& graph, std::vector<std::vector<double>> semantic);

/// Dense symmetric n x n matrix.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * n, 0.0) {}
  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    d_[i * n_ + j] = v;
    d_[j * n_ + i] = v;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> d_;
};

/// max(0, alpha (1 - <e_i,e_j>) + beta |phi_i - phi_j|_1 + nu (u_i + u_j) +
/// delta_logic R(i,j)). Self-distance is 2 nu u_i.
double mixed_distance(std::size_t i, std::size_t j, const std::vector<NodeFeatures>& features,
                      const MetricParams& params, const RelationTable& relations);

DistanceMatrix distance_matrix(const std::vector<NodeFeatures>& features, const MetricParams& params,
                               const RelationTable& relations);

struct WeightedEdge {
  std::size_t u = 0;  // u < v
  std::size_t v = 0;
  double weight = 0.0;
};

/// Undirected weighted graph on vertices 0..n-1, at most one edge per pair.
struct SparseMetricGraph {
  std::size_t n = 0;
  std::vector<WeightedEdge> edges;  // sorted by (u, v)
  double tau_value = 0.0;
  std::size_t k_used = 0;
  std::vector<std::string> warnings;
};

/// Value at nearest rank ceil(p/100 * n) of the ascending `values`.
double nearest_rank_percentile(std::vector<double> values, double percentile);

/// k nearest neighbours per vertex (ties to the lower id), union-symmetrized,
/// then edges heavier than the tau_percentile nearest-rank weight dropped.
/// k is clamped to n-1 with a warning.
SparseMetricGraph build_knn_graph(const DistanceMatrix& distances, std::size_t k, double tau_percentile);
SparseMetricGraph build_knn_graph(const std::vector<NodeFeatures>& features, const MetricParams& params,
                                  const RelationTable& relations);

/// "i,j,d" rows for i < j.
std::string distance_csv(const DistanceMatrix& distances);

}  // namespace hypotopo
