#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hypotopo/ghg.hpp"
#include "hypotopo/homology.hpp"
#include "hypotopo/metric_space.hpp"

namespace hypotopo {

/// Edges of `metric` with weight <= eps; all vertices kept.
SparseMetricGraph threshold_graph(const SparseMetricGraph& metric, double eps);

/// Union of two graphs on the same vertex set (each pair kept once).
SparseMetricGraph union_graph(const SparseMetricGraph& a, const SparseMetricGraph& b);

/// Connected components, each as ascending vertex ids, ordered by smallest id.
std::vector<std::vector<std::size_t>> connected_components(const SparseMetricGraph& graph);

struct Cluster {
  std::size_t index = 0;
  std::vector<NodeId> members;  // ascending
  NodeId start = 0;             // min progress
  NodeId goal = 0;              // max progress
  std::vector<std::string> path_ids;
};

/// Components of `subgraph` with more than three members that cover at least
/// two reasoning paths. Anchor ties go to the smaller average distance to the
/// rest of the cluster, then the lower id.
std::vector<Cluster> extract_clusters(const SparseMetricGraph& subgraph, const HypothesisGraph& graph,
                                      const DistanceMatrix& distances);

struct WeightedPath {
  std::vector<NodeId> nodes;
  double cost = 0.0;
};

/// Minimum-weight path from `source` to `target`, optionally restricted to
/// `allowed` vertices. Among equal-cost paths the one with fewest hops, then
/// the lexicographically smallest vertex sequence, wins. nullopt when
/// unreachable.
std::optional<WeightedPath> shortest_path(const SparseMetricGraph& graph, std::size_t source, std::size_t target,
                                          const std::vector<NodeId>* allowed = nullptr);

/// Shortest start -> goal path inside the cluster.
WeightedPath backbone(const Cluster& cluster, const SparseMetricGraph& subgraph);

/// Vertices of the loop's representative cycle plus, for every representative
/// edge absent from `graph_at_eps`, the vertices of a shortest replacement
/// path between its endpoints. Empty when the pair has no representative.
std::vector<NodeId> localize_loop(const PersistencePair& pair, const SparseMetricGraph& graph_at_eps);

struct LoopFeature {
  PersistencePair pair;
  double eps = 0.0;                  // operating scale
  double lifespan = 0.0;             // infinite deaths capped at tau
  std::vector<NodeId> support;       // V_b
  std::optional<std::size_t> cluster;
};

struct LoopAssignment {
  std::vector<std::optional<std::size_t>> cluster_of_loop;
  std::vector<std::vector<std::size_t>> loops_of_cluster;
  std::vector<std::optional<std::size_t>> principal_of_cluster;
};

/// Each loop goes to the cluster sharing the most support vertices (ties:
/// larger cluster, then lower index); zero overlap leaves it unassigned. The
/// principal loop of a cluster has the largest lifespan, ties to the earlier
/// birth.
LoopAssignment assign_loops(const std::vector<LoopFeature>& loops, const std::vector<Cluster>& clusters);

/// Simple cycle as a vertex cycle (first vertex not repeated) and its edges.
struct Cycle {
  std::vector<std::size_t> vertices;
  std::vector<VertexPair> edges;  // sorted, u < v
  double weight = 0.0;
};

/// Horton minimum-weight cycle basis of `graph` restricted to `vertices`
/// (all vertices when empty). Cycles ascend by weight.
std::vector<Cycle> minimum_cycle_basis(const SparseMetricGraph& graph, const std::vector<NodeId>& vertices = {});

struct Tour {
  std::vector<NodeId> walk;  // closed: walk.front() == walk.back()
  double weight = 0.0;
  bool from_basis = true;    // false when stitched
};

/// Closed walk for a loop: the minimum-basis cycle on G(eps)[support] that
/// covers the most representative vertices (ties to the lighter cycle). If
/// the support is acyclic, representative vertices are stitched in progress
/// order with shortest paths and closed. nullopt when no closed walk with at
/// least three distinct vertices exists.
std::optional<Tour> cycle_tour(const std::vector<NodeId>& support, const std::vector<NodeId>& representative,
                               const SparseMetricGraph& graph_at_eps, const std::vector<double>& progress);

/// Rotates a closed walk to start and end at `pivot`, oriented so the first
/// step goes to the lower-id neighbour. `pivot` must lie on the walk.
Tour orient_tour(const Tour& tour, NodeId pivot);

struct SpliceParams {
  double delta_loop = 0.15;
  double lambda = 0.15;
};

void validate(const SpliceParams& params);

/// min(delta_loop, lambda * eps_b).
double effective_delta(const SpliceParams& params, double eps_b);

/// Tour vertex whose progress is closest to the cluster's median progress
/// (ties to the lower id).
NodeId choose_pivot(const Tour& tour, const Cluster& cluster, const std::vector<double>& progress);

struct SpliceResult {
  std::vector<NodeId> path;
  bool spliced = false;
  double min_cross_distance = kInfinity;
  std::optional<std::string> note;
};

/// Reroutes start -> pivot -> tour -> pivot -> goal over `route_graph` when
/// some tour vertex lies within effective_delta of a backbone vertex (a shared
/// vertex counts as distance 0). Consecutive repeats are collapsed.
SpliceResult splice(const WeightedPath& backbone, const Tour& oriented_tour, NodeId pivot,
                    const SparseMetricGraph& route_graph, const DistanceMatrix& distances,
                    const SpliceParams& params, double eps_b);

struct SkeletonStats {
  std::size_t contributing_paths = 0;
  double average_edge_weight = 0.0;
  double loop_lifespan = 0.0;
};

struct Skeleton {
  std::size_t cluster = 0;
  std::vector<NodeId> path;
  WeightedPath backbone;
  bool spliced = false;
  std::optional<NodeId> pivot;
  std::optional<std::size_t> principal_loop;  // index into SkeletonSet::loops
  std::vector<VertexPair> tour_edges;
  std::vector<NodeId> tour_vertices;           // ascending
  SkeletonStats stats;
  SparseMetricGraph route_graph;               // edges the path may use
};

struct SkeletonInputs {
  const HypothesisGraph* graph = nullptr;
  const DistanceMatrix* distances = nullptr;
  const SparseMetricGraph* metric = nullptr;  // truncated KNN graph
  const SelectedFeatures* selected = nullptr;
  const OperatingScales* scales = nullptr;
  SpliceParams splice;
};

struct SkeletonSet {
  std::vector<Cluster> clusters;
  std::vector<LoopFeature> loops;
  LoopAssignment assignment;
  std::vector<Skeleton> skeletons;  // ranked
  std::vector<std::string> warnings;
};

/// Ordering keys: principal loop present, larger loop lifespan, larger
/// cluster, smaller backbone cost, lower cluster index.
struct ClusterRankKey {
  bool has_loop = false;
  double loop_lifespan = 0.0;
  std::size_t size = 0;
  double backbone_cost = 0.0;
  std::size_t index = 0;
};
bool rank_before(const ClusterRankKey& a, const ClusterRankKey& b);
std::vector<std::size_t> rank_clusters(const std::vector<ClusterRankKey>& keys);

/// Cluster extraction, loop localization and assignment, backbones, tours and
/// splices for one instance; skeletons come back ranked.
SkeletonSet extract_skeletons(const SkeletonInputs& in);

}  // namespace hypotopo
