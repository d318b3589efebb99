#include "hypotopo/metric_space.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <sstream>

#include "hypotopo/error.hpp"
#include "hypotopo/providers.hpp"

namespace hypotopo {

void validate(const MetricParams& params) {
  if (params.alpha < 0.0 || params.beta < 0.0 || params.nu < 0.0) {
    throw ConfigError("distance weights must be non-negative");
  }
  if (std::abs(params.alpha + params.beta + params.nu - 1.0) > 1e-9) {
    throw ConfigError("alpha + beta + nu must equal 1");
  }
  if (params.k < 1) throw ConfigError("k must be at least 1");
  if (!(params.tau_percentile > 0.0 && params.tau_percentile <= 100.0)) {
    throw ConfigError("tau_percentile must lie in (0, 100]");
  }
  validate(params.relation);
}

double uncertainty_of(double confidence) { return -std::log(confidence + kConfidenceFloor); }

std::vector<std::array<double, 3>> raw_structural(const HypothesisGraph& graph) {
  const std::size_t n = graph.size();
  std::vector<std::array<double, 3>> rows(n);
  if (n == 0) return rows;

  std::vector<std::vector<NodeId>> out_adj(n);
  std::vector<std::set<NodeId>> neighbours(n);
  for (const auto& e : graph.edges) {
    if (e.src == e.dst) continue;
    if (e.kind == EdgeKind::adjacency) out_adj[e.src].push_back(e.dst);
    neighbours[e.src].insert(e.dst);
    neighbours[e.dst].insert(e.src);
  }

  constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> depth(n, kUnreached);
  std::deque<NodeId> queue;
  for (const auto& node : graph.nodes) {
    bool is_start = std::any_of(node.provenance.begin(), node.provenance.end(),
                                [](const SourceRef& s) { return s.step_index == 0; });
    if (is_start) {
      depth[node.id] = 0;
      queue.push_back(node.id);
    }
  }
  while (!queue.empty()) {
    NodeId v = queue.front();
    queue.pop_front();
    for (NodeId w : out_adj[v]) {
      if (depth[w] == kUnreached) {
        depth[w] = depth[v] + 1;
        queue.push_back(w);
      }
    }
  }
  std::size_t max_depth = 0;
  for (auto d : depth) {
    if (d != kUnreached) max_depth = std::max(max_depth, d);
  }
  for (auto& d : depth) {
    if (d == kUnreached) d = max_depth + 1;
  }
  max_depth = *std::max_element(depth.begin(), depth.end());

  for (std::size_t i = 0; i < n; ++i) {
    rows[i][0] = graph.nodes[i].progress;
    rows[i][1] = max_depth == 0 ? 0.0 : static_cast<double>(depth[i]) / static_cast<double>(max_depth);
    rows[i][2] = n > 1 ? static_cast<double>(neighbours[i].size()) / static_cast<double>(n - 1) : 0.0;
  }
  return rows;
}

void standardize(std::vector<std::array<double, 3>>& rows) {
  if (rows.empty()) return;
  const double n = static_cast<double>(rows.size());
  for (std::size_t c = 0; c < 3; ++c) {
    double mean = 0.0;
    for (const auto& r : rows) mean += r[c];
    mean /= n;
    double var = 0.0;
    for (const auto& r : rows) var += (r[c] - mean) * (r[c] - mean);
    var /= n;
    const double sd = std::sqrt(var);
    for (auto& r : rows) r[c] = sd > 1e-12 ? (r[c] - mean) / sd : 0.0;
  }
}

std::vector<NodeFeatures> compute_features(const HypothesisGraph& graph, std::vector<std::vector<double>> semantic) {
  if (semantic.size() != graph.size()) throw Error("semantic vector count does not match node count");
  auto structural = raw_structural(graph);
  standardize(structural);
  std::vector<NodeFeatures> out(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    out[i].semantic = std::move(semantic[i]);
    l2_normalize(out[i].semantic);
    out[i].structural = structural[i];
    out[i].uncertainty = uncertainty_of(graph.nodes[i].confidence);
  }
  return out;
}

std::vector<NodeFeatures> compute_features(const HypothesisGraph& graph, EmbeddingProvider& embedder) {
  std::vector<std::string> canons;
  canons.reserve(graph.size());
  for (const auto& node : graph.nodes) canons.push_back(node.canon);
  return compute_features(graph, embedder.embed(canons));
}

double mixed_distance(std::size_t i, std::size_t j, const std::vector<NodeFeatures>& features,
                      const MetricParams& params, const RelationTable& relations) {
  const NodeFeatures& a = features[i];
  const NodeFeatures& b = features[j];
  double dot = 0.0;
  for (std::size_t t = 0; t < a.semantic.size(); ++t) dot += a.semantic[t] * b.semantic[t];
  double l1 = 0.0;
  for (std::size_t t = 0; t < 3; ++t) l1 += std::abs(a.structural[t] - b.structural[t]);
  double d = params.alpha * (1.0 - dot) + params.beta * l1 + params.nu * (a.uncertainty + b.uncertainty);
  if (i != j) d += params.relation.delta_logic * relations.term(i, j, params.relation);
  return std::max(0.0, d);
}

DistanceMatrix distance_matrix(const std::vector<NodeFeatures>& features, const MetricParams& params,
                               const RelationTable& relations) {
  DistanceMatrix m(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    for (std::size_t j = i; j < features.size(); ++j) m.set(i, j, mixed_distance(i, j, features, params, relations));
  }
  return m;
}

double nearest_rank_percentile(std::vector<double> values, double percentile) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  double rank = std::ceil(percentile * static_cast<double>(values.size()) / 100.0 - 1e-9);
  auto idx = static_cast<std::size_t>(std::clamp(rank, 1.0, static_cast<double>(values.size()))) - 1;
  return values[idx];
}

SparseMetricGraph build_knn_graph(const DistanceMatrix& distances, std::size_t k, double tau_percentile) {
  SparseMetricGraph g;
  g.n = distances.size();
  if (g.n < 2) return g;
  if (k > g.n - 1) {
    g.warnings.push_back("k=" + std::to_string(k) + " exceeds n-1=" + std::to_string(g.n - 1) + "; clamped");
    k = g.n - 1;
  }
  g.k_used = k;

  std::set<std::pair<std::size_t, std::size_t>> chosen;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < g.n; ++i) {
    order.clear();
    for (std::size_t j = 0; j < g.n; ++j) {
      if (j != i) order.push_back(j);
    }
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        double da = distances(i, a), db = distances(i, b);
                        return da < db || (da == db && a < b);
                      });
    for (std::size_t t = 0; t < k; ++t) chosen.insert({std::min(i, order[t]), std::max(i, order[t])});
  }

  std::vector<double> weights;
  weights.reserve(chosen.size());
  for (auto [u, v] : chosen) weights.push_back(distances(u, v));
  g.tau_value = nearest_rank_percentile(weights, tau_percentile);
  for (auto [u, v] : chosen) {
    double w = distances(u, v);
    if (w <= g.tau_value) g.edges.push_back(WeightedEdge{u, v, w});
  }
  return g;
}

SparseMetricGraph build_knn_graph(const std::vector<NodeFeatures>& features, const MetricParams& params,
                                  const RelationTable& relations) {
  return build_knn_graph(distance_matrix(features, params, relations), params.k, params.tau_percentile);
}

std::string distance_csv(const DistanceMatrix& distances) {
  std::ostringstream out;
  out.precision(17);
  out << "i,j,d\n";
  for (std::size_t i = 0; i < distances.size(); ++i) {
    for (std::size_t j = i + 1; j < distances.size(); ++j) out << i << ',' << j << ',' << distances(i, j) << '\n';
  }
  return out.str();
}

}  // namespace hypotopo
