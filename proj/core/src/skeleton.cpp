#include "hypotopo/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <tuple>

#include "hypotopo/error.hpp"
#include "hypotopo/union_find.hpp"

namespace hypotopo {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

using Adjacency = std::vector<std::vector<std::pair<std::size_t, double>>>;  // neighbours ascending

Adjacency adjacency(const SparseMetricGraph& g, const std::vector<char>* allowed = nullptr) {
  Adjacency adj(g.n);
  for (const auto& e : g.edges) {
    if (allowed && (!(*allowed)[e.u] || !(*allowed)[e.v])) continue;
    adj[e.u].emplace_back(e.v, e.weight);
    adj[e.v].emplace_back(e.u, e.weight);
  }
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return adj;
}

std::vector<char> mask_of(std::size_t n, const std::vector<NodeId>& vertices) {
  std::vector<char> mask(n, 0);
  for (auto v : vertices) mask.at(v) = 1;
  return mask;
}

bool nearly_equal(double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a) + std::abs(b)); }

struct Tree {
  std::vector<double> cost;
  std::vector<std::size_t> hops;
  std::vector<std::size_t> pred;
};

// Dijkstra on (cost, hops) keys; predecessor ties go to the lower id.
Tree dijkstra(const Adjacency& adj, std::size_t root) {
  const std::size_t n = adj.size();
  Tree t{std::vector<double>(n, kInfinity), std::vector<std::size_t>(n, kNone), std::vector<std::size_t>(n, kNone)};
  using Key = std::tuple<double, std::size_t, std::size_t>;  // cost, hops, vertex
  std::priority_queue<Key, std::vector<Key>, std::greater<>> heap;
  t.cost[root] = 0.0;
  t.hops[root] = 0;
  heap.emplace(0.0, 0, root);
  std::vector<char> done(n, 0);
  while (!heap.empty()) {
    auto [c, h, v] = heap.top();
    heap.pop();
    if (done[v]) continue;
    done[v] = 1;
    for (auto [w, weight] : adj[v]) {
      if (done[w]) continue;
      const double nc = c + weight;
      const std::size_t nh = h + 1;
      if (std::tie(nc, nh) < std::tie(t.cost[w], t.hops[w]) ||
          (nc == t.cost[w] && nh == t.hops[w] && v < t.pred[w])) {
        t.cost[w] = nc;
        t.hops[w] = nh;
        t.pred[w] = v;
        heap.emplace(nc, nh, w);
      }
    }
  }
  return t;
}

std::vector<std::size_t> tree_path(const Tree& t, std::size_t root, std::size_t v) {
  std::vector<std::size_t> out;
  for (std::size_t x = v; x != kNone; x = x == root ? kNone : t.pred[x]) out.push_back(x);
  std::reverse(out.begin(), out.end());
  return out;
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<NodeId> collapse_repeats(const std::vector<NodeId>& in) {
  std::vector<NodeId> out;
  for (auto v : in) {
    if (out.empty() || out.back() != v) out.push_back(v);
  }
  return out;
}

SparseMetricGraph induced(const SparseMetricGraph& g, const std::vector<NodeId>& vertices) {
  auto mask = mask_of(g.n, vertices);
  SparseMetricGraph out;
  out.n = g.n;
  out.tau_value = g.tau_value;
  for (const auto& e : g.edges) {
    if (mask[e.u] && mask[e.v]) out.edges.push_back(e);
  }
  return out;
}

}  // namespace

SparseMetricGraph threshold_graph(const SparseMetricGraph& metric, double eps) {
  SparseMetricGraph out;
  out.n = metric.n;
  out.tau_value = metric.tau_value;
  out.k_used = metric.k_used;
  for (const auto& e : metric.edges) {
    if (e.weight <= eps) out.edges.push_back(e);
  }
  return out;
}

SparseMetricGraph union_graph(const SparseMetricGraph& a, const SparseMetricGraph& b) {
  SparseMetricGraph out;
  out.n = std::max(a.n, b.n);
  out.tau_value = std::max(a.tau_value, b.tau_value);
  std::map<VertexPair, double> edges;
  for (const auto* g : {&a, &b}) {
    for (const auto& e : g->edges) edges.emplace(VertexPair{std::min(e.u, e.v), std::max(e.u, e.v)}, e.weight);
  }
  for (const auto& [key, w] : edges) out.edges.push_back(WeightedEdge{key.first, key.second, w});
  return out;
}

std::vector<std::vector<std::size_t>> connected_components(const SparseMetricGraph& graph) {
  UnionFind uf(graph.n);
  for (const auto& e : graph.edges) uf.unite(e.u, e.v);
  std::map<std::size_t, std::vector<std::size_t>> by_root;
  for (std::size_t v = 0; v < graph.n; ++v) by_root[uf.find(v)].push_back(v);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [root, members] : by_root) out.push_back(std::move(members));
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
  return out;
}

std::vector<Cluster> extract_clusters(const SparseMetricGraph& subgraph, const HypothesisGraph& graph,
                                      const DistanceMatrix& distances) {
  std::vector<Cluster> out;
  for (auto& members : connected_components(subgraph)) {
    if (members.size() <= 3) continue;
    std::set<std::string> paths;
    for (auto v : members) {
      for (const auto& src : graph.nodes[v].provenance) paths.insert(src.path_id);
    }
    if (paths.size() < 2) continue;

    auto avg_distance = [&](NodeId v) {
      double sum = 0.0;
      for (auto u : members) {
        if (u != v) sum += distances(v, u);
      }
      return sum / static_cast<double>(members.size() - 1);
    };
    auto pick = [&](bool want_min) {
      NodeId best = members.front();
      for (auto v : members) {
        const double rv = graph.nodes[v].progress, rb = graph.nodes[best].progress;
        if (v == best) continue;
        bool better_r = want_min ? rv < rb : rv > rb;
        if (better_r) {
          best = v;
        } else if (rv == rb) {
          const double av = avg_distance(v), ab = avg_distance(best);
          if (av < ab || (av == ab && v < best)) best = v;
        }
      }
      return best;
    };

    Cluster c;
    c.index = out.size();
    c.start = pick(true);
    c.goal = pick(false);
    c.members = std::move(members);
    c.path_ids.assign(paths.begin(), paths.end());
    out.push_back(std::move(c));
  }
  return out;
}

std::optional<WeightedPath> shortest_path(const SparseMetricGraph& graph, std::size_t source, std::size_t target,
                                          const std::vector<NodeId>* allowed) {
  std::vector<char> mask;
  if (allowed) {
    mask = mask_of(graph.n, *allowed);
    if (!mask[source] || !mask[target]) return std::nullopt;
  }
  Adjacency adj = adjacency(graph, allowed ? &mask : nullptr);
  Tree to_target = dijkstra(adj, target);
  if (to_target.cost[source] == kInfinity) return std::nullopt;

  WeightedPath path;
  path.cost = to_target.cost[source];
  std::size_t v = source;
  path.nodes.push_back(v);
  while (v != target) {
    std::size_t next = kNone;
    for (auto [u, w] : adj[v]) {  // ascending ids, so the first hit is lexicographically smallest
      if (to_target.hops[u] + 1 == to_target.hops[v] && nearly_equal(to_target.cost[v], w + to_target.cost[u])) {
        next = u;
        break;
      }
    }
    if (next == kNone) next = to_target.pred[v];  // unreachable in exact arithmetic
    v = next;
    path.nodes.push_back(v);
  }
  return path;
}

WeightedPath backbone(const Cluster& cluster, const SparseMetricGraph& subgraph) {
  if (cluster.start == cluster.goal) return WeightedPath{{cluster.start}, 0.0};
  auto p = shortest_path(subgraph, cluster.start, cluster.goal, &cluster.members);
  if (!p) throw Error("cluster anchors are not connected inside the cluster");
  return *p;
}

std::vector<NodeId> localize_loop(const PersistencePair& pair, const SparseMetricGraph& graph_at_eps) {
  if (pair.representative.empty()) return {};
  std::set<VertexPair> present;
  for (const auto& e : graph_at_eps.edges) present.emplace(std::min(e.u, e.v), std::max(e.u, e.v));
  std::set<NodeId> support;
  for (auto [u, v] : pair.representative) {
    support.insert(u);
    support.insert(v);
  }
  for (auto [u, v] : pair.representative) {
    if (present.count({std::min(u, v), std::max(u, v)})) continue;
    if (auto stitch = shortest_path(graph_at_eps, u, v)) support.insert(stitch->nodes.begin(), stitch->nodes.end());
  }
  return {support.begin(), support.end()};
}

LoopAssignment assign_loops(const std::vector<LoopFeature>& loops, const std::vector<Cluster>& clusters) {
  LoopAssignment a;
  a.cluster_of_loop.assign(loops.size(), std::nullopt);
  a.loops_of_cluster.assign(clusters.size(), {});
  a.principal_of_cluster.assign(clusters.size(), std::nullopt);
  for (std::size_t l = 0; l < loops.size(); ++l) {
    std::size_t best_overlap = 0;
    std::optional<std::size_t> best;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      std::vector<NodeId> common;
      std::set_intersection(loops[l].support.begin(), loops[l].support.end(), clusters[c].members.begin(),
                            clusters[c].members.end(), std::back_inserter(common));
      const std::size_t overlap = common.size();
      if (overlap == 0) continue;
      if (!best || overlap > best_overlap ||
          (overlap == best_overlap && clusters[c].members.size() > clusters[*best].members.size())) {
        best = c;
        best_overlap = overlap;
      }
    }
    a.cluster_of_loop[l] = best;
    if (best) a.loops_of_cluster[*best].push_back(l);
  }
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (auto l : a.loops_of_cluster[c]) {
      auto& principal = a.principal_of_cluster[c];
      if (!principal || loops[l].lifespan > loops[*principal].lifespan ||
          (loops[l].lifespan == loops[*principal].lifespan && loops[l].pair.birth < loops[*principal].pair.birth)) {
        principal = l;
      }
    }
  }
  return a;
}

std::vector<Cycle> minimum_cycle_basis(const SparseMetricGraph& graph, const std::vector<NodeId>& vertices) {
  std::vector<NodeId> verts = vertices;
  if (verts.empty()) {
    verts.resize(graph.n);
    std::iota(verts.begin(), verts.end(), NodeId{0});
  }
  SparseMetricGraph sub = induced(graph, verts);
  const std::size_t m = sub.edges.size();
  std::map<VertexPair, std::size_t> edge_id;
  for (std::size_t i = 0; i < m; ++i) edge_id[{sub.edges[i].u, sub.edges[i].v}] = i;
  auto id_of = [&](std::size_t a, std::size_t b) { return edge_id.at({std::min(a, b), std::max(a, b)}); };

  UnionFind uf(graph.n);
  for (const auto& e : sub.edges) uf.unite(e.u, e.v);
  std::set<std::size_t> roots;
  for (auto v : verts) roots.insert(uf.find(v));
  const std::size_t rank = m + roots.size() - verts.size();
  if (rank == 0) return {};

  Adjacency adj = adjacency(sub);
  struct Candidate {
    double weight;
    std::vector<std::size_t> edge_ids;  // sorted
  };
  std::vector<Candidate> candidates;
  std::set<std::vector<std::size_t>> seen;
  for (auto root : verts) {
    Tree t = dijkstra(adj, root);
    for (const auto& e : sub.edges) {
      if (t.cost[e.u] == kInfinity || t.cost[e.v] == kInfinity) continue;
      if (t.pred[e.v] == e.u || t.pred[e.u] == e.v) continue;
      auto pu = tree_path(t, root, e.u);
      auto pv = tree_path(t, root, e.v);
      std::set<std::size_t> on_u(pu.begin() + 1, pu.end());
      bool disjoint = std::none_of(pv.begin() + 1, pv.end(), [&](std::size_t x) { return on_u.count(x) > 0; });
      if (!disjoint) continue;
      std::vector<std::size_t> ids;
      for (std::size_t i = 1; i < pu.size(); ++i) ids.push_back(id_of(pu[i - 1], pu[i]));
      for (std::size_t i = 1; i < pv.size(); ++i) ids.push_back(id_of(pv[i - 1], pv[i]));
      ids.push_back(id_of(e.u, e.v));
      std::sort(ids.begin(), ids.end());
      if (!seen.insert(ids).second) continue;
      double w = 0.0;
      for (auto id : ids) w += sub.edges[id].weight;
      candidates.push_back(Candidate{w, std::move(ids)});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.weight < b.weight || (a.weight == b.weight && a.edge_ids < b.edge_ids);
  });

  // Greedy independence test by GF(2) elimination on edge-incidence vectors.
  const std::size_t words = (m + 63) / 64;
  std::vector<std::pair<std::size_t, std::vector<std::uint64_t>>> basis;  // (pivot bit, row)
  std::vector<Cycle> out;
  for (const auto& cand : candidates) {
    std::vector<std::uint64_t> row(words, 0);
    for (auto id : cand.edge_ids) row[id / 64] ^= std::uint64_t{1} << (id % 64);
    for (const auto& [pivot, brow] : basis) {
      if (row[pivot / 64] >> (pivot % 64) & 1U) {
        for (std::size_t w = 0; w < words; ++w) row[w] ^= brow[w];
      }
    }
    std::size_t pivot = kNone;
    for (std::size_t w = 0; w < words && pivot == kNone; ++w) {
      if (row[w]) pivot = w * 64 + static_cast<std::size_t>(__builtin_ctzll(row[w]));
    }
    if (pivot == kNone) continue;
    // Keep the basis fully reduced on its pivots.
    for (auto& [p, brow] : basis) {
      if (brow[pivot / 64] >> (pivot % 64) & 1U) {
        for (std::size_t w = 0; w < words; ++w) brow[w] ^= row[w];
      }
    }
    basis.emplace_back(pivot, std::move(row));

    Cycle c;
    c.weight = cand.weight;
    std::map<std::size_t, std::vector<std::size_t>> nbrs;
    for (auto id : cand.edge_ids) {
      const auto& e = sub.edges[id];
      c.edges.emplace_back(e.u, e.v);
      nbrs[e.u].push_back(e.v);
      nbrs[e.v].push_back(e.u);
    }
    std::sort(c.edges.begin(), c.edges.end());
    std::size_t start = nbrs.begin()->first;
    std::size_t prev = kNone, cur = start;
    do {
      c.vertices.push_back(cur);
      auto& nb = nbrs[cur];
      std::sort(nb.begin(), nb.end());
      std::size_t next = nb[0] != prev ? nb[0] : nb[1];
      if (prev == kNone) next = nb[0];
      prev = cur;
      cur = next;
    } while (cur != start);
    out.push_back(std::move(c));
    if (out.size() == rank) break;
  }
  return out;
}

std::optional<Tour> cycle_tour(const std::vector<NodeId>& support, const std::vector<NodeId>& representative,
                               const SparseMetricGraph& graph_at_eps, const std::vector<double>& progress) {
  if (support.empty()) return std::nullopt;
  auto basis = minimum_cycle_basis(graph_at_eps, support);
  std::set<NodeId> rep(representative.begin(), representative.end());
  if (!basis.empty()) {
    const Cycle* best = nullptr;
    std::size_t best_cover = 0;
    for (const auto& c : basis) {
      std::size_t cover = static_cast<std::size_t>(
          std::count_if(c.vertices.begin(), c.vertices.end(), [&](NodeId v) { return rep.count(v) > 0; }));
      if (!best || cover > best_cover) {  // basis ascends by weight, so ties keep the lighter cycle
        best = &c;
        best_cover = cover;
      }
    }
    Tour t;
    t.walk = best->vertices;
    t.walk.push_back(best->vertices.front());
    t.weight = best->weight;
    t.from_basis = true;
    return t;
  }

  std::vector<NodeId> order(rep.begin(), rep.end());
  if (order.size() < 3) return std::nullopt;
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return progress.at(a) < progress.at(b); });
  Tour t;
  t.from_basis = false;
  t.walk.push_back(order.front());
  for (std::size_t i = 0; i < order.size(); ++i) {
    NodeId from = order[i], to = order[(i + 1) % order.size()];
    auto p = shortest_path(graph_at_eps, from, to, &support);
    if (!p) return std::nullopt;
    t.walk.insert(t.walk.end(), p->nodes.begin() + 1, p->nodes.end());
    t.weight += p->cost;
  }
  t.walk = collapse_repeats(t.walk);
  std::set<NodeId> distinct(t.walk.begin(), t.walk.end());
  if (distinct.size() < 3) return std::nullopt;
  return t;
}

Tour orient_tour(const Tour& tour, NodeId pivot) {
  std::vector<NodeId> ring(tour.walk.begin(), tour.walk.end() - 1);
  auto it = std::find(ring.begin(), ring.end(), pivot);
  if (it == ring.end()) throw Error("pivot is not on the tour");
  std::rotate(ring.begin(), it, ring.end());
  std::vector<NodeId> reversed{ring.front()};
  reversed.insert(reversed.end(), ring.rbegin(), ring.rend() - 1);
  Tour out = tour;
  const auto& chosen = (ring.size() > 1 && reversed[1] < ring[1]) ? reversed : ring;
  out.walk = chosen;
  out.walk.push_back(pivot);
  return out;
}

void validate(const SpliceParams& params) {
  if (!(params.delta_loop > 0.0)) throw ConfigError("delta_loop must be positive");
  if (!(params.lambda >= 0.1 && params.lambda <= 0.2)) throw ConfigError("lambda must lie in [0.1, 0.2]");
}

double effective_delta(const SpliceParams& params, double eps_b) {
  return std::min(params.delta_loop, params.lambda * eps_b);
}

NodeId choose_pivot(const Tour& tour, const Cluster& cluster, const std::vector<double>& progress) {
  std::vector<double> rs;
  for (auto v : cluster.members) rs.push_back(progress.at(v));
  const double med = median_of(rs);
  std::set<NodeId> on_tour(tour.walk.begin(), tour.walk.end());
  NodeId best = *on_tour.begin();
  for (auto v : on_tour) {
    if (std::abs(progress.at(v) - med) < std::abs(progress.at(best) - med)) best = v;
  }
  return best;
}

SpliceResult splice(const WeightedPath& backbone, const Tour& oriented_tour, NodeId pivot,
                    const SparseMetricGraph& route_graph, const DistanceMatrix& distances,
                    const SpliceParams& params, double eps_b) {
  SpliceResult r;
  r.path = backbone.nodes;
  for (auto t : oriented_tour.walk) {
    for (auto u : backbone.nodes) r.min_cross_distance = std::min(r.min_cross_distance, t == u ? 0.0 : distances(t, u));
  }
  if (!(r.min_cross_distance < effective_delta(params, eps_b))) return r;

  const NodeId s = backbone.nodes.front(), g = backbone.nodes.back();
  auto to_pivot = shortest_path(route_graph, s, pivot);
  auto from_pivot = shortest_path(route_graph, pivot, g);
  if (!to_pivot || !from_pivot) {
    r.note = "pivot not reachable from the anchors; loop left unspliced";
    return r;
  }
  std::vector<NodeId> route = to_pivot->nodes;
  route.insert(route.end(), oriented_tour.walk.begin() + 1, oriented_tour.walk.end());
  route.insert(route.end(), from_pivot->nodes.begin() + 1, from_pivot->nodes.end());
  r.path = collapse_repeats(route);
  r.spliced = true;
  return r;
}

bool rank_before(const ClusterRankKey& a, const ClusterRankKey& b) {
  if (a.has_loop != b.has_loop) return a.has_loop;
  if (a.loop_lifespan != b.loop_lifespan) return a.loop_lifespan > b.loop_lifespan;
  if (a.size != b.size) return a.size > b.size;
  if (a.backbone_cost != b.backbone_cost) return a.backbone_cost < b.backbone_cost;
  return a.index < b.index;
}

std::vector<std::size_t> rank_clusters(const std::vector<ClusterRankKey>& keys) {
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rank_before(keys[a], keys[b]); });
  return order;
}

SkeletonSet extract_skeletons(const SkeletonInputs& in) {
  if (!in.graph || !in.distances || !in.metric || !in.selected || !in.scales) {
    throw Error("extract_skeletons: missing input");
  }
  validate(in.splice);
  const HypothesisGraph& graph = *in.graph;
  SkeletonSet out;
  std::vector<double> progress(graph.size());
  for (const auto& n : graph.nodes) progress[n.id] = n.progress;

  const SparseMetricGraph g0 = threshold_graph(*in.metric, in.scales->eps_h0);
  out.clusters = extract_clusters(g0, graph, *in.distances);

  std::vector<SparseMetricGraph> loop_graphs;
  for (std::size_t i = 0; i < in.selected->h1.size(); ++i) {
    LoopFeature loop;
    loop.pair = in.selected->h1[i];
    loop.eps = in.scales->eps_per_loop.at(i);
    loop.lifespan = loop.pair.capped_lifespan(in.metric->tau_value);
    loop_graphs.push_back(threshold_graph(*in.metric, loop.eps));
    loop.support = localize_loop(loop.pair, loop_graphs.back());
    if (loop.support.empty()) out.warnings.push_back("H1 pair without representative skipped");
    out.loops.push_back(std::move(loop));
  }
  out.assignment = assign_loops(out.loops, out.clusters);
  for (std::size_t l = 0; l < out.loops.size(); ++l) out.loops[l].cluster = out.assignment.cluster_of_loop[l];

  std::vector<Skeleton> skeletons;
  std::vector<ClusterRankKey> keys;
  for (const auto& cluster : out.clusters) {
    Skeleton sk;
    sk.cluster = cluster.index;
    sk.backbone = backbone(cluster, g0);
    sk.path = sk.backbone.nodes;
    sk.route_graph = g0;
    sk.principal_loop = out.assignment.principal_of_cluster[cluster.index];

    if (sk.principal_loop) {
      const LoopFeature& loop = out.loops[*sk.principal_loop];
      const SparseMetricGraph& gb = loop_graphs[*sk.principal_loop];
      sk.stats.loop_lifespan = loop.lifespan;
      auto rep = loop.pair.support_vertices();
      if (auto tour = cycle_tour(loop.support, rep, gb, progress)) {
        NodeId pivot = choose_pivot(*tour, cluster, progress);
        Tour oriented = orient_tour(*tour, pivot);
        SparseMetricGraph loop_edges = induced(gb, loop.support);
        SparseMetricGraph walk_edges;
        walk_edges.n = gb.n;
        for (std::size_t i = 1; i < oriented.walk.size(); ++i) {
          NodeId a = oriented.walk[i - 1], b = oriented.walk[i];
          walk_edges.edges.push_back(WeightedEdge{std::min(a, b), std::max(a, b), (*in.distances)(a, b)});
        }
        SparseMetricGraph route = union_graph(union_graph(g0, loop_edges), walk_edges);
        SpliceResult sr = splice(sk.backbone, oriented, pivot, route, *in.distances, in.splice, loop.eps);
        if (sr.note) out.warnings.push_back("cluster " + std::to_string(cluster.index) + ": " + *sr.note);
        if (sr.spliced) {
          sk.path = sr.path;
          sk.spliced = true;
          sk.pivot = pivot;
          sk.route_graph = std::move(route);
          std::set<NodeId> tv(oriented.walk.begin(), oriented.walk.end());
          sk.tour_vertices.assign(tv.begin(), tv.end());
          for (std::size_t i = 1; i < oriented.walk.size(); ++i) {
            sk.tour_edges.emplace_back(oriented.walk[i - 1], oriented.walk[i]);
          }
        }
      } else {
        out.warnings.push_back("cluster " + std::to_string(cluster.index) + ": loop tour could not be closed");
      }
    }

    std::set<std::string> paths;
    for (auto v : sk.path) {
      for (const auto& src : graph.nodes[v].provenance) paths.insert(src.path_id);
    }
    sk.stats.contributing_paths = paths.size();
    if (sk.path.size() > 1) {
      double total = 0.0;
      for (std::size_t i = 1; i < sk.path.size(); ++i) total += (*in.distances)(sk.path[i - 1], sk.path[i]);
      sk.stats.average_edge_weight = total / static_cast<double>(sk.path.size() - 1);
    }
    keys.push_back(ClusterRankKey{sk.principal_loop.has_value(), sk.stats.loop_lifespan, cluster.members.size(),
                                  sk.backbone.cost, cluster.index});
    skeletons.push_back(std::move(sk));
  }
  for (auto idx : rank_clusters(keys)) out.skeletons.push_back(std::move(skeletons[idx]));
  return out;
}

}  // namespace hypotopo
