#include "hypotopo/homology.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

#include "hypotopo/union_find.hpp"

namespace hypotopo {

namespace {

bool filtration_less(const Simplex& a, const Simplex& b) {
  if (a.value != b.value) return a.value < b.value;
  if (a.dim != b.dim) return a.dim < b.dim;
  return a.vertices < b.vertices;
}

using Column = std::vector<std::size_t>;  // ascending row indices

void add_into(Column& target, const Column& source) {
  Column out;
  out.reserve(target.size() + source.size());
  std::set_symmetric_difference(target.begin(), target.end(), source.begin(), source.end(), std::back_inserter(out));
  target.swap(out);
}

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

bool pair_less(const PersistencePair& a, const PersistencePair& b) {
  const double la = a.lifespan(), lb = b.lifespan();
  if (la != lb) return la > lb;
  if (a.birth != b.birth) return a.birth < b.birth;
  if (a.dimension == 0) return a.vertex < b.vertex;
  return a.representative < b.representative;
}

std::size_t max_bipartite_matching(const std::vector<std::vector<std::size_t>>& adj, std::size_t right_size) {
  std::vector<std::size_t> match_right(right_size, kNone);
  std::vector<char> visited;
  std::size_t matched = 0;
  // Iterative Kuhn augmenting paths.
  for (std::size_t start = 0; start < adj.size(); ++start) {
    visited.assign(right_size, 0);
    std::vector<std::pair<std::size_t, std::size_t>> stack;  // (left vertex, next edge slot)
    std::vector<std::size_t> via;                            // right vertex used to reach stack[i]
    stack.emplace_back(start, 0);
    via.push_back(kNone);
    bool found = false;
    while (!stack.empty() && !found) {
      auto& [u, slot] = stack.back();
      if (slot >= adj[u].size()) {
        stack.pop_back();
        via.pop_back();
        continue;
      }
      std::size_t r = adj[u][slot++];
      if (visited[r]) continue;
      visited[r] = 1;
      if (match_right[r] == kNone) {
        // Flip the alternating path.
        std::size_t right = r;
        for (std::size_t i = stack.size(); i-- > 0;) {
          std::size_t left = stack[i].first;
          std::size_t prev_right = via[i];
          match_right[right] = left;
          right = prev_right;
        }
        found = true;
      } else {
        stack.emplace_back(match_right[r], 0);
        via.push_back(r);
      }
    }
    if (found) ++matched;
  }
  return matched;
}

double linf(std::pair<double, double> a, std::pair<double, double> b) {
  return std::max(std::abs(a.first - b.first), std::abs(a.second - b.second));
}

double diag_cost(std::pair<double, double> a) { return (a.second - a.first) / 2.0; }

bool matchable(const std::vector<std::pair<double, double>>& a, const std::vector<std::pair<double, double>>& b,
               double eps) {
  const std::size_t p = a.size(), q = b.size();
  // Left: a[0..p) then diagonal copies of b. Right: b[0..q) then diagonal copies of a.
  std::vector<std::vector<std::size_t>> adj(p + q);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < q; ++j) {
      if (linf(a[i], b[j]) <= eps) adj[i].push_back(j);
    }
    if (diag_cost(a[i]) <= eps) adj[i].push_back(q + i);
  }
  for (std::size_t j = 0; j < q; ++j) {
    if (diag_cost(b[j]) <= eps) adj[p + j].push_back(j);
    for (std::size_t i = 0; i < p; ++i) adj[p + j].push_back(q + i);
  }
  return max_bipartite_matching(adj, p + q) == p + q;
}

}  // namespace

std::vector<std::size_t> PersistencePair::support_vertices() const {
  if (dimension == 0) return {vertex};
  std::vector<std::size_t> out;
  for (auto [u, v] : representative) {
    out.push_back(u);
    out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<PersistencePair> PersistenceDiagram::in_dimension(int dim) const {
  std::vector<PersistencePair> out;
  for (const auto& p : pairs) {
    if (p.dimension == dim) out.push_back(p);
  }
  return out;
}

Filtration build_filtration(const SparseMetricGraph& graph) {
  Filtration f;
  f.vertex_count = graph.n;
  for (std::size_t v = 0; v < graph.n; ++v) f.simplices.push_back(Simplex{0, {v, 0, 0}, 0.0});

  std::vector<std::map<std::size_t, double>> adj(graph.n);
  for (const auto& e : graph.edges) {
    auto u = std::min(e.u, e.v), v = std::max(e.u, e.v);
    f.simplices.push_back(Simplex{1, {u, v, 0}, e.weight});
    adj[u][v] = e.weight;
    adj[v][u] = e.weight;
  }
  for (std::size_t a = 0; a < graph.n; ++a) {
    for (auto itb = adj[a].upper_bound(a); itb != adj[a].end(); ++itb) {
      const std::size_t b = itb->first;
      for (auto itc = adj[a].upper_bound(b); itc != adj[a].end(); ++itc) {
        const std::size_t c = itc->first;
        auto bc = adj[b].find(c);
        if (bc == adj[b].end()) continue;
        double value = std::max({itb->second, itc->second, bc->second});
        f.simplices.push_back(Simplex{2, {a, b, c}, value});
      }
    }
  }
  std::sort(f.simplices.begin(), f.simplices.end(), filtration_less);
  return f;
}

PersistenceDiagram compute_persistence(const Filtration& filtration) {
  const auto& s = filtration.simplices;
  const std::size_t m = s.size();
  std::vector<std::size_t> vertex_index(filtration.vertex_count, kNone);
  std::map<VertexPair, std::size_t> edge_index;
  for (std::size_t i = 0; i < m; ++i) {
    if (s[i].dim == 0) vertex_index[s[i].vertices[0]] = i;
    if (s[i].dim == 1) edge_index[{s[i].vertices[0], s[i].vertices[1]}] = i;
  }

  std::vector<Column> reduced(m);
  std::vector<Column> cycles(m);  // V columns, tracked for edges only
  std::vector<std::size_t> pivot_owner(m, kNone);
  std::vector<char> paired(m, 0);

  PersistenceDiagram dgm;
  dgm.vertex_count = filtration.vertex_count;

  auto edge_rep = [&](const Column& cycle) {
    std::vector<VertexPair> rep;
    rep.reserve(cycle.size());
    for (std::size_t idx : cycle) rep.emplace_back(s[idx].vertices[0], s[idx].vertices[1]);
    std::sort(rep.begin(), rep.end());
    return rep;
  };

  for (std::size_t j = 0; j < m; ++j) {
    const Simplex& sx = s[j];
    Column& col = reduced[j];
    if (sx.dim == 1) {
      col = {vertex_index[sx.vertices[0]], vertex_index[sx.vertices[1]]};
      std::sort(col.begin(), col.end());
      cycles[j] = {j};
    } else if (sx.dim == 2) {
      const auto [a, b, c] = sx.vertices;
      col = {edge_index.at({a, b}), edge_index.at({a, c}), edge_index.at({b, c})};
      std::sort(col.begin(), col.end());
    }
    while (!col.empty() && pivot_owner[col.back()] != kNone) {
      const std::size_t k = pivot_owner[col.back()];
      add_into(col, reduced[k]);
      if (sx.dim == 1) add_into(cycles[j], cycles[k]);
    }
    if (col.empty()) continue;
    const std::size_t low = col.back();
    pivot_owner[low] = j;
    paired[low] = 1;
    paired[j] = 1;
    if (sx.dim == 1) {
      PersistencePair p;
      p.dimension = 0;
      p.birth = s[low].value;
      p.death = sx.value;
      p.vertex = s[low].vertices[0];
      dgm.pairs.push_back(std::move(p));
    } else if (sx.dim == 2) {
      PersistencePair p;
      p.dimension = 1;
      p.birth = s[low].value;
      p.death = sx.value;
      p.representative = edge_rep(cycles[low]);
      dgm.pairs.push_back(std::move(p));
    }
  }

  for (std::size_t j = 0; j < m; ++j) {
    if (paired[j]) continue;
    if (s[j].dim == 0) {
      PersistencePair p;
      p.dimension = 0;
      p.birth = s[j].value;
      p.vertex = s[j].vertices[0];
      dgm.pairs.push_back(std::move(p));
    } else if (s[j].dim == 1 && reduced[j].empty()) {
      PersistencePair p;
      p.dimension = 1;
      p.birth = s[j].value;
      p.representative = edge_rep(cycles[j]);
      dgm.pairs.push_back(std::move(p));
    }
  }
  std::stable_sort(dgm.pairs.begin(), dgm.pairs.end(), [](const PersistencePair& a, const PersistencePair& b) {
    if (a.dimension != b.dimension) return a.dimension < b.dimension;
    if (a.birth != b.birth) return a.birth < b.birth;
    return a.death < b.death;
  });
  return dgm;
}

std::vector<std::pair<double, double>> h0_union_find(const Filtration& filtration) {
  UnionFind uf(filtration.vertex_count);
  std::vector<std::pair<double, double>> out;
  for (const auto& sx : filtration.simplices) {
    if (sx.dim != 1) continue;
    // Every vertex is born at 0, so the elder rule never distinguishes them.
    if (uf.unite(sx.vertices[0], sx.vertices[1])) out.emplace_back(0.0, sx.value);
  }
  for (std::size_t c = 0; c < uf.components(); ++c) out.emplace_back(0.0, kInfinity);
  std::sort(out.begin(), out.end());
  return out;
}

SelectedFeatures select_features(const PersistenceDiagram& diagram, const SelectionPolicy& policy) {
  SelectedFeatures out;
  for (int dim = 0; dim <= 1; ++dim) {
    std::vector<PersistencePair> eligible;
    for (const auto& p : diagram.pairs) {
      if (p.dimension == dim && p.lifespan() > 0.0) eligible.push_back(p);
    }
    std::sort(eligible.begin(), eligible.end(), pair_less);
    std::size_t keep = 0;
    if (policy.mode == SelectionMode::top_k) {
      keep = policy.K;
    } else {
      keep = static_cast<std::size_t>(std::ceil(policy.q * static_cast<double>(eligible.size()) / 100.0 - 1e-9));
    }
    if (eligible.size() > keep) eligible.resize(keep);
    (dim == 0 ? out.h0 : out.h1) = std::move(eligible);
  }
  return out;
}

OperatingScales operating_scales(const SelectedFeatures& selected, double tau_value) {
  OperatingScales scales;
  std::vector<double> deaths;
  for (const auto& p : selected.h0) {
    if (!p.infinite()) deaths.push_back(p.death);
  }
  if (deaths.empty()) {
    scales.eps_h0 = tau_value;
    scales.eps_h0_fallback = true;
    scales.warnings.push_back("no finite H0 death among selected features; cluster scale falls back to tau");
  } else {
    std::sort(deaths.begin(), deaths.end());
    scales.eps_h0 = deaths[(deaths.size() - 1) / 2];
  }
  for (const auto& p : selected.h1) scales.eps_per_loop.push_back(p.infinite() ? tau_value : 0.99 * p.death);
  return scales;
}

double bottleneck_distance(const std::vector<std::pair<double, double>>& a,
                           const std::vector<std::pair<double, double>>& b) {
  std::vector<std::pair<double, double>> fa, fb;
  std::vector<double> ia, ib;
  for (auto p : a) (p.second == kInfinity ? ia.push_back(p.first) : fa.push_back(p));
  for (auto p : b) (p.second == kInfinity ? ib.push_back(p.first) : fb.push_back(p));
  if (ia.size() != ib.size()) return kInfinity;
  std::sort(ia.begin(), ia.end());
  std::sort(ib.begin(), ib.end());
  double inf_part = 0.0;
  for (std::size_t i = 0; i < ia.size(); ++i) inf_part = std::max(inf_part, std::abs(ia[i] - ib[i]));

  std::vector<double> candidates{0.0};
  for (auto p : fa) candidates.push_back(diag_cost(p));
  for (auto p : fb) candidates.push_back(diag_cost(p));
  for (auto p : fa) {
    for (auto q : fb) candidates.push_back(linf(p, q));
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  std::size_t lo = 0, hi = candidates.size() - 1;  // the largest candidate is always feasible
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (matchable(fa, fb, candidates[mid])) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return std::max(inf_part, candidates[lo]);
}

double bottleneck_distance(const PersistenceDiagram& a, const PersistenceDiagram& b, int dim) {
  auto points = [dim](const PersistenceDiagram& d) {
    std::vector<std::pair<double, double>> out;
    for (const auto& p : d.pairs) {
      if (p.dimension == dim) out.emplace_back(p.birth, p.death);
    }
    return out;
  };
  return bottleneck_distance(points(a), points(b));
}

std::string diagram_csv(const PersistenceDiagram& diagram) {
  std::ostringstream out;
  out.precision(17);
  out << "dimension,birth,death,lifespan\n";
  for (const auto& p : diagram.pairs) {
    out << p.dimension << ',' << p.birth << ',';
    if (p.infinite()) {
      out << "inf,inf\n";
    } else {
      out << p.death << ',' << p.lifespan() << '\n';
    }
  }
  return out.str();
}

}  // namespace hypotopo
