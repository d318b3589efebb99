#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Nothing here calls into the library's algorithms.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "hypotopo/metric_space.hpp"

namespace oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Point {
  int dim;
  double birth;
  double death;
  friend bool operator<(const Point& a, const Point& b) {
    return std::tie(a.dim, a.birth, a.death) < std::tie(b.dim, b.birth, b.death);
  }
  friend bool operator==(const Point& a, const Point& b) {
    return a.dim == b.dim && a.birth == b.birth && a.death == b.death;
  }
};

// Full clique complex up to triangles and a dense boundary matrix reduced
// column by column, with no clearing or other shortcuts. Zero-length pairs
// are kept.
inline std::vector<Point> naive_persistence(const hypotopo::SparseMetricGraph& g) {
  struct Cell {
    int dim;
    std::array<std::size_t, 3> v;
    double value;
  };
  std::map<std::pair<std::size_t, std::size_t>, double> w;
  for (const auto& e : g.edges) w[{std::min(e.u, e.v), std::max(e.u, e.v)}] = e.weight;
  auto weight = [&](std::size_t a, std::size_t b) -> const double* {
    auto it = w.find({std::min(a, b), std::max(a, b)});
    return it == w.end() ? nullptr : &it->second;
  };

  std::vector<Cell> cells;
  for (std::size_t i = 0; i < g.n; ++i) cells.push_back({0, {i, 0, 0}, 0.0});
  for (const auto& [k, x] : w) cells.push_back({1, {k.first, k.second, 0}, x});
  for (std::size_t a = 0; a < g.n; ++a) {
    for (std::size_t b = a + 1; b < g.n; ++b) {
      for (std::size_t c = b + 1; c < g.n; ++c) {
        auto ab = weight(a, b), ac = weight(a, c), bc = weight(b, c);
        if (ab && ac && bc) cells.push_back({2, {a, b, c}, std::max({*ab, *ac, *bc})});
      }
    }
  }
  std::stable_sort(cells.begin(), cells.end(), [](const Cell& x, const Cell& y) {
    return std::tie(x.value, x.dim, x.v) < std::tie(y.value, y.dim, y.v);
  });

  const std::size_t n = cells.size();
  std::map<std::array<std::size_t, 3>, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[cells[i].v] = i;

  std::vector<std::vector<char>> column(n, std::vector<char>(n, 0));
  for (std::size_t j = 0; j < n; ++j) {
    const auto& c = cells[j];
    if (c.dim == 1) {
      column[j][index.at({c.v[0], 0, 0})] = 1;
      column[j][index.at({c.v[1], 0, 0})] = 1;
    } else if (c.dim == 2) {
      column[j][index.at({c.v[0], c.v[1], 0})] = 1;
      column[j][index.at({c.v[0], c.v[2], 0})] = 1;
      column[j][index.at({c.v[1], c.v[2], 0})] = 1;
    }
  }
  auto low = [&](std::size_t j) -> long {
    for (std::size_t i = n; i-- > 0;) {
      if (column[j][i]) return static_cast<long>(i);
    }
    return -1;
  };
  std::vector<long> low_owner(n, -1);
  std::vector<bool> paired(n, false);
  std::vector<Point> out;
  for (std::size_t j = 0; j < n; ++j) {
    long l = low(j);
    while (l >= 0 && low_owner[l] >= 0) {
      const auto& other = column[low_owner[l]];
      for (std::size_t i = 0; i < n; ++i) column[j][i] ^= other[i];
      l = low(j);
    }
    if (l >= 0) {
      low_owner[l] = static_cast<long>(j);
      paired[l] = paired[j] = true;
      out.push_back({cells[l].dim, cells[l].value, cells[j].value});
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!paired[j] && cells[j].dim < 2) {
      bool is_cycle = low(j) < 0;
      if (is_cycle) out.push_back({cells[j].dim, cells[j].value, kInf});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Random graph on n vertices: each pair kept with probability p, weights
// drawn from a small grid so ties are common.
inline hypotopo::SparseMetricGraph random_graph(std::mt19937_64& rng, std::size_t n, double p, int grid = 8) {
  hypotopo::SparseMetricGraph g;
  g.n = n;
  std::bernoulli_distribution keep(p);
  std::uniform_int_distribution<int> level(1, grid);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (keep(rng)) g.edges.push_back({u, v, level(rng) / static_cast<double>(grid)});
    }
  }
  return g;
}

// Mann-Whitney AUC by enumerating every (positive, negative) pair.
inline double pair_count_auc(const std::vector<double>& s, const std::vector<bool>& pos) {
  double credit = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!pos[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (pos[j]) continue;
      pairs += 1.0;
      if (s[i] > s[j]) credit += 1.0;
      else if (s[i] == s[j]) credit += 0.5;
    }
  }
  return credit / pairs;
}

// 1 - 6 sum d^2 / (n (n^2 - 1)); valid without ties.
inline double spearman_formula(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  auto rank = [n](const std::vector<double>& v) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t below = 0;
      for (std::size_t j = 0; j < n; ++j) below += v[j] < v[i];
      r[i] = static_cast<double>(below + 1);
    }
    return r;
  };
  auto rx = rank(x), ry = rank(y);
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  const double nn = static_cast<double>(n);
  return 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
}

// Maximizes the Bernoulli log-likelihood over (b0, b1) on z-scored x by a
// coarse grid followed by repeated local refinement down to `resolution`.
inline std::pair<double, double> grid_logistic(const std::vector<double>& x, const std::vector<bool>& y,
                                               double resolution = 1e-5) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> z;
  for (double v : x) z.push_back((v - mean) / sd);

  auto ll = [&](double b0, double b1) {
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double eta = b0 + b1 * z[i];
      // log(1 + e^eta) without overflow
      const double soft = eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
      s += (y[i] ? eta : 0.0) - soft;
    }
    return s;
  };
  double best0 = 0.0, best1 = 0.0, best = ll(0.0, 0.0);
  double step = 0.25;
  for (double b0 = -8.0; b0 <= 8.0; b0 += step) {
    for (double b1 = -8.0; b1 <= 8.0; b1 += step) {
      const double v = ll(b0, b1);
      if (v > best) best = v, best0 = b0, best1 = b1;
    }
  }
  while (step > resolution) {
    step /= 4.0;
    const double c0 = best0, c1 = best1;
    for (int i = -8; i <= 8; ++i) {
      for (int j = -8; j <= 8; ++j) {
        const double b0 = c0 + i * step, b1 = c1 + j * step;
        const double v = ll(b0, b1);
        if (v > best) best = v, best0 = b0, best1 = b1;
      }
    }
  }
  return {best0, best1};
}

// Every simple path from s to t, with its cost.
inline std::vector<std::pair<std::vector<std::size_t>, double>> all_simple_paths(const hypotopo::SparseMetricGraph& g,
                                                                                 std::size_t s, std::size_t t) {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(g.n);
  for (const auto& e : g.edges) {
    adj[e.u].push_back({e.v, e.weight});
    adj[e.v].push_back({e.u, e.weight});
  }
  std::vector<std::pair<std::vector<std::size_t>, double>> out;
  std::vector<std::size_t> path{s};
  std::vector<bool> seen(g.n, false);
  seen[s] = true;
  std::function<void(std::size_t, double)> go = [&](std::size_t v, double cost) {
    if (v == t) {
      out.push_back({path, cost});
      return;
    }
    for (auto [w, x] : adj[v]) {
      if (seen[w]) continue;
      seen[w] = true;
      path.push_back(w);
      go(w, cost + x);
      path.pop_back();
      seen[w] = false;
    }
  };
  go(s, 0.0);
  return out;
}

// Every simple cycle (length >= 3) as a sorted edge list with its weight.
inline std::vector<std::pair<std::vector<std::pair<std::size_t, std::size_t>>, double>> all_simple_cycles(
    const hypotopo::SparseMetricGraph& g) {
  std::map<std::pair<std::size_t, std::size_t>, double> w;
  for (const auto& e : g.edges) w[{e.u, e.v}] = e.weight;
  std::set<std::vector<std::pair<std::size_t, std::size_t>>> seen;
  std::vector<std::pair<std::vector<std::pair<std::size_t, std::size_t>>, double>> out;
  for (std::size_t s = 0; s < g.n; ++s) {
    for (const auto& e : g.edges) {
      if (e.u != s) continue;
      // paths from e.v back to s avoiding the edge itself, vertices > s only
      hypotopo::SparseMetricGraph h;
      h.n = g.n;
      for (const auto& f : g.edges) {
        if ((f.u == e.u && f.v == e.v) || f.u < s || f.v < s) continue;
        h.edges.push_back(f);
      }
      for (auto& [p, cost] : all_simple_paths(h, e.v, s)) {
        if (p.size() < 3) continue;
        std::vector<std::pair<std::size_t, std::size_t>> edges{{e.u, e.v}};
        for (std::size_t i = 0; i + 1 < p.size(); ++i) edges.push_back({std::min(p[i], p[i + 1]), std::max(p[i], p[i + 1])});
        std::sort(edges.begin(), edges.end());
        if (seen.insert(edges).second) out.push_back({edges, cost + e.weight});
      }
    }
  }
  return out;
}

}  // namespace oracle
