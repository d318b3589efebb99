#include <cmath>
#include <random>

#include "doctest.h"
#include "hypotopo/error.hpp"
#include "hypotopo/homology.hpp"
#include "oracles.hpp"

using namespace hypotopo;

namespace {

SparseMetricGraph square() {
  SparseMetricGraph g;
  g.n = 4;
  const double r2 = std::sqrt(2.0);
  g.edges = {{0, 1, 1.0}, {0, 2, r2}, {0, 3, 1.0}, {1, 2, 1.0}, {1, 3, r2}, {2, 3, 1.0}};
  return g;
}

std::vector<oracle::Point> points(const PersistenceDiagram& d) {
  std::vector<oracle::Point> out;
  for (const auto& p : d.pairs) out.push_back({p.dimension, p.birth, p.death});
  std::sort(out.begin(), out.end());
  return out;
}

PersistencePair pair(int dim, double b, double d) {
  PersistencePair p;
  p.dimension = dim;
  p.birth = b;
  p.death = d;
  return p;
}

}  // namespace

TEST_CASE("filtration fixtures") {
  SparseMetricGraph edge;
  edge.n = 2;
  edge.edges = {{0, 1, 0.5}};
  auto f = build_filtration(edge);
  REQUIRE(f.simplices.size() == 3);
  CHECK(f.simplices[2].dim == 1);
  CHECK(f.simplices[2].value == 0.5);

  auto sq = build_filtration(square());
  std::size_t triangles = 0;
  for (const auto& s : sq.simplices) {
    if (s.dim == 2) {
      ++triangles;
      CHECK(s.value == std::sqrt(2.0));
    }
  }
  CHECK(triangles == 4);

  SparseMetricGraph tri;
  tri.n = 3;
  tri.edges = {{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}};
  auto ft = build_filtration(tri);
  CHECK(std::count_if(ft.simplices.begin(), ft.simplices.end(), [](const Simplex& s) { return s.dim == 2; }) == 1);
  auto dt = compute_persistence(ft);
  for (const auto& p : dt.in_dimension(1)) CHECK(p.lifespan() == 0.0);
}

TEST_CASE("filtration order puts faces first") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 50; ++t) {
    auto g = oracle::random_graph(rng, 6, 0.7);
    auto f = build_filtration(g);
    std::map<std::array<std::size_t, 3>, std::size_t> at;
    for (std::size_t i = 0; i < f.simplices.size(); ++i) {
      const auto& s = f.simplices[i];
      if (i > 0) CHECK(f.simplices[i - 1].value <= s.value);
      at[s.vertices] = i;
      if (s.dim == 1) {
        CHECK(at.count({s.vertices[0], 0, 0}));
        CHECK(at.count({s.vertices[1], 0, 0}));
      } else if (s.dim == 2) {
        CHECK(at.count({s.vertices[0], s.vertices[1], 0}));
        CHECK(at.count({s.vertices[0], s.vertices[2], 0}));
        CHECK(at.count({s.vertices[1], s.vertices[2], 0}));
      }
    }
  }
}

TEST_CASE("unit square diagram") {
  auto d = compute_persistence(build_filtration(square()));
  auto h1 = d.in_dimension(1);
  std::vector<PersistencePair> positive;
  for (const auto& p : h1) {
    if (p.lifespan() > 0) positive.push_back(p);
  }
  REQUIRE(positive.size() == 1);
  CHECK(std::abs(positive[0].birth - 1.0) <= 1e-9);
  CHECK(std::abs(positive[0].death - std::sqrt(2.0)) <= 1e-9);
  CHECK(positive[0].lifespan() == doctest::Approx(0.41421).epsilon(1e-4));
  CHECK(positive[0].support_vertices() == std::vector<std::size_t>{0, 1, 2, 3});

  auto h0 = d.in_dimension(0);
  REQUIRE(h0.size() == 4);
  int finite = 0, infinite = 0;
  for (const auto& p : h0) {
    CHECK(p.birth == 0.0);
    if (p.infinite()) ++infinite;
    else if (p.death == 1.0) ++finite;
  }
  CHECK(finite == 3);
  CHECK(infinite == 1);
  CHECK(points(d) == oracle::naive_persistence(square()));
}

TEST_CASE("reduction matches the naive oracle and union-find") {
  std::mt19937_64 rng(1234);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng() % 6;
    auto g = oracle::random_graph(rng, n, 0.6);
    auto f = build_filtration(g);
    auto d = compute_persistence(f);
    CHECK(points(d) == oracle::naive_persistence(g));

    std::vector<std::pair<double, double>> uf = h0_union_find(f), mine;
    for (const auto& p : d.in_dimension(0)) mine.emplace_back(p.birth, p.death);
    std::sort(uf.begin(), uf.end());
    std::sort(mine.begin(), mine.end());
    CHECK(uf == mine);
    CHECK(d.in_dimension(0).size() == n);

    for (const auto& p : d.in_dimension(1)) {
      if (p.lifespan() == 0) continue;
      std::map<std::size_t, int> degree;
      std::map<std::pair<std::size_t, std::size_t>, double> w;
      for (const auto& e : g.edges) w[{e.u, e.v}] = e.weight;
      for (auto [u, v] : p.representative) {
        ++degree[u];
        ++degree[v];
        CHECK(w.at({std::min(u, v), std::max(u, v)}) <= p.birth);
      }
      for (auto [v, k] : degree) CHECK(k % 2 == 0);
      CHECK_FALSE(p.representative.empty());
    }
  }
}

TEST_CASE("infinite H0 pairs count components") {
  SparseMetricGraph g;
  g.n = 5;
  g.edges = {{0, 1, 0.3}, {2, 3, 0.4}};
  auto d = compute_persistence(build_filtration(g));
  auto h0 = d.in_dimension(0);
  CHECK(std::count_if(h0.begin(), h0.end(), [](const PersistencePair& p) { return p.infinite(); }) == 3);
}

TEST_CASE("feature selection") {
  PersistenceDiagram d;
  d.pairs = {pair(1, 0, 3), pair(1, 0, 2), pair(1, 0, 1)};
  SelectionPolicy k2;
  k2.K = 2;
  auto s = select_features(d, k2);
  REQUIRE(s.h1.size() == 2);
  CHECK(s.h1[0].lifespan() == 3);
  CHECK(s.h1[1].lifespan() == 2);

  PersistenceDiagram zero;
  zero.pairs = {pair(1, 1, 1), pair(0, 0, 0)};
  auto z = select_features(zero, {});
  CHECK(z.h0.empty());
  CHECK(z.h1.empty());

  PersistenceDiagram ten;
  for (int i = 1; i <= 10; ++i) ten.pairs.push_back(pair(1, 0, i));
  SelectionPolicy q;
  q.mode = SelectionMode::top_q_percent;
  q.q = 20;
  CHECK(select_features(ten, q).h1.size() == 2);

  PersistenceDiagram inf;
  inf.pairs = {pair(0, 0, 5), pair(0, 0, kInfinity)};
  CHECK(select_features(inf, {}).h0.front().infinite());
}

TEST_CASE("operating scales") {
  SelectedFeatures s;
  s.h0 = {pair(0, 0, 1), pair(0, 0, 1), pair(0, 0, 1), pair(0, 0, kInfinity)};
  CHECK(operating_scales(s, 9.0).eps_h0 == 1.0);
  s.h0 = {pair(0, 0, 1), pair(0, 0, 2), pair(0, 0, 3), pair(0, 0, 4)};
  CHECK(operating_scales(s, 9.0).eps_h0 == 2.0);
  s.h1 = {pair(1, 1, std::sqrt(2.0))};
  auto sc = operating_scales(s, 9.0);
  REQUIRE(sc.eps_per_loop.size() == 1);
  CHECK(sc.eps_per_loop[0] == doctest::Approx(0.99 * std::sqrt(2.0)));
  CHECK(sc.eps_per_loop[0] < std::sqrt(2.0));
  s.h0 = {pair(0, 0, kInfinity)};
  auto fb = operating_scales(s, 9.0);
  CHECK(fb.eps_h0_fallback);
  CHECK(fb.eps_h0 == 9.0);
}

TEST_CASE("bottleneck distance") {
  std::vector<std::pair<double, double>> a{{0.0, 2.0}}, none, shifted{{0.1, 2.1}};
  CHECK(bottleneck_distance(a, a) == 0.0);
  CHECK(bottleneck_distance(a, none) == 1.0);
  CHECK(bottleneck_distance(a, shifted) == doctest::Approx(0.1));
  std::vector<std::pair<double, double>> i1{{0.0, kInfinity}}, i2{{0.3, kInfinity}};
  CHECK(bottleneck_distance(i1, i2) == doctest::Approx(0.3));
  CHECK(bottleneck_distance(i1, none) == kInfinity);
}

TEST_CASE("bottleneck stability under weight noise") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 20; ++t) {
    auto g = oracle::random_graph(rng, 6, 0.7, 20);
    auto base = compute_persistence(build_filtration(g));
    for (double sigma : {0.01, 0.05, 0.1}) {
      auto h = g;
      std::uniform_real_distribution<double> u(-sigma, sigma);
      for (auto& e : h.edges) e.weight = std::max(0.0, e.weight + u(rng));
      auto moved = compute_persistence(build_filtration(h));
      CHECK(bottleneck_distance(base, moved, 0) <= sigma + 1e-9);
      CHECK(bottleneck_distance(base, moved, 1) <= sigma + 1e-9);
    }
  }
}
