#include <cmath>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "hypotopo/error.hpp"
#include "hypotopo/ghg.hpp"
#include "hypotopo/relation.hpp"
#include "hypotopo/trace_model.hpp"

using namespace hypotopo;

namespace {

ReasoningPath path(std::string id, std::vector<std::pair<std::string, double>> steps) {
  ReasoningPath p;
  p.path_id = std::move(id);
  for (auto& [t, c] : steps) p.steps.push_back({t, c, {}, {}});
  return p;
}

ProblemInstance instance(std::vector<ReasoningPath> paths) {
  ProblemInstance inst;
  inst.instance_id = "g/1";
  inst.question = "q";
  inst.paths = std::move(paths);
  return inst;
}

// Scripted oracle: answers from a fixed code and records each request.
class FixedOracle final : public RelationOracle {
 public:
  FixedOracle(std::size_t cap, RelationCode code) : RelationOracle(cap), code_(code) {}
  std::size_t pairs_seen = 0;

 protected:
  OracleReply do_label(std::span<const RelationQuery> q) override {
    pairs_seen += q.size();
    return {OracleReply::Status::ok, std::vector<RelationCode>(q.size(), code_), 0};
  }

 private:
  RelationCode code_;
};

}  // namespace

TEST_CASE("jaccard similarity") {
  CHECK(jaccard_similarity("a b c", "a b c") == 1.0);
  CHECK(jaccard_similarity("a b c", "d e f") == 0.0);
  CHECK(jaccard_similarity("a b c", "b c d") == 0.5);
  CHECK(jaccard_similarity("", "") == 1.0);
  MergePolicy cos;
  cos.similarity_mode = SimilarityMode::embedding_cosine;
  CHECK_THROWS_AS(similarity("a", "b", cos), ConfigError);
  EmbeddingTable t{{"a", {1.0, 0.0}}, {"b", {0.6, 0.8}}};
  CHECK(similarity("a", "b", cos, &t) == doctest::Approx(0.6));
  MergePolicy blend;
  blend.similarity_mode = SimilarityMode::blend;
  blend.blend_weight = 0.25;
  CHECK(similarity("a", "b", blend, &t) == doctest::Approx(0.25 * 0.6));
}

TEST_CASE("duplicate paths merge node by node") {
  auto p = path("a", {{"x = 1", 0.8}, {"y = 2", 0.6}, {"z = 3", 0.4}});
  auto q = p;
  q.path_id = "b";
  auto g = build_graph(instance({p, q}));
  REQUIRE(g.size() == 3);
  for (const auto& n : g.nodes) CHECK(n.provenance.size() == 2);
}

TEST_CASE("single path is a chain") {
  auto g = build_graph(instance({path("a", {{"one", 0.5}, {"two", 0.5}, {"three", 0.5}, {"four", 0.5}})}));
  CHECK(g.size() == 4);
  CHECK(g.edges.size() == 3);
  for (const auto& e : g.edges) CHECK(e.kind == EdgeKind::adjacency);
}

TEST_CASE("merge gate at theta 1 never fires") {
  auto p = path("a", {{"x = 1", 0.8}, {"y = 2", 0.6}});
  auto q = p;
  q.path_id = "b";
  MergePolicy strict;
  strict.theta_merge = 1.0;
  CHECK(build_graph(instance({p, q}), strict).size() == 4);
}

TEST_CASE("merged confidence and progress") {
  auto a = path("a", {{"same", 0.8}});
  auto b = path("b", {{"same", 0.6}});
  auto g = build_graph(instance({a, b}));
  REQUIRE(g.size() == 1);
  CHECK(g.nodes[0].confidence == doctest::Approx(0.7));

  auto c = path("c", {{"same", 0.6}});
  auto g3 = build_graph(instance({path("a", {{"same", 0.9}}), b, c}));
  CHECK(g3.nodes[0].confidence == doctest::Approx(0.7));

  ProblemInstance inst = instance({a, b});
  inst.paths[0].steps[0].raw_progress = 0.3;
  inst.paths[1].steps[0].raw_progress = 0.9;
  CHECK(build_graph(inst).nodes[0].progress == 0.9);
}

TEST_CASE("graph invariants on random instances") {
  std::mt19937_64 rng(5);
  const char* vocab[] = {"x = 1", "x = 2", "y = 3", "sum is 4", "so 4", "the answer", "check 3", "add"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ReasoningPath> paths;
    std::size_t total = 0;
    const int n = 1 + static_cast<int>(rng() % 4);
    for (int p = 0; p < n; ++p) {
      std::vector<std::pair<std::string, double>> steps;
      const int m = 1 + static_cast<int>(rng() % 5);
      for (int s = 0; s < m; ++s) steps.push_back({vocab[rng() % 8], (rng() % 101) / 100.0});
      total += m;
      paths.push_back(path("p" + std::to_string(p), steps));
    }
    auto inst = instance(paths);
    auto g = build_graph(inst);
    CHECK(g.size() <= total);
    std::set<std::pair<std::string, std::size_t>> seen;
    for (const auto& node : g.nodes) {
      double sum = 0.0;
      for (const auto& src : node.provenance) {
        CHECK(seen.insert({src.path_id, src.step_index}).second);
        const auto& pp = *std::find_if(inst.paths.begin(), inst.paths.end(),
                                       [&](const ReasoningPath& x) { return x.path_id == src.path_id; });
        sum += pp.steps[src.step_index].confidence;
      }
      CHECK(std::abs(node.confidence - sum / node.provenance.size()) <= 1e-12);
    }
    CHECK(seen.size() == total);
    CHECK(serialize_graph(g) == serialize_graph(build_graph(inst)));
    // every path is a walk
    for (const auto& p : inst.paths) {
      for (std::size_t s = 1; s < p.steps.size(); ++s) {
        auto u = g.node_of(p.path_id, s - 1), v = g.node_of(p.path_id, s);
        if (u == v) continue;
        bool linked = std::any_of(g.edges.begin(), g.edges.end(),
                                  [&](const HypothesisEdge& e) { return e.src == u && e.dst == v; });
        CHECK(linked);
      }
    }
  }
}

TEST_CASE("candidate pairs") {
  auto g = build_graph(instance({path("a", {{"a1", 0.5}, {"a2", 0.5}, {"a3", 0.5}})}));
  auto c = build_candidate_pairs(g, 0.1);
  CHECK(c.longitudinal.size() == 2);
  CHECK(c.lateral.empty());

  ProblemInstance two = instance({path("a", {{"left", 0.5}}), path("b", {{"right", 0.5}})});
  two.paths[0].steps[0].raw_progress = 0.5;
  two.paths[1].steps[0].raw_progress = 0.5;
  auto c2 = build_candidate_pairs(build_graph(two), 0.1);
  REQUIRE(c2.lateral.size() == 1);
  CHECK(c2.lateral[0] == NodePair{0, 1});
}

TEST_CASE("candidate pairs match a brute-force scan") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<ReasoningPath> paths;
    for (int p = 0; p < 3; ++p) {
      std::vector<std::pair<std::string, double>> steps;
      for (int s = 0; s < 4; ++s) steps.push_back({"t" + std::to_string(rng() % 12), 0.5});
      paths.push_back(path("p" + std::to_string(p), steps));
    }
    auto g = build_graph(instance(paths));
    auto c = build_candidate_pairs(g, 0.1);
    std::set<std::pair<NodeId, NodeId>> edge;
    for (const auto& e : g.edges) edge.insert({std::min(e.src, e.dst), std::max(e.src, e.dst)});
    std::set<std::pair<NodeId, NodeId>> lateral;
    for (NodeId a = 0; a < g.size(); ++a) {
      for (NodeId b = a + 1; b < g.size(); ++b) {
        if (!edge.count({a, b}) && std::abs(g.nodes[a].progress - g.nodes[b].progress) < 0.1) lateral.insert({a, b});
      }
    }
    std::set<std::pair<NodeId, NodeId>> got_lat, got_long;
    for (auto p : c.lateral) got_lat.insert({p.a, p.b});
    for (auto p : c.longitudinal) got_long.insert({std::min(p.a, p.b), std::max(p.a, p.b)});
    CHECK(got_lat == lateral);
    std::set<std::pair<NodeId, NodeId>> adjacency;
    for (const auto& e : g.edges) {
      if (e.kind == EdgeKind::adjacency) adjacency.insert({std::min(e.src, e.dst), std::max(e.src, e.dst)});
    }
    CHECK(got_long == adjacency);
    CHECK(got_long.size() == c.longitudinal.size());
  }
}

TEST_CASE("chunking") {
  std::vector<NodePair> pairs(45);
  auto sizes = [](const std::vector<std::vector<NodePair>>& ch) {
    std::vector<std::size_t> s;
    for (const auto& c : ch) s.push_back(c.size());
    return s;
  };
  CHECK(sizes(chunk_pairs(pairs, 20)) == std::vector<std::size_t>{20, 20, 5});
  CHECK(chunk_pairs(std::vector<NodePair>{}, 20).empty());
  CHECK(chunk_pairs(std::vector<NodePair>(20), 20).size() == 1);
}

TEST_CASE("rule labels") {
  CHECK(rule_label("x=3", "x=5") == RelationCode::refute);
  CHECK(rule_label("x=3", "x=3") == RelationCode::support);
  CHECK(rule_label("the cat sat", "prices rose today") == RelationCode::neutral);
  CHECK(rule_label("the result is true", "the result is false") == RelationCode::refute);
  CHECK(rule_label("it is prime", "it is not prime") == RelationCode::refute);
  CHECK(rule_label("so x=3", "so x=3 holds") == RelationCode::support);
}

TEST_CASE("relation term") {
  RelationParams p;
  CHECK(relation_term(RelationCode::refute, p) == 1000.0);
  CHECK(relation_term(RelationCode::support, p) == -1.0);
  CHECK(relation_term(RelationCode::neutral, p) == 0.0);
  RelationTable t;
  t.set(2, 1, RelationCode::refute);
  CHECK(t.term(1, 2, p) == t.term(2, 1, p));
  CHECK(t.code(0, 1) == RelationCode::neutral);
  RelationParams bad;
  bad.chunk_size = 0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("budget caps provider calls") {
  // 25 single-pair chunks against a cap of 19
  std::vector<ReasoningPath> paths;
  for (int p = 0; p < 25; ++p) paths.push_back(path("p" + std::to_string(p), {{"root", 0.5}, {"leaf " + std::to_string(p), 0.5}}));
  auto g = build_graph(instance(paths));
  RelationParams params;
  params.chunk_size = 1;
  FixedOracle oracle(19, RelationCode::support);
  auto cand = build_candidate_pairs(g, 0.0);
  REQUIRE(cand.size() == 25);
  auto r = infer_relations(g, params, 0.0, oracle);
  CHECK(oracle.calls_made() == 19);
  CHECK(r.over_budget_chunks == 6);
  std::size_t support = 0;
  for (const auto& [k, c] : r.table.entries()) support += c == RelationCode::support;
  CHECK(support == 19);
}

TEST_CASE("relation cache skips labelled pairs") {
  auto g = build_graph(instance({path("a", {{"x = 1", 0.5}, {"x = 2", 0.5}})}));
  RelationCache cache;
  FixedOracle first(19, RelationCode::neutral);
  auto r1 = infer_relations(g, {}, 0.1, first, &cache);
  CHECK(first.calls_made() == 1);
  FixedOracle second(19, RelationCode::neutral);
  auto r2 = infer_relations(g, {}, 0.1, second, &cache);
  CHECK(second.calls_made() == 0);
  CHECK(r2.cache_hits == 1);
}
