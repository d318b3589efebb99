#include <random>

#include "doctest.h"
#include "hypotopo/aggregate.hpp"
#include "hypotopo/text.hpp"

using namespace hypotopo;

namespace {

HypothesisNode answer_node(NodeId id, const std::string& answer, double confidence) {
  HypothesisNode n;
  n.id = id;
  n.text = "the answer is " + answer;
  n.canon = canonicalize(n.text);
  n.confidence = confidence;
  n.progress = 1.0;
  n.terminal = true;
  n.answer = answer;
  return n;
}

HypothesisNode step_node(NodeId id, const std::string& text, double confidence = 0.5) {
  HypothesisNode n;
  n.id = id;
  n.text = text;
  n.canon = canonicalize(text);
  n.confidence = confidence;
  n.progress = 0.5;
  return n;
}

Skeleton skeleton_over(std::vector<NodeId> path, std::size_t n) {
  Skeleton s;
  s.path = std::move(path);
  s.route_graph.n = n;
  return s;
}

}  // namespace

TEST_CASE("vote weights") {
  CHECK(vote_weight(0.9, 2, false, 0.5) == doctest::Approx(0.3));
  CHECK(vote_weight(0.9, 2, true, 0.5) == doctest::Approx(0.45));
  CHECK(vote_weight(0.9, 2, true, 0.5, false) == doctest::Approx(0.3));
  CHECK(vote_weight(0.0, 7, true, 3.0) == 0.0);
}

TEST_CASE("tally and tie rules") {
  VoteTally t;
  t.weights = {{"4", 0.7}, {"5", 0.5}};
  t.confidence = {{"4", 1.0}, {"5", 1.0}};
  settle(t);
  CHECK(t.winner == "4");
  CHECK(t.margin == doctest::Approx(0.2));

  VoteTally tie;
  tie.weights = {{"5", 0.5}, {"4", 0.5}};
  tie.confidence = {{"4", 0.9}, {"5", 0.9}};
  settle(tie);
  CHECK(tie.winner == "4");
  CHECK(tie.margin == 0.0);

  tie.confidence["5"] = 1.0;
  settle(tie);
  CHECK(tie.winner == "5");

  VoteTally empty;
  settle(empty);
  CHECK(empty.winner == kNoAnswer);
  CHECK_FALSE(empty.has_answer());
}

TEST_CASE("aggregation over skeletons") {
  HypothesisGraph g;
  g.nodes = {step_node(0, "x = 1"), answer_node(1, "4", 0.6), answer_node(2, "5", 0.5), answer_node(3, "4", 0.4)};

  SkeletonSet one;
  one.skeletons.push_back(skeleton_over({0, 2}, 4));
  auto single = aggregate_answers(one, g);
  CHECK(single.winner == "5");
  CHECK(single.margin == doctest::Approx(0.5));
  CHECK(single.source == VoteSource::skeleton);

  SkeletonSet s;
  auto a = skeleton_over({0, 1, 3}, 4);
  a.route_graph.edges = {{0, 1, 0.1}, {1, 3, 0.1}};
  s.skeletons = {a, skeleton_over({0, 2, 1}, 4)};
  auto t = aggregate_answers(s, g);
  // node 1 counted once, in the first skeleton, with degree 2 there
  CHECK(t.votes.size() == 3);
  CHECK(t.weights.at("4") == doctest::Approx(0.6 / 3 + 0.4 / 2));
  CHECK(t.weights.at("5") == doctest::Approx(0.5));
  CHECK(t.winner == "5");
}

TEST_CASE("on-tour factor applies only to spliced skeletons") {
  HypothesisGraph g;
  g.nodes = {answer_node(0, "12", 0.8)};
  SkeletonSet s;
  auto sk = skeleton_over({0}, 1);
  sk.tour_vertices = {0};
  sk.stats.loop_lifespan = 1.0;
  s.skeletons = {sk};
  CHECK(aggregate_answers(s, g).weights.at("12") == doctest::Approx(0.8));
  s.skeletons[0].spliced = true;
  CHECK(aggregate_answers(s, g).weights.at("12") == doctest::Approx(1.6));
  VoteParams off;
  off.persistence_factor = false;
  CHECK(aggregate_answers(s, g, off).weights.at("12") == doctest::Approx(0.8));
}

TEST_CASE("fallback and no answer") {
  HypothesisGraph g;
  g.nodes = {answer_node(0, "7", 0.3), answer_node(1, "8", 0.2), answer_node(2, "8", 0.2), step_node(3, "y = 2")};
  auto t = aggregate_answers(SkeletonSet{}, g);
  CHECK(t.source == VoteSource::fallback);
  CHECK(t.winner == "8");
  CHECK(t.margin == doctest::Approx(0.1));

  HypothesisGraph none;
  none.nodes = {step_node(0, "no numbers here")};
  auto n = aggregate_answers(SkeletonSet{}, none);
  CHECK(n.winner == kNoAnswer);
  CHECK(n.source == VoteSource::none);
}

TEST_CASE("answer normalization and extraction") {
  CHECK(normalize_answer("  4.0 ") == "4");
  CHECK(normalize_answer("Yes") == "yes");
  AnswerExtractor plain;
  CHECK(plain("so \\boxed{42} and then 7").value() == "42");
  CHECK(plain("first 3 then 18").value() == "18");
  CHECK_FALSE(plain("nothing"));
  AnswerExtractor custom("answer: (\\w+)");
  CHECK(custom("answer: a, answer: b").value() == "b");

  HypothesisNode mid = step_node(0, "x = 5");
  CHECK_FALSE(node_answer(mid, plain));
  mid.terminal = true;
  CHECK(node_answer(mid, plain).value() == "5");
}

TEST_CASE("winner invariant under confidence scaling and skeleton order") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    HypothesisGraph g;
    const std::size_t n = 6;
    for (std::size_t i = 0; i < n; ++i) g.nodes.push_back(answer_node(i, std::to_string(rng() % 3), u(rng)));
    std::vector<NodeId> order{0, 1, 2, 3, 4, 5};
    SkeletonSet s;
    s.skeletons = {skeleton_over(order, n)};
    auto base = aggregate_answers(s, g);

    HypothesisGraph scaled = g;
    for (auto& node : scaled.nodes) node.confidence *= 0.25;
    CHECK(aggregate_answers(s, scaled).winner == base.winner);

    std::shuffle(order.begin(), order.end(), rng);
    SkeletonSet r;
    r.skeletons = {skeleton_over(order, n)};
    CHECK(aggregate_answers(r, g).winner == base.winner);
  }
}

TEST_CASE("verification flags") {
  HypothesisGraph g;
  g.nodes = {step_node(0, "s = x + y = 12"), step_node(1, "s = x + y = 15"), answer_node(2, "36", 0.9)};
  VoteTally t;
  t.winner = "36";
  t.votes = {NodeVote{2, "36", 0.9, 0, true, 0.9}};
  Skeleton sk;
  sk.spliced = true;
  sk.tour_vertices = {0, 1, 2};

  RelationTable clean;
  clean.set(2, 0, RelationCode::support);
  clean.set(2, 1, RelationCode::neutral);
  auto f = verify_with_loop(t, sk, g, clean, false);
  CHECK(f.numeric == CheckStatus::flagged);
  CHECK(f.inconsistent_heads.size() == 1);
  CHECK(f.entailment == CheckStatus::clean);

  RelationTable bad = clean;
  bad.set(2, 1, RelationCode::refute);
  auto r = verify_with_loop(t, sk, g, bad, false);
  CHECK(r.entailment == CheckStatus::flagged);
  CHECK(r.refuting_nodes == std::vector<NodeId>{1});
  CHECK(t.winner == "36");

  CHECK(verify_with_loop(t, sk, g, RelationTable{}, false).entailment == CheckStatus::unchecked);
  CHECK(verify_with_loop(t, sk, g, RelationTable{}, true).entailment != CheckStatus::unchecked);

  Skeleton same = sk;
  same.tour_vertices = {0, 2};
  CHECK(verify_with_loop(t, same, g, clean, false).numeric == CheckStatus::clean);
}

TEST_CASE("report outputs") {
  InstanceReport r;
  r.instance_id = "gsm/1";
  r.gold = "4";
  r.tally.weights = {{"4", 1.0}};
  r.tally.confidence = {{"4", 1.0}};
  settle(r.tally);
  r.tally.source = VoteSource::skeleton;
  CHECK(r.correct().value());
  auto j = report_json(r);
  CHECK(j.find("\"winner\":\"4\"") != std::string::npos);
  CHECK(summary_csv({r}) == "instance_id,winner,gold,correct,top_h1_lifespan\ngsm/1,4,4,1,0\n");
  r.gold.reset();
  CHECK_FALSE(r.correct().has_value());
}
