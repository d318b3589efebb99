#include "hypotopo/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>
#include <sstream>

#include "json.hpp"

#include "hypotopo/csv.hpp"
#include "hypotopo/error.hpp"
#include "hypotopo/text.hpp"

namespace hypotopo {

namespace {

std::optional<std::string> last_boxed(std::string_view text) {
  constexpr std::string_view tag = "\\boxed{";
  const auto pos = text.rfind(tag);
  if (pos == std::string_view::npos) return std::nullopt;
  int depth = 1;
  std::string out;
  for (std::size_t i = pos + tag.size(); i < text.size(); ++i) {
    if (text[i] == '{') ++depth;
    if (text[i] == '}' && --depth == 0) return out;
    out += text[i];
  }
  return std::nullopt;  // unbalanced
}

const std::regex& number_regex() {
  static const std::regex re(R"(-?\d+(?:\.\d+)?)");
  return re;
}

std::optional<std::string> last_match(std::string_view text, const std::regex& re) {
  std::optional<std::string> out;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    out = m.size() > 1 && m[1].matched ? m[1].str() : m[0].str();
  }
  return out;
}

}  // namespace

AnswerExtractor::AnswerExtractor(std::string pattern) : pattern_(std::move(pattern)) {
  if (pattern_.empty()) return;
  try {
    std::regex check(pattern_);
  } catch (const std::regex_error& e) {
    throw ConfigError("answer pattern does not compile: " + std::string(e.what()));
  }
}

std::optional<std::string> AnswerExtractor::operator()(std::string_view text) const {
  if (!pattern_.empty()) return last_match(text, std::regex(pattern_));
  if (auto boxed = last_boxed(text)) return boxed;
  return last_match(text, number_regex());
}

std::string normalize_answer(std::string_view answer) {
  std::string canon = canonicalize(answer);
  if (auto num = canonical_number(canon)) return *num;
  return canon;
}

std::optional<std::string> node_answer(const HypothesisNode& node, const AnswerExtractor& extractor) {
  if (node.answer && !trim(*node.answer).empty()) return normalize_answer(*node.answer);
  if (!node.terminal && node.progress < 1.0) return std::nullopt;
  auto raw = extractor(node.text);
  if (!raw || trim(*raw).empty()) return std::nullopt;
  return normalize_answer(*raw);
}

double vote_weight(double confidence, std::size_t degree, bool on_tour, double loop_lifespan,
                   bool persistence_factor) {
  double w = confidence / (1.0 + static_cast<double>(degree));
  if (on_tour && persistence_factor) w *= 1.0 + loop_lifespan;
  return w;
}

std::string_view to_string(VoteSource source) {
  switch (source) {
    case VoteSource::skeleton: return "skeleton";
    case VoteSource::fallback: return "fallback";
    case VoteSource::none: return "none";
  }
  return "none";
}

void settle(VoteTally& tally) {
  if (tally.weights.empty()) {
    tally.winner = std::string(kNoAnswer);
    tally.margin = 0.0;
    tally.source = VoteSource::none;
    return;
  }
  std::vector<std::string> order;
  for (const auto& [answer, w] : tally.weights) order.push_back(answer);
  std::sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
    const double wa = tally.weights.at(a), wb = tally.weights.at(b);
    if (wa != wb) return wa > wb;
    const double ca = tally.confidence.at(a), cb = tally.confidence.at(b);
    if (ca != cb) return ca > cb;
    return a < b;
  });
  tally.winner = order.front();
  tally.margin = tally.weights.at(order.front()) - (order.size() > 1 ? tally.weights.at(order[1]) : 0.0);
}

VoteTally aggregate_answers(const SkeletonSet& skeletons, const HypothesisGraph& graph, const VoteParams& params) {
  VoteTally tally;
  std::set<NodeId> seen;
  for (const auto& sk : skeletons.skeletons) {
    std::vector<std::size_t> degree(graph.size(), 0);
    for (const auto& e : sk.route_graph.edges) {
      ++degree[e.u];
      ++degree[e.v];
    }
    std::set<NodeId> tour(sk.tour_vertices.begin(), sk.tour_vertices.end());
    for (auto v : sk.path) {
      if (!seen.insert(v).second) continue;
      auto answer = node_answer(graph.nodes[v], params.extractor);
      if (!answer) continue;
      NodeVote vote;
      vote.node = v;
      vote.answer = *answer;
      vote.confidence = graph.nodes[v].confidence;
      vote.degree = degree[v];
      vote.on_tour = sk.spliced && tour.count(v) > 0;
      vote.weight = vote_weight(vote.confidence, vote.degree, vote.on_tour, sk.stats.loop_lifespan,
                                params.persistence_factor);
      tally.weights[vote.answer] += vote.weight;
      tally.confidence[vote.answer] += vote.confidence;
      tally.votes.push_back(std::move(vote));
    }
  }
  if (!tally.weights.empty()) {
    settle(tally);
    tally.source = VoteSource::skeleton;
    return tally;
  }

  tally.votes.clear();
  for (const auto& node : graph.nodes) {
    if (!node.terminal) continue;
    auto answer = node_answer(node, params.extractor);
    if (!answer) continue;
    NodeVote vote;
    vote.node = node.id;
    vote.answer = *answer;
    vote.confidence = node.confidence;
    vote.weight = node.confidence;
    tally.weights[vote.answer] += vote.weight;
    tally.confidence[vote.answer] += vote.confidence;
    tally.votes.push_back(std::move(vote));
  }
  settle(tally);
  if (!tally.weights.empty()) tally.source = VoteSource::fallback;
  return tally;
}

std::string_view to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::clean: return "clean";
    case CheckStatus::flagged: return "flagged";
    case CheckStatus::unchecked: return "unchecked";
  }
  return "unchecked";
}

VerificationFlags verify_with_loop(const VoteTally& tally, const Skeleton& skeleton, const HypothesisGraph& graph,
                                   const RelationTable& relations, bool rule_fallback) {
  VerificationFlags flags;

  std::map<std::string, std::set<std::string>> values;
  for (auto v : skeleton.tour_vertices) {
    if (auto a = parse_assignment(graph.nodes[v].canon)) values[a->head].insert(a->value);
  }
  flags.numeric = CheckStatus::clean;
  for (const auto& [head, vals] : values) {
    if (vals.size() > 1) {
      flags.numeric = CheckStatus::flagged;
      flags.inconsistent_heads.push_back(head);
    }
  }

  const NodeVote* best = nullptr;
  for (const auto& vote : tally.votes) {
    if (vote.answer != tally.winner) continue;
    if (!best || vote.weight > best->weight || (vote.weight == best->weight && vote.node < best->node)) best = &vote;
  }
  if (!best) return flags;

  bool unresolved = false;
  for (auto t : skeleton.tour_vertices) {
    if (t == best->node) continue;
    std::optional<RelationCode> code = relations.find(best->node, t);
    if (!code && rule_fallback) code = rule_label(graph.nodes[best->node].canon, graph.nodes[t].canon);
    if (!code) {
      unresolved = true;
      continue;
    }
    if (*code == RelationCode::refute) flags.refuting_nodes.push_back(t);
  }
  if (!flags.refuting_nodes.empty()) {
    flags.entailment = CheckStatus::flagged;
  } else {
    flags.entailment = unresolved ? CheckStatus::unchecked : CheckStatus::clean;
  }
  return flags;
}

std::optional<bool> InstanceReport::correct() const {
  if (!gold) return std::nullopt;
  if (!tally.has_answer()) return false;
  return normalize_answer(*gold) == tally.winner;
}

namespace {

nlohmann::ordered_json number_json(double x) {
  if (std::isinf(x)) return "inf";
  return x;
}

}  // namespace

std::string report_json(const InstanceReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["instance_id"] = r.instance_id;
  j["winner"] = r.tally.winner;
  j["gold"] = r.gold ? ordered_json(*r.gold) : ordered_json(nullptr);
  auto correct = r.correct();
  j["correct"] = correct ? ordered_json(*correct) : ordered_json(nullptr);
  j["vote_source"] = to_string(r.tally.source);
  j["margin"] = r.tally.margin;
  ordered_json weights = ordered_json::object();
  for (const auto& [a, w] : r.tally.weights) weights[a] = w;
  j["answer_weights"] = weights;
  ordered_json votes = ordered_json::array();
  for (const auto& v : r.tally.votes) {
    votes.push_back({{"node", v.node}, {"answer", v.answer}, {"confidence", v.confidence}, {"degree", v.degree},
                     {"on_tour", v.on_tour}, {"weight", v.weight}});
  }
  j["node_weights"] = votes;

  ordered_json sks = ordered_json::array();
  for (std::size_t i = 0; i < r.skeletons.size(); ++i) {
    const auto& sk = r.skeletons[i];
    ordered_json s;
    s["cluster"] = sk.cluster;
    s["nodes"] = sk.path;
    s["texts"] = i < r.skeleton_texts.size() ? ordered_json(r.skeleton_texts[i]) : ordered_json::array();
    s["spliced"] = sk.spliced;
    s["pivot"] = sk.pivot ? ordered_json(*sk.pivot) : ordered_json(nullptr);
    ordered_json tour = ordered_json::array();
    for (auto [a, b] : sk.tour_edges) tour.push_back({a, b});
    s["tour_edges"] = tour;
    s["backbone_cost"] = sk.backbone.cost;
    s["stats"] = {{"contributing_paths", sk.stats.contributing_paths},
                  {"average_edge_weight", sk.stats.average_edge_weight},
                  {"loop_lifespan", sk.stats.loop_lifespan}};
    sks.push_back(std::move(s));
  }
  j["skeletons"] = sks;

  j["persistence"] = {{"top_h1_lifespan", r.persistence.top_h1_lifespan},
                      {"selected_h0", r.persistence.selected_h0},
                      {"selected_h1", r.persistence.selected_h1},
                      {"h0_pairs", r.persistence.h0_pairs},
                      {"h1_pairs", r.persistence.h1_pairs},
                      {"eps_h0", number_json(r.persistence.eps_h0)},
                      {"tau_value", number_json(r.persistence.tau_value)}};
  if (r.verification) {
    const auto& f = *r.verification;
    j["verification"] = {{"numeric", to_string(f.numeric)},
                         {"entailment", to_string(f.entailment)},
                         {"inconsistent_heads", f.inconsistent_heads},
                         {"refuting_nodes", f.refuting_nodes}};
  } else {
    j["verification"] = nullptr;
  }
  j["budget"] = {{"used", r.oracle_calls}, {"cap", r.budget_cap}};
  j["graph_nodes"] = r.graph_nodes;
  j["warnings"] = r.warnings;
  j["error"] = r.error ? ordered_json(*r.error) : ordered_json(nullptr);
  return j.dump();
}

std::string summary_csv(const std::vector<InstanceReport>& reports) {
  std::ostringstream out;
  out << "instance_id,winner,gold,correct,top_h1_lifespan\n";
  for (const auto& r : reports) {
    auto correct = r.correct();
    out << csv_field(r.instance_id) << ',' << csv_field(r.error ? "error" : r.tally.winner) << ','
        << csv_field(r.gold.value_or("")) << ',' << (correct ? (*correct ? "1" : "0") : "") << ','
        << format_number(r.persistence.top_h1_lifespan) << '\n';
  }
  return out.str();
}

}  // namespace hypotopo
