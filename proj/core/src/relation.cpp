#include "hypotopo/relation.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

#include "hypotopo/error.hpp"
#include "hypotopo/text.hpp"
#include "json.hpp"

namespace hypotopo {

namespace {

constexpr std::array<std::pair<std::string_view, std::string_view>, 16> kAntonyms{{
    {"true", "false"},
    {"correct", "incorrect"},
    {"valid", "invalid"},
    {"possible", "impossible"},
    {"even", "odd"},
    {"positive", "negative"},
    {"increase", "decrease"},
    {"increases", "decreases"},
    {"more", "less"},
    {"greater", "smaller"},
    {"larger", "smaller"},
    {"above", "below"},
    {"always", "never"},
    {"yes", "no"},
    {"prime", "composite"},
    {"consistent", "inconsistent"},
}};

constexpr std::array<std::string_view, 5> kNegators{"not", "no", "never", "cannot", "isn't"};

bool is_antonym_pair(std::string_view x, std::string_view y) {
  for (auto [a, b] : kAntonyms) {
    if ((x == a && y == b) || (x == b && y == a)) return true;
  }
  return false;
}

bool is_negator(std::string_view t) {
  return std::find(kNegators.begin(), kNegators.end(), t) != kNegators.end();
}

std::set<std::string> token_set(std::string_view canon) {
  auto tokens = canon_tokens(canon);
  return {tokens.begin(), tokens.end()};
}

std::vector<std::string> difference(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::vector<std::string> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::pair<NodeId, NodeId> ordered(NodeId a, NodeId b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

}  // namespace

std::string_view to_string(RelationCode code) {
  switch (code) {
    case RelationCode::support: return "SUPPORT";
    case RelationCode::refute: return "REFUTE";
    case RelationCode::neutral: return "NEUTRAL";
  }
  return "NEUTRAL";
}

std::optional<RelationCode> parse_relation_code(std::string_view s) {
  std::string t = trim(s);
  for (char& c : t) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (t == "SUPPORT") return RelationCode::support;
  if (t == "REFUTE") return RelationCode::refute;
  if (t == "NEUTRAL") return RelationCode::neutral;
  return std::nullopt;
}

std::vector<NodePair> CandidatePairSet::all() const {
  std::vector<NodePair> out = longitudinal;
  out.insert(out.end(), lateral.begin(), lateral.end());
  return out;
}

void validate(const RelationParams& params) {
  if (!(params.M > 0.0)) throw ConfigError("relation M must be positive");
  if (!(params.W > 0.0)) throw ConfigError("relation W must be positive");
  if (params.chunk_size < 1) throw ConfigError("chunk size must be at least 1");
  if (!(params.delta_logic >= 0.0)) throw ConfigError("delta_logic must be non-negative");
}

CandidatePairSet build_candidate_pairs(const HypothesisGraph& graph, double epsilon_lat) {
  CandidatePairSet set;
  set.epsilon_lat = epsilon_lat;
  const std::size_t n = graph.size();
  std::set<std::pair<NodeId, NodeId>> connected;
  std::set<std::pair<NodeId, NodeId>> seen_long;
  for (const auto& e : graph.edges) {
    if (e.src == e.dst) continue;
    auto key = ordered(e.src, e.dst);
    connected.insert(key);
    if (e.kind == EdgeKind::adjacency && seen_long.insert(key).second) {
      set.longitudinal.push_back(NodePair{e.src, e.dst});
    }
  }
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = a + 1; b < n; ++b) {
      if (connected.count({a, b})) continue;
      if (std::abs(graph.nodes[a].progress - graph.nodes[b].progress) < epsilon_lat) {
        set.lateral.push_back(NodePair{a, b});
      }
    }
  }
  return set;
}

std::vector<std::vector<NodePair>> chunk_pairs(std::span<const NodePair> pairs, std::size_t chunk_size) {
  if (chunk_size < 1) throw ConfigError("chunk size must be at least 1");
  std::vector<std::vector<NodePair>> chunks;
  for (std::size_t i = 0; i < pairs.size(); i += chunk_size) {
    auto end = std::min(pairs.size(), i + chunk_size);
    chunks.emplace_back(pairs.begin() + static_cast<std::ptrdiff_t>(i), pairs.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return chunks;
}

std::vector<std::vector<NodePair>> chunk_pairs(const CandidatePairSet& set, std::size_t chunk_size) {
  auto all = set.all();
  return chunk_pairs(std::span<const NodePair>(all), chunk_size);
}

double relation_term(RelationCode code, const RelationParams& params) noexcept {
  switch (code) {
    case RelationCode::refute: return params.M;
    case RelationCode::support: return -params.W;
    case RelationCode::neutral: return 0.0;
  }
  return 0.0;
}

RelationCode rule_label(std::string_view a_canon, std::string_view b_canon) {
  if (a_canon == b_canon) return RelationCode::support;

  auto aa = parse_assignment(a_canon);
  auto ab = parse_assignment(b_canon);
  if (aa && ab && aa->head == ab->head && aa->value != ab->value) return RelationCode::refute;

  auto ta = token_set(a_canon);
  auto tb = token_set(b_canon);
  auto only_a = difference(ta, tb);
  auto only_b = difference(tb, ta);
  if (only_a.size() == 1 && only_b.size() == 1 && is_antonym_pair(only_a[0], only_b[0])) {
    return RelationCode::refute;
  }
  auto all_negators = [](const std::vector<std::string>& v) {
    return !v.empty() && std::all_of(v.begin(), v.end(), [](const std::string& t) { return is_negator(t); });
  };
  if ((all_negators(only_a) && only_b.empty()) || (all_negators(only_b) && only_a.empty())) {
    return RelationCode::refute;
  }
  if (!ta.empty() && !tb.empty() && (only_a.empty() || only_b.empty())) return RelationCode::support;
  return RelationCode::neutral;
}

OracleReply RelationOracle::label(std::span<const RelationQuery> queries) {
  std::size_t used = calls_.load();
  do {
    if (used >= budget_cap_) {
      refused_.fetch_add(1);
      return OracleReply{OracleReply::Status::over_budget, {}, 0};
    }
  } while (!calls_.compare_exchange_weak(used, used + 1));
  return do_label(queries);
}

OracleReply RuleBasedOracle::do_label(std::span<const RelationQuery> queries) {
  OracleReply reply;
  reply.codes.reserve(queries.size());
  for (const auto& q : queries) reply.codes.push_back(rule_label(q.a_canon, q.b_canon));
  return reply;
}

ChunkLabels label_chunk(const HypothesisGraph& graph, std::span<const NodePair> chunk, RelationOracle& oracle) {
  ChunkLabels out;
  if (chunk.empty()) return out;
  std::vector<RelationQuery> queries;
  queries.reserve(chunk.size());
  for (const auto& p : chunk) {
    const auto& na = graph.nodes.at(p.a);
    const auto& nb = graph.nodes.at(p.b);
    queries.push_back(RelationQuery{na.text, nb.text, na.canon, nb.canon});
  }
  OracleReply reply = oracle.label(queries);
  bool usable = reply.status == OracleReply::Status::ok && reply.codes.size() == chunk.size();
  out.labels.reserve(chunk.size());
  for (std::size_t i = 0; i < chunk.size(); ++i) {
    out.labels.push_back(RelationLabel{chunk[i], usable ? reply.codes[i] : RelationCode::neutral});
  }
  if (usable) {
    out.warnings = reply.warnings;
  } else {
    out.warnings = chunk.size();
    out.over_budget = reply.status == OracleReply::Status::over_budget;
    out.failed = !out.over_budget;
  }
  return out;
}

void RelationTable::set(NodeId a, NodeId b, RelationCode code) { codes_[ordered(a, b)] = code; }

RelationCode RelationTable::code(NodeId a, NodeId b) const { return find(a, b).value_or(RelationCode::neutral); }

std::optional<RelationCode> RelationTable::find(NodeId a, NodeId b) const {
  auto it = codes_.find(ordered(a, b));
  if (it == codes_.end()) return std::nullopt;
  return it->second;
}

RelationCache::RelationCache(std::string path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      auto code = parse_relation_code(j.at("code").get<std::string>());
      if (!code) throw Error("unknown code");
      entries_[key(j.at("src_canon_hash").get<std::string>(), j.at("dst_canon_hash").get<std::string>())] = *code;
    } catch (const std::exception& e) {
      throw ParseError(line_no, "relation cache '" + path_ + "': " + e.what());
    }
  }
}

std::string RelationCache::key(const std::string& ha, const std::string& hb) {
  return ha < hb ? ha + ":" + hb : hb + ":" + ha;
}

std::optional<RelationCode> RelationCache::find(std::string_view canon_a, std::string_view canon_b) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key(canon_hash(canon_a), canon_hash(canon_b)));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void RelationCache::insert(std::string_view canon_a, std::string_view canon_b, RelationCode code) {
  const std::string ha = canon_hash(canon_a);
  const std::string hb = canon_hash(canon_b);
  std::lock_guard lock(mu_);
  auto [it, inserted] = entries_.insert_or_assign(key(ha, hb), code);
  (void)it;
  if (!inserted || path_.empty()) return;
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error("cannot append to relation cache '" + path_ + "'");
  nlohmann::ordered_json j;
  j["src_canon_hash"] = ha;
  j["dst_canon_hash"] = hb;
  j["code"] = std::string(to_string(code));
  out << j.dump() << '\n';
}

std::size_t RelationCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

RelationInference infer_relations(const HypothesisGraph& graph, const RelationParams& params, double epsilon_lat,
                                  RelationOracle& oracle, RelationCache* cache) {
  validate(params);
  RelationInference out;
  out.candidates = build_candidate_pairs(graph, epsilon_lat);
  std::vector<NodePair> pending;
  for (const auto& p : out.candidates.all()) {
    if (cache) {
      if (auto hit = cache->find(graph.nodes[p.a].canon, graph.nodes[p.b].canon)) {
        out.table.set(p.a, p.b, *hit);
        ++out.cache_hits;
        continue;
      }
    }
    pending.push_back(p);
  }
  const std::size_t calls_before = oracle.calls_made();
  auto chunks = chunk_pairs(std::span<const NodePair>(pending), params.chunk_size);
  out.chunks = chunks.size();
  for (const auto& chunk : chunks) {
    ChunkLabels labels = label_chunk(graph, chunk, oracle);
    out.warnings += labels.warnings;
    if (labels.over_budget) ++out.over_budget_chunks;
    // Degraded chunks stay out of the table: they read as NEUTRAL for the
    // distance but as "unknown" for verification.
    if (labels.over_budget || labels.failed) continue;
    for (const auto& l : labels.labels) {
      out.table.set(l.pair.a, l.pair.b, l.code);
      if (cache) cache->insert(graph.nodes[l.pair.a].canon, graph.nodes[l.pair.b].canon, l.code);
    }
  }
  out.oracle_calls = oracle.calls_made() - calls_before;
  return out;
}

void annotate_relations(HypothesisGraph& graph, const RelationTable& table) {
  for (const auto& [key, code] : table.entries()) {
    if (code == RelationCode::neutral) continue;
    graph.edges.push_back(
        HypothesisEdge{key.first, key.second, code == RelationCode::support ? EdgeKind::support : EdgeKind::refute});
  }
}

}  // namespace hypotopo
