#pragma once

#include <atomic>
#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hypotopo/ghg.hpp"

namespace hypotopo {

enum class RelationCode { support, refute, neutral };

std::string_view to_string(RelationCode code);
/// Strict parse of "SUPPORT" / "REFUTE" / "NEUTRAL" (surrounding blanks and
/// case ignored).
std::optional<RelationCode> parse_relation_code(std::string_view s);

struct NodePair {
  NodeId a = 0;
  NodeId b = 0;
  friend bool operator==(const NodePair&, const NodePair&) = default;
};

struct CandidatePairSet {
  std::vector<NodePair> longitudinal;  // derivation edges, first orientation seen
  std::vector<NodePair> lateral;       // unconnected, |dr| < epsilon_lat, a < b
  double epsilon_lat = 0.1;

  std::size_t size() const noexcept { return longitudinal.size() + lateral.size(); }
  /// Longitudinal pairs first, then lateral.
  std::vector<NodePair> all() const;
};

struct RelationLabel {
  NodePair pair;
  RelationCode code = RelationCode::neutral;
};

struct RelationParams {
  double M = 1000.0;  // REFUTE push
  double W = 1.0;     // SUPPORT pull
  std::size_t chunk_size = 20;
  double delta_logic = 1.0;
};

void validate(const RelationParams& params);

/// Candidate pairs for labeling: every adjacency edge once (unordered), plus
/// every pair with no edge in either direction whose progress differs by less
/// than `epsilon_lat`.
CandidatePairSet build_candidate_pairs(const HypothesisGraph& graph, double epsilon_lat = 0.1);

/// Consecutive slices of `pairs`, each of `chunk_size` except possibly the last.
std::vector<std::vector<NodePair>> chunk_pairs(std::span<const NodePair> pairs, std::size_t chunk_size);
std::vector<std::vector<NodePair>> chunk_pairs(const CandidatePairSet& set, std::size_t chunk_size);

/// +M for REFUTE, -W for SUPPORT, 0 otherwise.
double relation_term(RelationCode code, const RelationParams& params) noexcept;

/// Offline labeling rules:
///  - identical canon -> SUPPORT
///  - same assignment head with a different numeric value -> REFUTE
///  - token sets differing by exactly one antonym pair, or only by negation
///    words -> REFUTE
///  - one token set contained in the other -> SUPPORT
///  - otherwise NEUTRAL
RelationCode rule_label(std::string_view a_canon, std::string_view b_canon);

struct RelationQuery {
  std::string a_text;
  std::string b_text;
  std::string a_canon;
  std::string b_canon;
};

struct OracleReply {
  enum class Status { ok, failed, over_budget };
  Status status = Status::ok;
  std::vector<RelationCode> codes;  // one per query when status == ok
  std::size_t warnings = 0;         // slots degraded to NEUTRAL by the provider
};

/// A labeling provider. Each `label` call is one provider request covering a
/// whole chunk and is counted against a per-oracle budget; calls past the cap
/// are refused without reaching the provider. Counting is atomic, so chunks
/// may be labeled from several threads.
class RelationOracle {
 public:
  explicit RelationOracle(std::size_t budget_cap) : budget_cap_(budget_cap) {}
  virtual ~RelationOracle() = default;
  RelationOracle(const RelationOracle&) = delete;
  RelationOracle& operator=(const RelationOracle&) = delete;

  OracleReply label(std::span<const RelationQuery> queries);

  std::size_t calls_made() const noexcept { return calls_.load(); }
  std::size_t refused_calls() const noexcept { return refused_.load(); }
  std::size_t budget_cap() const noexcept { return budget_cap_; }

 protected:
  virtual OracleReply do_label(std::span<const RelationQuery> queries) = 0;

 private:
  std::size_t budget_cap_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> refused_{0};
};

class RuleBasedOracle final : public RelationOracle {
 public:
  explicit RuleBasedOracle(std::size_t budget_cap = 19) : RelationOracle(budget_cap) {}

 protected:
  OracleReply do_label(std::span<const RelationQuery> queries) override;
};

struct ChunkLabels {
  std::vector<RelationLabel> labels;
  std::size_t warnings = 0;
  bool over_budget = false;
  bool failed = false;
};

/// Labels one chunk. Provider failure, a short reply or a refused call all
/// degrade every pair of the chunk to NEUTRAL and are counted as warnings.
ChunkLabels label_chunk(const HypothesisGraph& graph, std::span<const NodePair> chunk, RelationOracle& oracle);

/// Symmetric lookup of assembled labels; absent pairs are NEUTRAL.
class RelationTable {
 public:
  void set(NodeId a, NodeId b, RelationCode code);
  RelationCode code(NodeId a, NodeId b) const;
  std::optional<RelationCode> find(NodeId a, NodeId b) const;
  double term(NodeId a, NodeId b, const RelationParams& params) const { return relation_term(code(a, b), params); }
  std::size_t size() const noexcept { return codes_.size(); }
  const std::map<std::pair<NodeId, NodeId>, RelationCode>& entries() const noexcept { return codes_; }

 private:
  std::map<std::pair<NodeId, NodeId>, RelationCode> codes_;
};

/// Line-delimited cache of labels keyed by canon hashes:
/// {"src_canon_hash": "...", "dst_canon_hash": "...", "code": "REFUTE"}.
/// Lookups are order-insensitive. New entries are appended to the file.
class RelationCache {
 public:
  RelationCache() = default;
  /// Loads existing entries; a missing file starts an empty cache.
  explicit RelationCache(std::string path);

  std::optional<RelationCode> find(std::string_view canon_a, std::string_view canon_b) const;
  void insert(std::string_view canon_a, std::string_view canon_b, RelationCode code);
  std::size_t size() const;

 private:
  static std::string key(const std::string& ha, const std::string& hb);
  std::string path_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, RelationCode> entries_;
};

struct RelationInference {
  RelationTable table;
  CandidatePairSet candidates;
  std::size_t chunks = 0;
  std::size_t cache_hits = 0;
  std::size_t oracle_calls = 0;
  std::size_t over_budget_chunks = 0;
  std::size_t warnings = 0;
};

/// Candidate pairs -> cache lookup -> chunks of the remaining pairs -> oracle.
RelationInference infer_relations(const HypothesisGraph& graph, const RelationParams& params, double epsilon_lat,
                                  RelationOracle& oracle, RelationCache* cache = nullptr);

/// Adds support/refute edges for every non-neutral label (ordered a -> b).
void annotate_relations(HypothesisGraph& graph, const RelationTable& table);

}  // namespace hypotopo
