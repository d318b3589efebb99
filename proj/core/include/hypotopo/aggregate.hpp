#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hypotopo/ghg.hpp"
#include "hypotopo/homology.hpp"
#include "hypotopo/relation.hpp"
#include "hypotopo/skeleton.hpp"

namespace hypotopo {

inline constexpr std::string_view kNoAnswer = "no-answer";

/// Pulls an answer token out of free text. The default takes the content of
/// the last \boxed{...}, else the last number. A custom pattern replaces that:
/// the last match wins, capture group 1 if present.
class AnswerExtractor {
 public:
  AnswerExtractor() = default;
  explicit AnswerExtractor(std::string pattern);

  std::optional<std::string> operator()(std::string_view text) const;
  const std::string& pattern() const noexcept { return pattern_; }

 private:
  std::string pattern_;
};

/// Trim, lowercase, canonical numeric form.
std::string normalize_answer(std::string_view answer);

/// The node's answer field, else (terminal nodes only) the extractor result.
std::optional<std::string> node_answer(const HypothesisNode& node, const AnswerExtractor& extractor);

struct VoteParams {
  bool persistence_factor = true;  // x(1 + L) on spliced tour nodes
  AnswerExtractor extractor;
};

/// c / (1 + deg), times (1 + L) when the node sits on the spliced tour and the
/// factor is enabled.
double vote_weight(double confidence, std::size_t degree, bool on_tour, double loop_lifespan,
                   bool persistence_factor = true);

struct NodeVote {
  NodeId node = 0;
  std::string answer;  // normalized
  double confidence = 0.0;
  std::size_t degree = 0;
  bool on_tour = false;
  double weight = 0.0;
};

enum class VoteSource { skeleton, fallback, none };
std::string_view to_string(VoteSource source);

struct VoteTally {
  std::map<std::string, double> weights;     // per normalized answer
  std::map<std::string, double> confidence;  // summed contributing confidence
  std::vector<NodeVote> votes;
  std::string winner{kNoAnswer};
  double margin = 0.0;
  VoteSource source = VoteSource::none;

  bool has_answer() const noexcept { return source != VoteSource::none; }
};

/// Picks the answer with the largest weight; ties go to the larger summed
/// confidence, then the lexicographically smallest answer.
void settle(VoteTally& tally);

/// Weighted vote over the answer-bearing nodes of all skeletons (each node
/// counted once, in the first ranked skeleton that contains it; degree taken
/// in that skeleton's route graph). Without any skeleton answer, falls back
/// to a confidence-weighted majority over the raw graph's terminal nodes.
VoteTally aggregate_answers(const SkeletonSet& skeletons, const HypothesisGraph& graph, const VoteParams& params = {});

enum class CheckStatus { clean, flagged, unchecked };
std::string_view to_string(CheckStatus status);

struct VerificationFlags {
  CheckStatus numeric = CheckStatus::unchecked;
  CheckStatus entailment = CheckStatus::unchecked;
  std::vector<std::string> inconsistent_heads;  // numeric check
  std::vector<NodeId> refuting_nodes;           // entailment check
};

/// Advisory checks along the spliced tour of `skeleton`. Numeric: two tour
/// nodes assigning different values to the same head. Entailment: any tour
/// node whose relation to the winning node is REFUTE; relations come from
/// `relations`, then the local rule labeller when `rule_fallback` is set,
/// otherwise an unresolved pair leaves the check unchecked.
VerificationFlags verify_with_loop(const VoteTally& tally, const Skeleton& skeleton, const HypothesisGraph& graph,
                                   const RelationTable& relations, bool rule_fallback);

struct PersistenceSummary {
  double top_h1_lifespan = 0.0;  // capped at tau; 0 without H1
  std::size_t selected_h0 = 0;
  std::size_t selected_h1 = 0;
  std::size_t h0_pairs = 0;
  std::size_t h1_pairs = 0;
  double eps_h0 = 0.0;
  double tau_value = 0.0;
};

struct InstanceReport {
  std::string instance_id;
  std::optional<std::string> gold;
  VoteTally tally;
  std::vector<Skeleton> skeletons;
  std::vector<std::vector<std::string>> skeleton_texts;
  PersistenceSummary persistence;
  std::optional<VerificationFlags> verification;
  std::size_t oracle_calls = 0;
  std::size_t budget_cap = 0;
  std::size_t graph_nodes = 0;
  std::vector<std::string> warnings;
  std::optional<std::string> error;  // set when the instance failed

  std::optional<bool> correct() const;
};

/// One JSON line.
std::string report_json(const InstanceReport& report);

/// "instance_id,winner,gold,correct,top_h1_lifespan" header plus one row per
/// report, in the given order.
std::string summary_csv(const std::vector<InstanceReport>& reports);

}  // namespace hypotopo
