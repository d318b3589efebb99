#include "hypotopo/ghg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hypotopo/error.hpp"
#include "hypotopo/text.hpp"
#include "json.hpp"

namespace hypotopo {

namespace {

using TokenSet = std::vector<std::string>;  // sorted, unique

TokenSet token_set(std::string_view canon) {
  TokenSet t = canon_tokens(canon);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

double jaccard(const TokenSet& a, const TokenSet& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

const std::vector<double>& lookup(const EmbeddingTable* table, std::string_view canon) {
  if (table == nullptr) throw ConfigError("similarity mode requires embeddings but none were supplied");
  auto it = table->find(std::string(canon));
  if (it == table->end()) throw ConfigError("no embedding for canon '" + std::string(canon) + "'");
  return it->second;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ConfigError("embedding dimension mismatch");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return std::clamp(dot, 0.0, 1.0);
}

double similarity_with_tokens(std::string_view a, const TokenSet& ta, std::string_view b, const TokenSet& tb,
                              const MergePolicy& policy, const EmbeddingTable* embeddings) {
  if (a == b) return 1.0;
  switch (policy.similarity_mode) {
    case SimilarityMode::canon_jaccard:
      return jaccard(ta, tb);
    case SimilarityMode::embedding_cosine:
      return cosine(lookup(embeddings, a), lookup(embeddings, b));
    case SimilarityMode::blend: {
      double cos = cosine(lookup(embeddings, a), lookup(embeddings, b));
      return policy.blend_weight * cos + (1.0 - policy.blend_weight) * jaccard(ta, tb);
    }
  }
  return 0.0;
}

}  // namespace

std::string_view to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::adjacency: return "adjacency";
    case EdgeKind::support: return "support";
    case EdgeKind::refute: return "refute";
  }
  return "adjacency";
}

NodeId HypothesisGraph::node_of(std::string_view path_id, std::size_t step_index) const {
  for (const auto& node : nodes) {
    for (const auto& src : node.provenance) {
      if (src.step_index == step_index && src.path_id == path_id) return node.id;
    }
  }
  throw std::out_of_range("no node holds (" + std::string(path_id) + ", " + std::to_string(step_index) + ")");
}

double jaccard_similarity(std::string_view a, std::string_view b) { return jaccard(token_set(a), token_set(b)); }

double similarity(std::string_view a, std::string_view b, const MergePolicy& policy,
                  const EmbeddingTable* embeddings) {
  if (policy.similarity_mode != SimilarityMode::canon_jaccard && embeddings == nullptr) {
    throw ConfigError("similarity mode requires embeddings but none were supplied");
  }
  return similarity_with_tokens(a, token_set(a), b, token_set(b), policy, embeddings);
}

void merge_into(HypothesisNode& target, const ReasoningStep& step, double progress, SourceRef source,
                bool terminal) {
  target.provenance.push_back(std::move(source));
  target.confidence_sum += step.confidence;
  target.confidence = target.confidence_sum / static_cast<double>(target.provenance.size());
  target.progress = std::max(target.progress, progress);
  if (!target.answer && step.answer && !step.answer->empty()) target.answer = step.answer;
  target.terminal = target.terminal || terminal;
}

HypothesisGraph build_graph(const ProblemInstance& instance, const MergePolicy& policy,
                            const EmbeddingTable* embeddings) {
  if (!(policy.theta_merge >= 0.0 && policy.theta_merge <= 1.0)) {
    throw ConfigError("theta_merge must lie in [0,1]");
  }
  if (policy.similarity_mode != SimilarityMode::canon_jaccard && embeddings == nullptr) {
    throw ConfigError("similarity mode requires embeddings but none were supplied");
  }
  HypothesisGraph g;
  g.instance_id = instance.instance_id;
  std::vector<TokenSet> node_tokens;

  for (const auto& path : instance.paths) {
    std::optional<NodeId> previous;
    for (std::size_t j = 0; j < path.steps.size(); ++j) {
      const ReasoningStep& step = path.steps[j];
      std::string canon = canonicalize(step.text);
      TokenSet tokens = token_set(canon);
      const double progress = effective_progress(path, j);
      const bool terminal = j + 1 == path.steps.size();

      std::optional<NodeId> best;
      double best_sim = -1.0;
      for (const auto& node : g.nodes) {
        double s = similarity_with_tokens(canon, tokens, node.canon, node_tokens[node.id], policy, embeddings);
        if (s > best_sim) {
          best_sim = s;
          best = node.id;
        }
      }

      NodeId current;
      if (!best || best_sim <= policy.theta_merge) {
        HypothesisNode node;
        node.id = g.nodes.size();
        node.text = step.text;
        node.canon = canon;
        node.progress = progress;
        merge_into(node, step, progress, SourceRef{path.path_id, j}, terminal);
        current = node.id;
        g.nodes.push_back(std::move(node));
        node_tokens.push_back(std::move(tokens));
      } else {
        current = *best;
        merge_into(g.nodes[current], step, progress, SourceRef{path.path_id, j}, terminal);
      }
      if (previous && *previous != current) {
        g.edges.push_back(HypothesisEdge{*previous, current, EdgeKind::adjacency});
      }
      previous = current;
    }
  }
  return g;
}

std::string serialize_graph(const HypothesisGraph& graph) {
  using Json = nlohmann::ordered_json;
  Json doc;
  doc["instance_id"] = graph.instance_id;
  Json nodes = Json::array();
  for (const auto& n : graph.nodes) {
    Json nj;
    nj["node_id"] = n.id;
    nj["text"] = n.text;
    nj["canon"] = n.canon;
    nj["confidence"] = n.confidence;
    nj["progress"] = n.progress;
    Json prov = Json::array();
    for (const auto& s : n.provenance) prov.push_back(Json{{"path_id", s.path_id}, {"step_index", s.step_index}});
    nj["provenance"] = std::move(prov);
    if (n.answer) nj["answer"] = *n.answer;
    nj["terminal"] = n.terminal;
    nodes.push_back(std::move(nj));
  }
  doc["nodes"] = std::move(nodes);
  Json edges = Json::array();
  for (const auto& e : graph.edges) {
    edges.push_back(Json{{"src", e.src}, {"dst", e.dst}, {"kind", std::string(to_string(e.kind))}});
  }
  doc["edges"] = std::move(edges);
  return doc.dump();
}

}  // namespace hypotopo
