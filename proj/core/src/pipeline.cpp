#include "hypotopo/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "hypotopo/error.hpp"
#include "hypotopo/text.hpp"

namespace hypotopo {

namespace {

Transport transport_from_env(const char* url_var, const char* key_var) {
  const std::string url = env_or_empty(url_var);
  if (url.empty()) throw ConfigError(std::string(url_var) + " is not set");
  return make_http_transport(url, env_or_empty(key_var));
}

}  // namespace

PipelineContext make_context(const RunConfig& config, Transport embed_transport, Transport relation_transport) {
  PipelineContext ctx;
  std::shared_ptr<EmbeddingProvider> inner;
  switch (config.embed_mode) {
    case EmbedMode::fallback:
      inner = std::make_shared<HashingEmbedder>(config.embed_dim);
      break;
    case EmbedMode::file:
      inner = std::make_shared<FileEmbedder>(config.embed_file);
      break;
    case EmbedMode::remote:
      if (!embed_transport) embed_transport = transport_from_env("EMBED_URL", "EMBED_KEY");
      inner = std::make_shared<RemoteEmbedder>(std::move(embed_transport), config.embed_model, config.embed_dim);
      break;
  }
  if (!config.embed_cache.empty() || config.embed_mode == EmbedMode::remote) {
    ctx.embedder = std::make_shared<CachingEmbedder>(std::move(inner), config.embed_cache);
  } else {
    ctx.embedder = std::move(inner);
  }

  const std::size_t cap = config.budget;
  if (config.relation_mode == RelationMode::rule) {
    ctx.make_oracle = [cap] { return std::make_unique<RuleBasedOracle>(cap); };
  } else {
    if (!relation_transport) relation_transport = transport_from_env("RELATION_URL", "RELATION_KEY");
    ctx.make_oracle = [cap, t = std::move(relation_transport)] { return std::make_unique<RemoteRelationOracle>(t, cap); };
  }
  if (!config.relation_cache.empty()) ctx.relation_cache = std::make_shared<RelationCache>(config.relation_cache);
  return ctx;
}

InstanceAnalysis analyze_instance(const ProblemInstance& instance, const RunConfig& config, PipelineContext& context) {
  validate(instance);
  InstanceAnalysis a;

  EmbeddingTable table;
  const EmbeddingTable* table_ptr = nullptr;
  if (config.merge.similarity_mode != SimilarityMode::canon_jaccard) {
    std::set<std::string> canons;
    for (const auto& p : instance.paths) {
      for (const auto& s : p.steps) canons.insert(canonicalize(s.text));
    }
    std::vector<std::string> list(canons.begin(), canons.end());
    auto vecs = context.embedder->embed(list);
    for (std::size_t i = 0; i < list.size(); ++i) table.emplace(list[i], std::move(vecs[i]));
    table_ptr = &table;
  }
  a.graph = build_graph(instance, config.merge, table_ptr);

  auto oracle = context.make_oracle();
  a.relations = infer_relations(a.graph, config.metric.relation, config.epsilon_lat, *oracle,
                                context.relation_cache.get());
  a.oracle_calls = oracle->calls_made();
  a.budget_cap = oracle->budget_cap();
  annotate_relations(a.graph, a.relations.table);

  std::vector<std::string> canons;
  for (const auto& n : a.graph.nodes) canons.push_back(n.canon);
  a.semantic = context.embedder->embed(canons);
  a.features = compute_features(a.graph, a.semantic);
  a.distances = distance_matrix(a.features, config.metric, a.relations.table);
  a.metric = build_knn_graph(a.distances, config.metric.k, config.metric.tau_percentile);

  a.diagram = compute_persistence(build_filtration(a.metric));
  a.selected = select_features(a.diagram, config.selection);
  a.scales = operating_scales(a.selected, a.metric.tau_value);

  SkeletonInputs in;
  in.graph = &a.graph;
  in.distances = &a.distances;
  in.metric = &a.metric;
  in.selected = &a.selected;
  in.scales = &a.scales;
  in.splice = config.splice;
  a.skeletons = extract_skeletons(in);

  VoteParams vote;
  vote.persistence_factor = config.persistence_factor;
  vote.extractor = AnswerExtractor(config.answer_pattern);
  a.tally = aggregate_answers(a.skeletons, a.graph, vote);

  if (!a.skeletons.skeletons.empty() && a.skeletons.skeletons.front().spliced) {
    a.verification = verify_with_loop(a.tally, a.skeletons.skeletons.front(), a.graph, a.relations.table,
                                      config.relation_mode == RelationMode::rule);
  }
  return a;
}

InstanceReport make_report(const ProblemInstance& instance, const InstanceAnalysis& a) {
  InstanceReport r;
  r.instance_id = instance.instance_id;
  r.gold = instance.gold_answer;
  r.tally = a.tally;
  r.skeletons = a.skeletons.skeletons;
  for (const auto& sk : r.skeletons) {
    std::vector<std::string> texts;
    for (auto v : sk.path) texts.push_back(a.graph.nodes[v].text);
    r.skeleton_texts.push_back(std::move(texts));
  }
  auto& p = r.persistence;
  if (!a.selected.h1.empty()) p.top_h1_lifespan = a.selected.h1.front().capped_lifespan(a.metric.tau_value);
  p.selected_h0 = a.selected.h0.size();
  p.selected_h1 = a.selected.h1.size();
  p.h0_pairs = a.diagram.in_dimension(0).size();
  p.h1_pairs = a.diagram.in_dimension(1).size();
  p.eps_h0 = a.scales.eps_h0;
  p.tau_value = a.metric.tau_value;
  r.verification = a.verification;
  r.oracle_calls = a.oracle_calls;
  r.budget_cap = a.budget_cap;
  r.graph_nodes = a.graph.size();
  r.warnings = a.metric.warnings;
  r.warnings.insert(r.warnings.end(), a.scales.warnings.begin(), a.scales.warnings.end());
  r.warnings.insert(r.warnings.end(), a.skeletons.warnings.begin(), a.skeletons.warnings.end());
  if (a.relations.over_budget_chunks) {
    r.warnings.push_back(std::to_string(a.relations.over_budget_chunks) + " relation chunks over budget");
  }
  if (a.relations.warnings) r.warnings.push_back(std::to_string(a.relations.warnings) + " relation labels degraded");
  return r;
}

InstanceReport run_instance(const ProblemInstance& instance, const RunConfig& config, PipelineContext& context) {
  try {
    return make_report(instance, analyze_instance(instance, config, context));
  } catch (const std::exception& e) {
    InstanceReport r;
    r.instance_id = instance.instance_id;
    r.gold = instance.gold_answer;
    r.error = e.what();
    return r;
  }
}

BatchResult run_batch(const std::vector<ProblemInstance>& instances, const RunConfig& config,
                      PipelineContext& context) {
  validate(config);
  BatchResult batch;
  batch.reports.resize(instances.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < instances.size(); i = next++) {
      batch.reports[i] = run_instance(instances[i], config, context);
    }
  };
  const std::size_t width = std::max<std::size_t>(1, std::min(config.workers, instances.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < width; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::stable_sort(batch.reports.begin(), batch.reports.end(),
                   [](const InstanceReport& a, const InstanceReport& b) { return a.instance_id < b.instance_id; });
  batch.failures = static_cast<std::size_t>(
      std::count_if(batch.reports.begin(), batch.reports.end(), [](const InstanceReport& r) { return r.error; }));
  return batch;
}

void write_batch_outputs(const BatchResult& batch, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto dir = std::filesystem::path(out_dir);
  std::ofstream reports(dir / "reports.jsonl", std::ios::binary);
  std::ofstream summary(dir / "summary.csv", std::ios::binary);
  if (!reports || !summary) throw Error("cannot write outputs in " + out_dir);
  for (const auto& r : batch.reports) reports << report_json(r) << '\n';
  summary << summary_csv(batch.reports);
}

}  // namespace hypotopo
