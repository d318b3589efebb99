// hypotopo command-line driver.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hypotopo/aggregate.hpp"
#include "hypotopo/config.hpp"
#include "hypotopo/error.hpp"
#include "hypotopo/pipeline.hpp"
#include "hypotopo/stats.hpp"
#include "hypotopo/synth.hpp"
#include "hypotopo/trace_model.hpp"

namespace fs = std::filesystem;
using namespace hypotopo;

namespace {

// Flags shared by every pipeline subcommand. Each flag maps onto a config key
// and only counts as an override when given.
struct ConfigFlags {
  std::string config_path;
  bool dump = false;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> flag_values;  // (flag, key)
  std::map<std::string, std::string> raw;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "Flat key=value config file")->check(CLI::ExistingFile);
    app->add_flag("--dump-config", dump, "Print the resolved config and exit");
    app->add_option("--set", sets, "Override any config key (key=value), repeatable");
    add(app, "--seed", "seed");
    add(app, "--workers", "workers");
    add(app, "--k", "k");
    add(app, "--theta-merge", "theta_merge");
    add(app, "--alpha", "alpha");
    add(app, "--beta", "beta");
    add(app, "--nu", "nu");
    add(app, "--K", "K");
    add(app, "--delta-loop", "delta_loop");
    add(app, "--budget", "budget");
    add(app, "--embed-mode", "embed_mode");
    add(app, "--relation-mode", "relation_mode");
  }

  void add(CLI::App* app, const std::string& flag, const std::string& key) {
    flag_values.emplace_back(flag, key);
    app->add_option(flag, raw[key], "Sets config key " + key);
  }

  RunConfig resolve(CLI::App* app) const {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [flag, key] : flag_values) {
      if (app->count(flag)) overrides.emplace_back(key, raw.at(key));
    }
    return resolve_config(config_path, overrides);
  }
};

std::vector<ProblemInstance> load(const std::string& path) { return parse_trace_file(path); }

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string skeleton_json(const ProblemInstance& inst, const InstanceAnalysis& a) {
  nlohmann::ordered_json j;
  j["instance_id"] = inst.instance_id;
  j["clusters"] = a.skeletons.clusters.size();
  j["loops"] = a.skeletons.loops.size();
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& sk : a.skeletons.skeletons) {
    nlohmann::ordered_json s;
    s["cluster"] = sk.cluster;
    s["nodes"] = sk.path;
    std::vector<std::string> texts;
    for (auto v : sk.path) texts.push_back(a.graph.nodes[v].text);
    s["texts"] = texts;
    s["spliced"] = sk.spliced;
    s["pivot"] = sk.pivot ? nlohmann::ordered_json(*sk.pivot) : nlohmann::ordered_json(nullptr);
    nlohmann::ordered_json tour = nlohmann::ordered_json::array();
    for (auto [u, v] : sk.tour_edges) tour.push_back({u, v});
    s["tour_edges"] = tour;
    s["stats"] = {{"contributing_paths", sk.stats.contributing_paths},
                  {"average_edge_weight", sk.stats.average_edge_weight},
                  {"loop_lifespan", sk.stats.loop_lifespan}};
    list.push_back(std::move(s));
  }
  j["skeletons"] = list;
  j["warnings"] = a.skeletons.warnings;
  return j.dump();
}

// Runs `fn` for every instance, isolating failures; returns the failure count.
template <typename Fn>
std::size_t for_each_instance(const std::vector<ProblemInstance>& instances, Fn fn) {
  std::size_t failures = 0;
  for (const auto& inst : instances) {
    try {
      fn(inst);
    } catch (const std::exception& e) {
      ++failures;
      std::cerr << inst.instance_id << ": " << e.what() << '\n';
    }
  }
  return failures;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topological aggregation of multi-path reasoning traces"};
  app.require_subcommand(1);

  std::string traces, out_dir = "out";

  auto* run = app.add_subcommand("run", "Full pipeline: reports.jsonl + summary.csv");
  ConfigFlags run_flags;
  run_flags.attach(run);
  run->add_option("--traces", traces, "Trace file (JSON lines)");
  run->add_option("--out", out_dir, "Output directory");

  auto* ingest = app.add_subcommand("ingest-validate", "Parse and validate a trace file");
  ingest->add_option("--traces", traces, "Trace file (JSON lines)")->required();

  auto* graph_cmd = app.add_subcommand("build-graph", "Hypothesis graphs as graphs.jsonl");
  ConfigFlags graph_flags;
  graph_flags.attach(graph_cmd);
  graph_cmd->add_option("--traces", traces, "Trace file (JSON lines)");
  graph_cmd->add_option("--out", out_dir, "Output directory");

  auto* pers = app.add_subcommand("persistence", "Persistence diagrams as persistence.csv");
  ConfigFlags pers_flags;
  pers_flags.attach(pers);
  pers->add_option("--traces", traces, "Trace file (JSON lines)");
  pers->add_option("--out", out_dir, "Output directory");

  auto* skel = app.add_subcommand("skeleton", "Ranked skeletons as skeletons.jsonl");
  ConfigFlags skel_flags;
  skel_flags.attach(skel);
  skel->add_option("--traces", traces, "Trace file (JSON lines)");
  skel->add_option("--out", out_dir, "Output directory");

  auto* answer = app.add_subcommand("answer", "Print instance_id and winning answer");
  ConfigFlags answer_flags;
  answer_flags.attach(answer);
  answer->add_option("--traces", traces, "Trace file (JSON lines)");

  std::string summary_path;
  auto* stats_cmd = app.add_subcommand("stats", "Statistics over a summary.csv");
  ConfigFlags stats_flags;
  stats_flags.attach(stats_cmd);
  stats_cmd->add_option("--summary", summary_path, "summary.csv from run")->required();
  stats_cmd->add_option("--out", out_dir, "Output directory");

  std::string sigmas = "0,0.01,0.05,0.1";
  std::size_t trials = 5;
  auto* perturb = app.add_subcommand("perturb", "Embedding-noise stability per instance");
  ConfigFlags perturb_flags;
  perturb_flags.attach(perturb);
  perturb->add_option("--traces", traces, "Trace file (JSON lines)");
  perturb->add_option("--out", out_dir, "Output directory");
  perturb->add_option("--sigmas", sigmas, "Comma-separated noise magnitudes");
  perturb->add_option("--trials", trials, "Noise draws per magnitude");

  SynthConfig sc;
  std::string synth_out = "traces.jsonl";
  std::string planted;
  bool no_loop = false;
  double paraphrase_rate = 0.0;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic trace corpus");
  synth->add_option("--out", synth_out, "Output trace file");
  synth->add_option("--seed", sc.seed);
  synth->add_option("--instances", sc.instances, "Number of instances");
  synth->add_option("--paths", sc.paths, "Backbone paths per instance");
  synth->add_option("--length", sc.backbone_length, "Steps per backbone path");
  synth->add_option("--distractors", sc.distractors, "Wrong-answer paths per instance");
  synth->add_option("--noise", sc.noise, "Paraphrase rate applied while generating");
  synth->add_option("--answer", planted, "Planted answer");
  synth->add_flag("--no-loop", no_loop, "Do not plant a verification loop");
  synth->add_flag("--corrupt-gold", sc.corrupt_gold, "Store a gold answer no path reaches");
  synth->add_option("--distractor-conf-lo", sc.distractor_confidence_lo);
  synth->add_option("--distractor-conf-hi", sc.distractor_confidence_hi);
  synth->add_option("--backbone-conf-lo", sc.backbone_confidence_lo);
  synth->add_option("--backbone-conf-hi", sc.backbone_confidence_hi);
  synth->add_option("--prefix", sc.id_prefix, "instance_id prefix");
  synth->add_option("--paraphrase", paraphrase_rate, "Paraphrase the finished corpus at this rate");

  CLI11_PARSE(app, argc, argv);

  auto need_traces = [&] {
    if (traces.empty()) throw ConfigError("--traces is required");
  };

  try {
    if (*ingest) {
      auto instances = load(traces);
      std::size_t paths = 0, steps = 0;
      for (const auto& inst : instances) {
        paths += inst.paths.size();
        for (const auto& p : inst.paths) steps += p.steps.size();
      }
      std::cout << instances.size() << " instances, " << paths << " paths, " << steps << " steps: ok\n";
      return 0;
    }

    if (*synth) {
      sc.planted_loop = !no_loop;
      if (!planted.empty()) sc.planted_answer = planted;
      auto instances = generate(sc);
      if (paraphrase_rate > 0.0) {
        for (auto& inst : instances) inst = perturb_paraphrase(inst, paraphrase_rate, sc.seed);
      }
      write_file(synth_out, serialize_traces(instances));
      std::cout << "wrote " << instances.size() << " instances to " << synth_out << '\n';
      return 0;
    }

    // Pipeline subcommands share config resolution.
    std::pair<CLI::App*, ConfigFlags*> cmds[] = {{run, &run_flags},       {graph_cmd, &graph_flags},
                                                 {pers, &pers_flags},     {skel, &skel_flags},
                                                 {answer, &answer_flags}, {stats_cmd, &stats_flags},
                                                 {perturb, &perturb_flags}};
    CLI::App* cmd = nullptr;
    ConfigFlags* flags = nullptr;
    for (auto [c, f] : cmds) {
      if (*c) {
        cmd = c;
        flags = f;
      }
    }
    RunConfig config = flags->resolve(cmd);
    if (flags->dump) {
      std::cout << dump_config(config);
      return 0;
    }

    if (cmd == stats_cmd) {
      auto samples = samples_from_summary(read_file(summary_path));
      StatsReport report = compute_stats(samples, config.n_bins, config.backbone);
      const fs::path dir(out_dir);
      write_file(dir / "stats.json", stats_json(report) + "\n");
      write_file(dir / "roc.csv", roc_csv(report));
      write_file(dir / "bins.csv", bins_csv(report));
      write_file(dir / "boxplot.csv", boxplot_csv(report));
      std::cout << stats_json(report) << '\n';
      return 0;
    }

    need_traces();
    auto instances = load(traces);
    PipelineContext ctx = make_context(config);

    if (cmd == run) {
      BatchResult batch = run_batch(instances, config, ctx);
      write_batch_outputs(batch, out_dir);
      std::cout << batch.reports.size() << " instances, " << batch.failures << " failed; outputs in " << out_dir
                << '\n';
      for (const auto& r : batch.reports) {
        if (r.error) std::cerr << r.instance_id << ": " << *r.error << '\n';
      }
      return batch.failures ? 3 : 0;
    }

    if (cmd == answer) {
      BatchResult batch = run_batch(instances, config, ctx);
      for (const auto& r : batch.reports) {
        std::cout << r.instance_id << '\t' << (r.error ? "error: " + *r.error : r.tally.winner) << '\n';
      }
      return batch.failures ? 3 : 0;
    }

    std::ostringstream body;
    std::size_t failures = 0;
    std::string file;
    if (cmd == graph_cmd) {
      file = "graphs.jsonl";
      failures = for_each_instance(instances, [&](const ProblemInstance& inst) {
        body << serialize_graph(build_graph(inst, config.merge)) << '\n';
      });
    } else if (cmd == pers) {
      file = "persistence.csv";
      body << "instance_id,dimension,birth,death,lifespan\n";
      failures = for_each_instance(instances, [&](const ProblemInstance& inst) {
        auto a = analyze_instance(inst, config, ctx);
        std::istringstream rows(diagram_csv(a.diagram));
        std::string line;
        std::getline(rows, line);  // header
        while (std::getline(rows, line)) body << inst.instance_id << ',' << line << '\n';
      });
    } else if (cmd == skel) {
      file = "skeletons.jsonl";
      failures = for_each_instance(instances, [&](const ProblemInstance& inst) {
        body << skeleton_json(inst, analyze_instance(inst, config, ctx)) << '\n';
      });
    } else if (cmd == perturb) {
      file = "perturbation.jsonl";
      const auto levels = parse_list(sigmas);
      failures = for_each_instance(instances, [&](const ProblemInstance& inst) {
        auto a = analyze_instance(inst, config, ctx);
        std::vector<PerturbationSummary> runs;
        for (double s : levels) {
          runs.push_back(perturb_and_compare(a.graph, a.semantic, config.metric, a.relations.table,
                                             config.selection, s, config.seed, trials));
        }
        auto doc = nlohmann::ordered_json::parse(perturbation_json(runs));
        body << nlohmann::ordered_json{{"instance_id", inst.instance_id}, {"runs", doc}}.dump() << '\n';
      });
    }
    write_file(fs::path(out_dir) / file, body.str());
    std::cout << instances.size() << " instances, " << failures << " failed; wrote " << (fs::path(out_dir) / file)
              << '\n';
    return failures ? 3 : 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
