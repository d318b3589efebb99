#include "hypotopo/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "hypotopo/error.hpp"
#include "hypotopo/text.hpp"

namespace hypotopo {

namespace {

std::string exact(double x) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_real(std::string_view key, std::string_view v) {
  try {
    std::size_t used = 0;
    const std::string s(v);
    double x = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(x)) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(v) + "'");
  }
}

std::uint64_t parse_uint(std::string_view key, std::string_view v) {
  std::uint64_t x = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return x;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(std::string(key) + ": expected true/false, got '" + std::string(v) + "'");
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Get>
Field real_field(std::string key, Get get) {
  auto k = key;
  return Field{std::move(key), [get, k](RunConfig& c, std::string_view v) { get(c) = parse_real(k, v); },
               [get](const RunConfig& c) { return exact(get(const_cast<RunConfig&>(c))); }};
}

template <typename Get>
Field size_field(std::string key, Get get) {
  auto k = key;
  return Field{std::move(key),
               [get, k](RunConfig& c, std::string_view v) { get(c) = static_cast<std::size_t>(parse_uint(k, v)); },
               [get](const RunConfig& c) { return std::to_string(get(const_cast<RunConfig&>(c))); }};
}

template <typename Get>
Field string_field(std::string key, Get get) {
  return Field{std::move(key), [get](RunConfig& c, std::string_view v) { get(c) = std::string(v); },
               [get](const RunConfig& c) { return get(const_cast<RunConfig&>(c)); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(real_field("theta_merge", [](RunConfig& c) -> double& { return c.merge.theta_merge; }));
    f.push_back(Field{"similarity_mode",
                      [](RunConfig& c, std::string_view v) {
                        if (v == "jaccard") c.merge.similarity_mode = SimilarityMode::canon_jaccard;
                        else if (v == "cosine") c.merge.similarity_mode = SimilarityMode::embedding_cosine;
                        else if (v == "blend") c.merge.similarity_mode = SimilarityMode::blend;
                        else throw ConfigError("similarity_mode: expected jaccard, cosine or blend");
                      },
                      [](const RunConfig& c) -> std::string {
                        switch (c.merge.similarity_mode) {
                          case SimilarityMode::canon_jaccard: return "jaccard";
                          case SimilarityMode::embedding_cosine: return "cosine";
                          case SimilarityMode::blend: return "blend";
                        }
                        return "jaccard";
                      }});
    f.push_back(real_field("blend_weight", [](RunConfig& c) -> double& { return c.merge.blend_weight; }));
    f.push_back(real_field("alpha", [](RunConfig& c) -> double& { return c.metric.alpha; }));
    f.push_back(real_field("beta", [](RunConfig& c) -> double& { return c.metric.beta; }));
    f.push_back(real_field("nu", [](RunConfig& c) -> double& { return c.metric.nu; }));
    f.push_back(real_field("delta_logic", [](RunConfig& c) -> double& { return c.metric.relation.delta_logic; }));
    f.push_back(real_field("M", [](RunConfig& c) -> double& { return c.metric.relation.M; }));
    f.push_back(real_field("W", [](RunConfig& c) -> double& { return c.metric.relation.W; }));
    f.push_back(size_field("S", [](RunConfig& c) -> std::size_t& { return c.metric.relation.chunk_size; }));
    f.push_back(real_field("epsilon_lat", [](RunConfig& c) -> double& { return c.epsilon_lat; }));
    f.push_back(size_field("k", [](RunConfig& c) -> std::size_t& { return c.metric.k; }));
    f.push_back(real_field("tau_percentile", [](RunConfig& c) -> double& { return c.metric.tau_percentile; }));
    f.push_back(Field{"selection_mode",
                      [](RunConfig& c, std::string_view v) {
                        if (v == "top_k") c.selection.mode = SelectionMode::top_k;
                        else if (v == "top_q") c.selection.mode = SelectionMode::top_q_percent;
                        else throw ConfigError("selection_mode: expected top_k or top_q");
                      },
                      [](const RunConfig& c) -> std::string {
                        return c.selection.mode == SelectionMode::top_k ? "top_k" : "top_q";
                      }});
    f.push_back(size_field("K", [](RunConfig& c) -> std::size_t& { return c.selection.K; }));
    f.push_back(real_field("q", [](RunConfig& c) -> double& { return c.selection.q; }));
    f.push_back(real_field("delta_loop", [](RunConfig& c) -> double& { return c.splice.delta_loop; }));
    f.push_back(real_field("lambda", [](RunConfig& c) -> double& { return c.splice.lambda; }));
    f.push_back(size_field("budget", [](RunConfig& c) -> std::size_t& { return c.budget; }));
    f.push_back(Field{"embed_mode",
                      [](RunConfig& c, std::string_view v) {
                        if (v == "fallback") c.embed_mode = EmbedMode::fallback;
                        else if (v == "file") c.embed_mode = EmbedMode::file;
                        else if (v == "remote") c.embed_mode = EmbedMode::remote;
                        else throw ConfigError("embed_mode: expected file, remote or fallback");
                      },
                      [](const RunConfig& c) -> std::string {
                        switch (c.embed_mode) {
                          case EmbedMode::fallback: return "fallback";
                          case EmbedMode::file: return "file";
                          case EmbedMode::remote: return "remote";
                        }
                        return "fallback";
                      }});
    f.push_back(size_field("embed_dim", [](RunConfig& c) -> std::size_t& { return c.embed_dim; }));
    f.push_back(string_field("embed_file", [](RunConfig& c) -> std::string& { return c.embed_file; }));
    f.push_back(string_field("embed_cache", [](RunConfig& c) -> std::string& { return c.embed_cache; }));
    f.push_back(string_field("embed_model", [](RunConfig& c) -> std::string& { return c.embed_model; }));
    f.push_back(Field{"relation_mode",
                      [](RunConfig& c, std::string_view v) {
                        if (v == "rule") c.relation_mode = RelationMode::rule;
                        else if (v == "remote") c.relation_mode = RelationMode::remote;
                        else throw ConfigError("relation_mode: expected rule or remote");
                      },
                      [](const RunConfig& c) -> std::string {
                        return c.relation_mode == RelationMode::rule ? "rule" : "remote";
                      }});
    f.push_back(string_field("relation_cache", [](RunConfig& c) -> std::string& { return c.relation_cache; }));
    f.push_back(Field{"persistence_factor",
                      [](RunConfig& c, std::string_view v) { c.persistence_factor = parse_bool("persistence_factor", v); },
                      [](const RunConfig& c) -> std::string { return c.persistence_factor ? "true" : "false"; }});
    f.push_back(string_field("answer_pattern", [](RunConfig& c) -> std::string& { return c.answer_pattern; }));
    f.push_back(Field{"seed",
                      [](RunConfig& c, std::string_view v) { c.seed = parse_uint("seed", v); },
                      [](const RunConfig& c) { return std::to_string(c.seed); }});
    f.push_back(size_field("workers", [](RunConfig& c) -> std::size_t& { return c.workers; }));
    f.push_back(size_field("n_bins", [](RunConfig& c) -> std::size_t& { return c.n_bins; }));
    f.push_back(string_field("backbone", [](RunConfig& c) -> std::string& { return c.backbone; }));
    return f;
  }();
  return table;
}

}  // namespace

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(config, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void apply_config_text(RunConfig& config, std::string_view text, std::string_view origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(lineno) + ": expected key = value");
    }
    try {
      apply_setting(config, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  apply_config_text(config, buf.str(), path);
}

RunConfig resolve_config(const std::string& config_path,
                         const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig config;
  if (!config_path.empty()) apply_config_file(config, config_path);
  for (const auto& [key, value] : overrides) apply_setting(config, key, value);
  validate(config);
  return config;
}

void validate(const RunConfig& c) {
  validate(c.metric);
  validate(c.metric.relation);
  validate(c.splice);
  if (!(c.merge.theta_merge >= 0.0 && c.merge.theta_merge <= 1.0)) throw ConfigError("theta_merge must lie in [0,1]");
  if (!(c.merge.blend_weight >= 0.0 && c.merge.blend_weight <= 1.0)) throw ConfigError("blend_weight must lie in [0,1]");
  if (!(c.epsilon_lat >= 0.0)) throw ConfigError("epsilon_lat must be non-negative");
  if (c.selection.mode == SelectionMode::top_k && c.selection.K == 0) throw ConfigError("K must be >= 1");
  if (c.selection.mode == SelectionMode::top_q_percent && !(c.selection.q > 0.0 && c.selection.q <= 100.0)) {
    throw ConfigError("q must lie in (0, 100]");
  }
  if (c.embed_dim == 0) throw ConfigError("embed_dim must be >= 1");
  if (c.embed_mode == EmbedMode::file && c.embed_file.empty()) throw ConfigError("embed_mode=file needs embed_file");
  if (c.workers == 0) throw ConfigError("workers must be >= 1");
  if (c.n_bins < 2) throw ConfigError("n_bins must be >= 2");
}

std::string dump_config(const RunConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(config) + "\n";
  return out;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

}  // namespace hypotopo
