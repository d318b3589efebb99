#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hypotopo/ghg.hpp"
#include "hypotopo/homology.hpp"
#include "hypotopo/metric_space.hpp"
#include "hypotopo/skeleton.hpp"

namespace hypotopo {

enum class EmbedMode { fallback, file, remote };
enum class RelationMode { rule, remote };

/// Every tunable of a run. Defaults follow the reference parameter ledger.
struct RunConfig {
  MergePolicy merge;
  MetricParams metric;  // includes relation params (M, W, S, delta_logic)
  double epsilon_lat = 0.1;
  SelectionPolicy selection;
  SpliceParams splice;
  std::size_t budget = 19;
  EmbedMode embed_mode = EmbedMode::fallback;
  std::size_t embed_dim = 64;
  std::string embed_file;
  std::string embed_cache;
  std::string embed_model = "text-embedding-3-large";
  RelationMode relation_mode = RelationMode::rule;
  std::string relation_cache;
  bool persistence_factor = true;
  std::string answer_pattern;  // empty: built-in extractor
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::size_t n_bins = 10;
  std::string backbone = "unspecified";
};

/// Sets one key from its textual value. Throws ConfigError on an unknown key
/// or a malformed value.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Applies a flat `key = value` file (lines starting with '#' are comments, blank lines
/// ignored). Throws ConfigError naming the line on failure.
void apply_config_text(RunConfig& config, std::string_view text, std::string_view origin = "config");
void apply_config_file(RunConfig& config, const std::string& path);

/// Defaults, then the file at `config_path` (skipped when empty), then each
/// override in order; the result is validated.
RunConfig resolve_config(const std::string& config_path,
                         const std::vector<std::pair<std::string, std::string>>& overrides);

/// Cross-field checks, including alpha + beta + nu = 1.
void validate(const RunConfig& config);

/// Every key in a fixed order, one `key = value` per line; feeding the output
/// back through apply_config_text reproduces the config.
std::string dump_config(const RunConfig& config);

/// All keys understood by apply_setting.
const std::vector<std::string>& config_keys();

}  // namespace hypotopo
