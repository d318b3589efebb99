#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "hypotopo/trace_model.hpp"

namespace hypotopo {

/// mt19937_64 seeded from (seed, stream) through splitmix64. Draws use the raw
/// engine output only, so they do not depend on the standard library's
/// distribution implementations.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed, std::uint64_t stream = 0);
  std::uint64_t next();
  double uniform();                              // [0, 1)
  double uniform(double lo, double hi);          // [lo, hi)
  std::uint64_t below(std::uint64_t n);          // [0, n)
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t instances = 10;
  std::size_t paths = 3;             // backbone paths N
  std::size_t backbone_length = 5;   // steps per backbone path, answer step included
  std::size_t distractors = 2;
  double noise = 0.0;                // paraphrase rate applied to every step
  bool planted_loop = true;
  std::optional<std::string> planted_answer;
  double backbone_confidence_lo = 0.80;
  double backbone_confidence_hi = 0.95;
  double distractor_confidence_lo = 0.30;
  double distractor_confidence_hi = 0.50;
  bool corrupt_gold = false;         // gold differs from the backbone answer
  std::string id_prefix = "synth";
};

/// paths >= 1, backbone_length >= 3; a planted loop needs paths >= 3 and
/// backbone_length >= 4. Confidence ranges inside [0,1] and ordered, noise in [0,1].
void validate(const SynthConfig& config);

/// One instance per index; instance i depends only on (seed, i).
std::vector<ProblemInstance> generate(const SynthConfig& config);
ProblemInstance generate_instance(const SynthConfig& config, std::size_t index);

/// Built-in synonym groups used by the paraphraser.
const std::vector<std::vector<std::string>>& synonym_groups();

struct ParaphraseResult {
  std::string text;
  std::size_t swaps = 0;
};

/// Replaces each alphabetic token that belongs to a synonym group, with
/// probability `rate`, by a different member of its group (random casing of
/// the first letter). Numbers, operators and spacing are left alone.
ParaphraseResult paraphrase_text(std::string_view text, double rate, SplitRng& rng);

/// Paraphrases every step of every path. Deterministic under seed.
ProblemInstance perturb_paraphrase(const ProblemInstance& instance, double rate, std::uint64_t seed);

/// Adds uniform noise in [-amplitude, amplitude] to every step confidence,
/// clamped to [0,1]. Models re-scoring of rewritten steps.
ProblemInstance jitter_confidence(const ProblemInstance& instance, double amplitude, std::uint64_t seed);

}  // namespace hypotopo
