#include "hypotopo/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>

#include "hypotopo/error.hpp"
#include "hypotopo/text.hpp"

namespace hypotopo {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

const std::vector<std::string>* group_of(const std::string& word) {
  const std::string w = lower(word);
  for (const auto& g : synonym_groups()) {
    if (std::find(g.begin(), g.end(), w) != g.end()) return &g;
  }
  return nullptr;
}

struct Numbers {
  long a, b, c, sum, result;
};

std::string step_text(std::size_t k, const std::string& body) { return "step " + std::to_string(k) + ": " + body; }

// Step texts of one path. Branch 0 is the plain derivation. Branch 1 slips on
// the sum at step 2, carries the slip forward, then rechecks the sum before the
// closing computation and reconverges on the shared answer step; with branch 0
// it closes a verification cycle whose slipped side contradicts the other.
std::vector<std::string> path_texts(const Numbers& n, std::size_t length, int branch, long slip) {
  const std::string c = std::to_string(n.c), res = std::to_string(n.result), sum = std::to_string(n.sum);
  const std::string carried = branch == 0 ? sum : std::to_string(n.sum + slip);
  std::vector<std::string> steps;
  steps.push_back(step_text(1, "derive x = " + std::to_string(n.a) + " and y = " + std::to_string(n.b)));
  steps.push_back(step_text(2, "derive s = x + y = " + carried));
  for (std::size_t k = 3; k + 1 < length; ++k) {
    steps.push_back(step_text(k, "derive s" + std::to_string(k) + " = s = " + carried));
  }
  if (branch == 0) {
    steps.push_back(step_text(length - 1, "compute t = " + c + " * s = " + res));
  } else {
    steps.push_back(step_text(length - 1, "recheck s = x + y = " + sum + " then verify t = s * " + c + " = " + res));
  }
  steps.push_back(step_text(length, "therefore the final answer is t = " + res));
  return steps;
}

}  // namespace

SplitRng::SplitRng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed;
  const std::uint64_t a = splitmix64(x);
  x ^= stream * 0xD1B54A32D192ED03ULL;
  const std::uint64_t b = splitmix64(x);
  engine_.seed(a ^ (b << 1));
}

std::uint64_t SplitRng::next() { return engine_(); }

double SplitRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t SplitRng::below(std::uint64_t n) {
  if (n == 0) throw Error("SplitRng::below(0)");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v;
  do {
    v = next();
  } while (v >= limit);
  return v % n;
}

void validate(const SynthConfig& c) {
  if (c.paths < 1) throw ConfigError("synth: paths must be >= 1");
  if (c.planted_loop && c.paths < 3) throw ConfigError("synth: a planted loop needs paths >= 3");
  if (c.backbone_length < 3) throw ConfigError("synth: backbone_length must be >= 3");
  if (c.planted_loop && c.backbone_length < 4) throw ConfigError("synth: a planted loop needs backbone_length >= 4");
  auto range = [](double lo, double hi, const char* what) {
    if (!(lo >= 0.0 && hi <= 1.0 && lo <= hi)) throw ConfigError(std::string("synth: bad ") + what + " range");
  };
  range(c.backbone_confidence_lo, c.backbone_confidence_hi, "backbone confidence");
  range(c.distractor_confidence_lo, c.distractor_confidence_hi, "distractor confidence");
  if (!(c.noise >= 0.0 && c.noise <= 1.0)) throw ConfigError("synth: noise must lie in [0,1]");
}

ProblemInstance generate_instance(const SynthConfig& config, std::size_t index) {
  SplitRng rng(config.seed, index);
  Numbers n{};
  n.a = static_cast<long>(2 + rng.below(48));
  n.b = static_cast<long>(2 + rng.below(48));
  n.c = static_cast<long>(2 + rng.below(8));
  n.sum = n.a + n.b;
  n.result = n.c * n.sum;
  std::string answer = std::to_string(n.result);
  if (config.planted_answer) {
    answer = *config.planted_answer;
  }

  ProblemInstance inst;
  char id[32];
  std::snprintf(id, sizeof id, "%04zu", index);
  inst.instance_id = config.id_prefix + "/" + id;
  inst.question = "Let x = " + std::to_string(n.a) + " and y = " + std::to_string(n.b) + ". What is " +
                  std::to_string(n.c) + " * (x + y)?";

  auto confidence = [&](bool distractor) {
    return distractor ? rng.uniform(config.distractor_confidence_lo, config.distractor_confidence_hi)
                      : rng.uniform(config.backbone_confidence_lo, config.backbone_confidence_hi);
  };
  auto add_path = [&](const std::string& path_id, const std::vector<std::string>& texts, const std::string& ans,
                      bool distractor) {
    ReasoningPath p;
    p.path_id = path_id;
    for (std::size_t k = 0; k < texts.size(); ++k) {
      ReasoningStep s;
      s.text = texts[k];
      if (config.noise > 0.0) s.text = paraphrase_text(s.text, config.noise, rng).text;
      s.confidence = confidence(distractor && k > 0);
      if (k + 1 == texts.size()) s.answer = ans;
      p.steps.push_back(std::move(s));
    }
    inst.paths.push_back(std::move(p));
  };

  long slip = static_cast<long>(1 + rng.below(9)) * (rng.bernoulli(0.5) ? 1 : -1);
  if (n.sum + slip <= 0) slip = -slip;
  for (std::size_t i = 0; i < config.paths; ++i) {
    const int branch = config.planted_loop ? static_cast<int>(i % 2) : 0;
    add_path("p" + std::to_string(i + 1), path_texts(n, config.backbone_length, branch, slip), answer, false);
  }

  std::set<long> used{n.result};
  for (std::size_t j = 0; j < config.distractors; ++j) {
    Numbers w = n;
    do {
      w.sum = n.sum + static_cast<long>(1 + rng.below(9)) * (rng.bernoulli(0.5) ? 1 : -1);
      w.result = w.c * w.sum;
    } while (used.count(w.result) || w.sum <= 0 || (config.planted_loop && w.sum == n.sum + slip));
    used.insert(w.result);
    auto texts = path_texts(w, config.backbone_length, 0, 0);
    texts.front() = path_texts(n, config.backbone_length, 0, 0).front();  // shared opening step
    add_path("d" + std::to_string(j + 1), texts, std::to_string(w.result), true);
  }

  if (config.corrupt_gold) {
    long wrong = n.result;
    while (used.count(wrong)) wrong += n.c;
    inst.gold_answer = std::to_string(wrong);
  } else {
    inst.gold_answer = answer;
  }
  validate(inst);
  return inst;
}

std::vector<ProblemInstance> generate(const SynthConfig& config) {
  validate(config);
  std::vector<ProblemInstance> out;
  out.reserve(config.instances);
  for (std::size_t i = 0; i < config.instances; ++i) out.push_back(generate_instance(config, i));
  return out;
}

const std::vector<std::vector<std::string>>& synonym_groups() {
  static const std::vector<std::vector<std::string>> groups{
      {"derive", "obtain", "deduce"},
      {"compute", "calculate", "evaluate"},
      {"verify", "check", "confirm"},
      {"therefore", "thus", "hence"},
      {"final", "ultimate"},
      {"answer", "result"},
  };
  return groups;
}

ParaphraseResult paraphrase_text(std::string_view text, double rate, SplitRng& rng) {
  ParaphraseResult r;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!std::isalpha(static_cast<unsigned char>(text[i]))) {
      r.text += text[i++];
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
    std::string word(text.substr(i, j - i));
    // a letter run glued to digits (s3, x2) is an identifier, not a word
    const bool glued = (i > 0 && std::isdigit(static_cast<unsigned char>(text[i - 1]))) ||
                       (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])));
    const auto* group = glued ? nullptr : group_of(word);
    if (group && rate > 0.0 && rng.bernoulli(rate)) {
      const std::string current = lower(word);
      std::vector<std::string> others;
      for (const auto& w : *group) {
        if (w != current) others.push_back(w);
      }
      word = others[rng.below(others.size())];
      if (rng.bernoulli(0.5)) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
      ++r.swaps;
    }
    r.text += word;
    i = j;
  }
  return r;
}

ProblemInstance perturb_paraphrase(const ProblemInstance& instance, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("paraphrase rate must lie in [0,1]");
  SplitRng rng(seed, fnv1a64(instance.instance_id));
  ProblemInstance out = instance;
  for (auto& p : out.paths) {
    for (auto& s : p.steps) s.text = paraphrase_text(s.text, rate, rng).text;
  }
  return out;
}

ProblemInstance jitter_confidence(const ProblemInstance& instance, double amplitude, std::uint64_t seed) {
  SplitRng rng(seed ^ 0x5EEDULL, fnv1a64(instance.instance_id));
  ProblemInstance out = instance;
  for (auto& p : out.paths) {
    for (auto& s : p.steps) s.confidence = std::clamp(s.confidence + rng.uniform(-amplitude, amplitude), 0.0, 1.0);
  }
  return out;
}

}  // namespace hypotopo
