#include "hypotopo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

#include "hypotopo/csv.hpp"
#include "hypotopo/error.hpp"
#include "hypotopo/providers.hpp"

namespace hypotopo {

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

bool constant(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

void split(const std::vector<LabeledSample>& samples, std::vector<double>& x, std::vector<bool>& y) {
  for (const auto& s : samples) {
    x.push_back(s.persistence);
    y.push_back(s.correct);
  }
}

void require_both_classes(const std::vector<bool>& y) {
  const auto pos = std::count(y.begin(), y.end(), true);
  if (pos == 0) throw DegenerateInputError("no positive (correct) samples");
  if (pos == static_cast<std::ptrdiff_t>(y.size())) throw DegenerateInputError("no negative (incorrect) samples");
}

// Numerically stable sigmoid and p(1-p).
double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double sigmoid_weight(double t) {
  const double e = std::exp(-std::abs(t));
  return e / ((1.0 + e) * (1.0 + e));
}

}  // namespace

std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && values[idx[j]] == values[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + 1 + j);  // mean of positions i+1..j
    for (std::size_t k = i; k < j; ++k) ranks[idx[k]] = r;
    i = j;
  }
  return ranks;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error("spearman: length mismatch");
  if (x.size() < 2) throw DegenerateInputError("spearman needs at least two samples");
  if (constant(x) || constant(y)) throw DegenerateInputError("spearman is undefined for constant input");
  return pearson(average_ranks(x), average_ranks(y));
}

double spearman(const std::vector<LabeledSample>& samples) {
  std::vector<double> x, y;
  for (const auto& s : samples) {
    x.push_back(s.persistence);
    y.push_back(s.correct ? 1.0 : 0.0);
  }
  return spearman(x, y);
}

double logistic_log_likelihood(const std::vector<double>& z, const std::vector<bool>& y, double b0, double b1) {
  double ll = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double t = b0 + b1 * z[i];
    // log sigmoid(t) = -log1p(exp(-t)), stable on both sides
    const double log_p = t >= 0 ? -std::log1p(std::exp(-t)) : t - std::log1p(std::exp(t));
    const double log_q = log_p - t;
    ll += y[i] ? log_p : log_q;
  }
  return ll;
}

LogisticFit logistic_fit_1d(const std::vector<double>& x, const std::vector<bool>& y) {
  if (x.size() != y.size()) throw Error("logistic_fit_1d: length mismatch");
  if (x.empty()) throw DegenerateInputError("logistic fit on an empty sample");
  require_both_classes(y);
  LogisticFit fit;
  fit.x_mean = mean_of(x);
  double var = 0.0;
  for (double v : x) var += (v - fit.x_mean) * (v - fit.x_mean);
  fit.x_sd = std::sqrt(var / static_cast<double>(x.size()));
  if (!(fit.x_sd > 0.0)) throw DegenerateInputError("logistic fit on constant persistence");
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - fit.x_mean) / fit.x_sd;

  double b0 = 0.0, b1 = 0.0;
  for (std::size_t it = 0; it < 100; ++it) {
    double g0 = 0, g1 = 0, h00 = 0, h01 = 0, h11 = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double t = b0 + b1 * z[i];
      const double r = (y[i] ? 1.0 : 0.0) - sigmoid(t);
      const double w = sigmoid_weight(t);
      g0 += r;
      g1 += r * z[i];
      h00 += w;
      h01 += w * z[i];
      h11 += w * z[i] * z[i];
    }
    const double det = h00 * h11 - h01 * h01;
    if (!(det > 0.0) || !std::isfinite(det)) break;
    const double d0 = (h11 * g0 - h01 * g1) / det;
    const double d1 = (h00 * g1 - h01 * g0) / det;
    if (!std::isfinite(d0) || !std::isfinite(d1)) break;
    b0 += d0;
    b1 += d1;
    fit.iterations = it + 1;
    if (std::max(std::abs(d0), std::abs(d1)) < 1e-8) {
      fit.converged = true;
      break;
    }
  }
  fit.intercept = b0;
  fit.slope = b1;
  fit.odds_ratio = std::exp(b1);
  return fit;
}

LogisticFit logistic_fit_1d(const std::vector<LabeledSample>& samples) {
  std::vector<double> x;
  std::vector<bool> y;
  split(samples, x, y);
  return logistic_fit_1d(x, y);
}

double roc_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
  if (scores.size() != positive.size()) throw Error("roc_auc: length mismatch");
  require_both_classes(positive);
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::uint64_t wins = 0, ties = 0, neg_below = 0, pos_total = 0, neg_total = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    std::uint64_t pos = 0, neg = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      positive[idx[j]] ? ++pos : ++neg;
      ++j;
    }
    wins += pos * neg_below;
    ties += pos * neg;
    neg_below += neg;
    pos_total += pos;
    neg_total += neg;
    i = j;
  }
  return static_cast<double>(2 * wins + ties) / static_cast<double>(2 * pos_total * neg_total);
}

double roc_auc(const std::vector<LabeledSample>& samples) {
  std::vector<double> x;
  std::vector<bool> y;
  split(samples, x, y);
  return roc_auc(x, y);
}

std::vector<std::pair<double, double>> roc_points(const std::vector<double>& scores,
                                                  const std::vector<bool>& positive) {
  require_both_classes(positive);
  const double P = static_cast<double>(std::count(positive.begin(), positive.end(), true));
  const double N = static_cast<double>(positive.size()) - P;
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
  double tp = 0, fp = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      positive[idx[j]] ? ++tp : ++fp;
      ++j;
    }
    pts.emplace_back(fp / N, tp / P);
    i = j;
  }
  return pts;
}

double trapezoid_area(const std::vector<std::pair<double, double>>& points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].first - points[i - 1].first) * (points[i].second + points[i - 1].second) / 2.0;
  }
  return area;
}

std::vector<Bin> bin_curve(const std::vector<LabeledSample>& samples, std::size_t n_bins) {
  if (n_bins < 2) throw ConfigError("bin_curve needs at least two bins");
  std::vector<Bin> bins(n_bins);
  if (samples.empty()) return bins;
  double lo = samples.front().persistence, hi = lo;
  for (const auto& s : samples) {
    lo = std::min(lo, s.persistence);
    hi = std::max(hi, s.persistence);
  }
  const double width = (hi - lo) / static_cast<double>(n_bins);
  std::vector<double> hits(n_bins, 0.0);
  for (std::size_t b = 0; b < n_bins; ++b) {
    bins[b].lo = lo + width * static_cast<double>(b);
    bins[b].hi = b + 1 == n_bins ? hi : lo + width * static_cast<double>(b + 1);
    bins[b].center = 0.5 * (bins[b].lo + bins[b].hi);
  }
  for (const auto& s : samples) {
    std::size_t b = 0;
    if (width > 0.0) {
      b = static_cast<std::size_t>(std::floor((s.persistence - lo) / width));
      b = std::min(b, n_bins - 1);
    }
    ++bins[b].count;
    if (s.correct) hits[b] += 1.0;
  }
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (bins[b].count) bins[b].mean_accuracy = hits[b] / static_cast<double>(bins[b].count);
  }
  return bins;
}

Quartiles quartiles(std::vector<double> values) {
  Quartiles q;
  q.count = values.size();
  if (values.empty()) return q;
  std::sort(values.begin(), values.end());
  auto at = [&](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  q.min = values.front();
  q.q1 = at(0.25);
  q.median = at(0.5);
  q.q3 = at(0.75);
  q.max = values.back();
  return q;
}

StatsReport compute_stats(const std::vector<LabeledSample>& samples, std::size_t n_bins, std::string backbone) {
  StatsReport r;
  r.backbone = std::move(backbone);
  r.n = samples.size();
  std::vector<double> x, good, bad;
  std::vector<bool> y;
  split(samples, x, y);
  for (const auto& s : samples) (s.correct ? good : bad).push_back(s.persistence);
  r.positives = good.size();

  auto attempt = [&](const char* what, auto&& fn) {
    try {
      fn();
    } catch (const DegenerateInputError& e) {
      r.warnings.push_back(std::string(what) + ": " + e.what());
    }
  };
  attempt("spearman", [&] { r.spearman_rho = spearman(samples); });
  attempt("logistic", [&] { r.logistic = logistic_fit_1d(x, y); });
  attempt("auc", [&] {
    r.auc = roc_auc(x, y);
    r.roc = roc_points(x, y);
  });

  std::map<std::string, std::vector<LabeledSample>> by_tag;
  for (const auto& s : samples) by_tag[s.dataset_tag].push_back(s);
  for (const auto& [tag, subset] : by_tag) {
    attempt(("auc[" + tag + "]").c_str(), [&] { r.auc_by_dataset[tag] = roc_auc(subset); });
  }
  if (n_bins >= 2) r.bins = bin_curve(samples, n_bins);
  r.correct_quartiles = quartiles(good);
  r.incorrect_quartiles = quartiles(bad);
  return r;
}

std::vector<LabeledSample> samples_from_summary(std::string_view csv_text) {
  std::istringstream in{std::string(csv_text)};
  std::string line;
  if (!std::getline(in, line)) return {};
  auto header = split_csv_line(line);
  auto col = [&](std::string_view name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(1, "summary CSV lacks column " + std::string(name));
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_id = col("instance_id"), c_winner = col("winner"), c_correct = col("correct"),
                    c_pers = col("top_h1_lifespan");
  std::vector<LabeledSample> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != header.size()) throw ParseError(lineno, "field count differs from header");
    if (f[c_correct].empty() || f[c_winner] == "error") continue;
    LabeledSample s;
    s.correct = f[c_correct] == "1";
    try {
      s.persistence = std::stod(f[c_pers]);
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad top_h1_lifespan '" + f[c_pers] + "'");
    }
    const auto slash = f[c_id].find('/');
    s.dataset_tag = slash == std::string::npos ? "default" : f[c_id].substr(0, slash);
    out.push_back(std::move(s));
  }
  return out;
}

std::string stats_json(const StatsReport& r) {
  using nlohmann::ordered_json;
  auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  ordered_json j;
  j["backbone"] = r.backbone;
  j["n"] = r.n;
  j["positives"] = r.positives;
  j["spearman_rho"] = opt(r.spearman_rho);
  if (r.logistic) {
    j["logistic"] = {{"intercept", r.logistic->intercept},
                     {"coefficient", r.logistic->slope},
                     {"odds_ratio", r.logistic->odds_ratio},
                     {"converged", r.logistic->converged},
                     {"iterations", r.logistic->iterations}};
  } else {
    j["logistic"] = nullptr;
  }
  j["auc"] = opt(r.auc);
  ordered_json by = ordered_json::object();
  for (const auto& [tag, auc] : r.auc_by_dataset) by[tag] = auc;
  j["auc_by_dataset"] = by;
  ordered_json bins = ordered_json::array();
  for (const auto& b : r.bins) {
    bins.push_back({{"center", b.center}, {"mean_accuracy", b.mean_accuracy}, {"count", b.count}});
  }
  j["bins"] = bins;
  j["warnings"] = r.warnings;
  return j.dump(2);
}

std::string roc_csv(const StatsReport& r) {
  std::string out = "fpr,tpr\n";
  for (auto [fpr, tpr] : r.roc) out += format_number(fpr) + "," + format_number(tpr) + "\n";
  return out;
}

std::string bins_csv(const StatsReport& r) {
  std::string out = "lo,hi,center,mean_accuracy,count\n";
  for (const auto& b : r.bins) {
    out += format_number(b.lo) + "," + format_number(b.hi) + "," + format_number(b.center) + "," +
           format_number(b.mean_accuracy) + "," + std::to_string(b.count) + "\n";
  }
  return out;
}

std::string boxplot_csv(const StatsReport& r) {
  std::string out = "outcome,count,min,q1,median,q3,max\n";
  auto row = [&](const char* name, const Quartiles& q) {
    out += std::string(name) + "," + std::to_string(q.count) + "," + format_number(q.min) + "," +
           format_number(q.q1) + "," + format_number(q.median) + "," + format_number(q.q3) + "," +
           format_number(q.max) + "\n";
  };
  row("correct", r.correct_quartiles);
  row("incorrect", r.incorrect_quartiles);
  return out;
}

PerturbationSummary perturb_and_compare(const HypothesisGraph& graph, const std::vector<std::vector<double>>& semantic,
                                        const MetricParams& params, const RelationTable& relations,
                                        const SelectionPolicy& selection, double sigma, std::uint64_t seed,
                                        std::size_t trials) {
  auto diagram_of = [&](std::vector<std::vector<double>> vecs) {
    auto features = compute_features(graph, std::move(vecs));
    auto metric = build_knn_graph(features, params, relations);
    return compute_persistence(build_filtration(metric));
  };
  const PersistenceDiagram base = diagram_of(semantic);

  PerturbationSummary s;
  s.sigma = sigma;
  for (const auto& p : select_features(base, selection).h1) {
    s.min_selected_h1_lifespan = std::min(s.min_selected_h1_lifespan, p.capped_lifespan(base.tau_value));
  }

  auto run_trial = [&](std::size_t t) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t)};
    std::mt19937_64 rng(seq);
    auto vecs = semantic;
    if (sigma > 0.0) {
      for (auto& v : vecs) {
        std::normal_distribution<double> noise(0.0, sigma / std::sqrt(static_cast<double>(v.size())));
        for (auto& x : v) x += noise(rng);
        l2_normalize(v);
      }
    }
    PersistenceDiagram d = diagram_of(std::move(vecs));
    return std::pair{bottleneck_distance(base, d, 0), bottleneck_distance(base, d, 1)};
  };

  std::vector<std::future<std::pair<double, double>>> futures;
  for (std::size_t t = 0; t < trials; ++t) futures.push_back(std::async(std::launch::async, run_trial, t));
  for (auto& f : futures) {
    auto [h0, h1] = f.get();
    s.h0_distances.push_back(h0);
    s.h1_distances.push_back(h1);
    s.max_h1 = std::max(s.max_h1, h1);
  }
  s.below_lifespan = s.max_h1 < s.min_selected_h1_lifespan;
  return s;
}

std::string perturbation_json(const std::vector<PerturbationSummary>& runs) {
  using nlohmann::ordered_json;
  ordered_json arr = ordered_json::array();
  for (const auto& s : runs) {
    ordered_json j;
    j["sigma"] = s.sigma;
    j["h0_bottleneck"] = s.h0_distances;
    j["h1_bottleneck"] = s.h1_distances;
    j["max_h1"] = s.max_h1;
    j["min_selected_h1_lifespan"] =
        std::isinf(s.min_selected_h1_lifespan) ? ordered_json("inf") : ordered_json(s.min_selected_h1_lifespan);
    j["below_lifespan"] = s.below_lifespan;
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

}  // namespace hypotopo
