#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hypotopo/ghg.hpp"
#include "hypotopo/homology.hpp"
#include "hypotopo/metric_space.hpp"
#include "hypotopo/relation.hpp"

namespace hypotopo {

struct LabeledSample {
  double persistence = 0.0;  // top H1 lifespan, 0 without H1
  bool correct = false;
  std::string dataset_tag;
};

/// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> average_ranks(const std::vector<double>& values);

/// Pearson correlation of the average ranks. Throws DegenerateInputError when
/// n < 2 or either side is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);
double spearman(const std::vector<LabeledSample>& samples);

struct LogisticFit {
  double intercept = 0.0;
  double slope = 0.0;  // per standard deviation of x
  double odds_ratio = 1.0;
  bool converged = false;
  std::size_t iterations = 0;
  double x_mean = 0.0;
  double x_sd = 0.0;
};

/// P(y=1) = sigmoid(b0 + b1 z), z the population z-score of x. Newton/IRLS
/// until the parameter step is below 1e-8 (max-norm), at most 100 iterations.
/// Throws DegenerateInputError for a single class or constant x.
LogisticFit logistic_fit_1d(const std::vector<double>& x, const std::vector<bool>& y);
LogisticFit logistic_fit_1d(const std::vector<LabeledSample>& samples);

/// Log-likelihood of (b0, b1) on z-scored x; shared with the tests.
double logistic_log_likelihood(const std::vector<double>& z, const std::vector<bool>& y, double b0, double b1);

/// Mann-Whitney AUC: (wins + ties/2) / (P N), computed from integer counts.
/// Throws DegenerateInputError unless both classes are present.
double roc_auc(const std::vector<double>& scores, const std::vector<bool>& positive);
double roc_auc(const std::vector<LabeledSample>& samples);

/// Empirical ROC points (fpr, tpr) from (0,0) to (1,1), one point per
/// distinct threshold, scanning scores from high to low.
std::vector<std::pair<double, double>> roc_points(const std::vector<double>& scores,
                                                  const std::vector<bool>& positive);

/// Trapezoidal area under a polyline of ROC points.
double trapezoid_area(const std::vector<std::pair<double, double>>& points);

struct Bin {
  double lo = 0.0;
  double hi = 0.0;
  double center = 0.0;
  double mean_accuracy = 0.0;  // 0 for an empty bin
  std::size_t count = 0;
};

/// Equal-width bins over [min, max] of persistence; the last bin is closed.
/// Every sample lands in the first bin when the range is degenerate.
std::vector<Bin> bin_curve(const std::vector<LabeledSample>& samples, std::size_t n_bins);

struct Quartiles {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

/// Linear-interpolation quartiles (the R type-7 rule). Empty input gives a
/// zero-count record.
Quartiles quartiles(std::vector<double> values);

struct StatsReport {
  std::string backbone;
  std::size_t n = 0;
  std::size_t positives = 0;
  std::optional<double> spearman_rho;
  std::optional<LogisticFit> logistic;
  std::optional<double> auc;
  std::map<std::string, double> auc_by_dataset;
  std::vector<Bin> bins;
  std::vector<std::pair<double, double>> roc;
  Quartiles correct_quartiles;
  Quartiles incorrect_quartiles;
  std::vector<std::string> warnings;  // parts that could not be computed
};

/// Every statistic that the data supports; undefined ones are left empty with
/// a warning rather than failing the whole report.
StatsReport compute_stats(const std::vector<LabeledSample>& samples, std::size_t n_bins = 10,
                          std::string backbone = "unspecified");

/// Samples from a batch summary CSV. Rows without a gold label or with an
/// error winner are skipped. The dataset tag is the instance_id prefix before
/// the first '/', or "default".
std::vector<LabeledSample> samples_from_summary(std::string_view csv_text);

std::string stats_json(const StatsReport& report);
std::string roc_csv(const StatsReport& report);
std::string bins_csv(const StatsReport& report);
std::string boxplot_csv(const StatsReport& report);

// --- stability ----------------------------------------------------------------

struct PerturbationSummary {
  double sigma = 0.0;
  std::vector<double> h0_distances;  // per trial
  std::vector<double> h1_distances;  // per trial
  double max_h1 = 0.0;
  double min_selected_h1_lifespan = kInfinity;  // inf without selected H1
  bool below_lifespan = true;                    // max_h1 < min_selected_h1_lifespan
};

/// Adds isotropic Gaussian noise of magnitude sigma (per-component std
/// sigma / sqrt(D)) to every semantic vector, re-normalizes, rebuilds the
/// metric graph and diagram, and measures H0/H1 bottleneck distances to the
/// unperturbed diagram. Trial t uses a generator seeded from (seed, t).
PerturbationSummary perturb_and_compare(const HypothesisGraph& graph, const std::vector<std::vector<double>>& semantic,
                                        const MetricParams& params, const RelationTable& relations,
                                        const SelectionPolicy& selection, double sigma, std::uint64_t seed,
                                        std::size_t trials);

std::string perturbation_json(const std::vector<PerturbationSummary>& runs);

}  // namespace hypotopo
