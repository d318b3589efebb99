#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hypotopo/metric_space.hpp"

namespace hypotopo {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Vertex, edge or triangle. Unused trailing vertex slots are zero.
struct Simplex {
  int dim = 0;
  std::array<std::size_t, 3> vertices{};
  double value = 0.0;
};

/// Clique complex of a sparse metric graph up to dimension 2, in filtration
/// order: by value, then dimension, then vertex tuple. Faces precede cofaces.
struct Filtration {
  std::size_t vertex_count = 0;
  std::vector<Simplex> simplices;
};

Filtration build_filtration(const SparseMetricGraph& graph);

using VertexPair = std::pair<std::size_t, std::size_t>;

struct PersistencePair {
  int dimension = 0;
  double birth = 0.0;
  double death = kInfinity;
  /// H0: the vertex whose component ends. H1: edges of a cycle born with the
  /// pair, all with filtration value <= birth.
  std::size_t vertex = 0;
  std::vector<VertexPair> representative;

  bool infinite() const noexcept { return death == kInfinity; }
  double lifespan() const noexcept { return death - birth; }
  /// Lifespan with an infinite death replaced by `cap`.
  double capped_lifespan(double cap) const noexcept { return (infinite() ? cap : death) - birth; }
  /// Sorted distinct vertices of the representative (H1) or {vertex} (H0).
  std::vector<std::size_t> support_vertices() const;
};

struct PersistenceDiagram {
  std::vector<PersistencePair> pairs;
  std::size_t vertex_count = 0;
  double tau_value = 0.0;

  std::vector<PersistencePair> in_dimension(int dim) const;
};

/// Column reduction of the boundary matrix over GF(2) in filtration order.
/// Every vertex yields one H0 pair (zero-lifespan pairs kept); H1
/// representatives are read from the reduction's cycle columns.
PersistenceDiagram compute_persistence(const Filtration& filtration);

/// H0 (birth, death) pairs by Kruskal/union-find over the filtration edges.
/// Must agree with compute_persistence.
std::vector<std::pair<double, double>> h0_union_find(const Filtration& filtration);

enum class SelectionMode { top_k, top_q_percent };

struct SelectionPolicy {
  SelectionMode mode = SelectionMode::top_k;
  std::size_t K = 5;
  double q = 10.0;
};

struct SelectedFeatures {
  std::vector<PersistencePair> h0;
  std::vector<PersistencePair> h1;
};

/// Per dimension: zero-lifespan pairs dropped, the rest ordered by lifespan
/// (infinite first), then earlier birth, then representative, and the top K
/// (or ceil(q% of the eligible count)) kept.
SelectedFeatures select_features(const PersistenceDiagram& diagram, const SelectionPolicy& policy);

struct OperatingScales {
  double eps_h0 = 0.0;
  bool eps_h0_fallback = false;     // no finite H0 death; tau_value used
  std::vector<double> eps_per_loop; // aligned with the selected H1 pairs
  std::vector<std::string> warnings;
};

/// eps_h0 = lower median of the finite deaths in `h0`; each loop scale is
/// 0.99 * death. Infinite-death loops get `tau_value`, the largest scale the
/// truncated complex contains.
OperatingScales operating_scales(const SelectedFeatures& selected, double tau_value);

/// Bottleneck distance between the dimension-`dim` parts of two diagrams.
/// Finite points may be matched to the diagonal; infinite points are matched
/// among themselves by birth (different counts give +inf).
double bottleneck_distance(const PersistenceDiagram& a, const PersistenceDiagram& b, int dim);
double bottleneck_distance(const std::vector<std::pair<double, double>>& a,
                           const std::vector<std::pair<double, double>>& b);

/// "dimension,birth,death,lifespan" rows; infinite deaths written as inf.
std::string diagram_csv(const PersistenceDiagram& diagram);

}  // namespace hypotopo
