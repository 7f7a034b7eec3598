#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idnet/corpus.hpp"
#include "idnet/matrix.hpp"
#include "idnet/normalization.hpp"

namespace idnet {

struct SliceDistanceMatrix {
  YearRange years;
  SquareMatrix<double> d;
};

/// Flattened upper-triangle (i < j) weight vector of every slice.
std::vector<std::vector<double>> slice_vectors(const WeightTensor& tensor);

/// Euclidean distance between slices, summed over ordered pairs i != j.
/// This is sqrt(2) times the distance between the upper-triangle vectors.
SliceDistanceMatrix slice_distance_matrix(const WeightTensor& tensor, unsigned threads = 1);

/// One agglomeration step. Leaves are ids 0..n-1; step s creates cluster id n + s.
/// cluster_a is the child whose earliest leaf comes first.
struct Merge {
  std::size_t cluster_a = 0;
  std::size_t cluster_b = 0;
  double height = 0.0;
  std::size_t size = 0;

  bool operator==(const Merge&) const = default;
};

struct Dendrogram {
  std::size_t leaves = 0;
  std::vector<Merge> merges;
};

/// Relative tolerance under which two linkage distances count as tied.
inline constexpr double kLinkageTieTolerance = 1e-12;

/// Average-linkage (UPGMA) agglomeration. The globally closest pair merges first;
/// near-ties go to the pair with the lexicographically smallest
/// (earliest leaf, earliest leaf) representatives.
Dendrogram upgma_cluster(const SquareMatrix<double>& distances);
inline Dendrogram upgma_cluster(const SliceDistanceMatrix& distances) {
  return upgma_cluster(distances.d);
}

/// Sorted leaf indices.
using Cluster = std::vector<std::size_t>;

/// The k clusters left after undoing the last k-1 merges, ordered by earliest leaf.
std::vector<Cluster> cut_dendrogram(const Dendrogram& dendrogram, std::size_t k);

double within_cluster_sum_of_squares(std::span<const std::vector<double>> points,
                                     std::span<const Cluster> clusters);

struct WssPoint {
  std::size_t k = 0;
  double wss = 0.0;
};

/// WSS(k) for k = 1..k_max on the dendrogram cuts.
std::vector<WssPoint> wss_curve(std::span<const std::vector<double>> points,
                                const Dendrogram& dendrogram, std::size_t k_max);

/// Returns the override when given, otherwise the interior k maximising
/// WSS(k-1) - 2 WSS(k) + WSS(k+1) (smallest k on ties).
std::size_t select_k_elbow(std::span<const WssPoint> curve,
                           std::optional<std::size_t> override_k = std::nullopt);

struct Regime {
  std::string label;
  Year start = 0;
  Year end = 0;

  std::size_t length() const noexcept { return static_cast<std::size_t>(end - start + 1); }
  bool operator==(const Regime&) const = default;
};

struct ContiguityRepair {
  std::vector<Year> years;
  std::size_t from_cluster = 0;
  std::size_t to_cluster = 0;
};

struct RegimePartition {
  std::vector<Regime> regimes;
  std::vector<std::vector<Year>> raw_clusters;
  std::vector<ContiguityRepair> repairs;
};

/// Turns a clustering of years into ordered contiguous regimes.
///
/// Works on the timeline of maximal same-cluster runs. While some cluster owns more
/// than one run, the shortest run that either belongs to such a cluster or sits
/// between two of its runs is reassigned to a neighbouring run's cluster (the
/// earlier neighbour when the two neighbours differ). Every step removes at least
/// one run, so the loop terminates. Regimes are labelled prefix1, prefix2, ...
RegimePartition repair_contiguity(std::span<const std::vector<Year>> clusters,
                                  const YearRange& years, std::string_view label_prefix);

struct RegimeNetwork {
  std::string label;
  Year start = 0;
  Year end = 0;
  SquareMatrix<double> weights;
  std::size_t year_count = 0;
};

/// Per-link mean weight over the regime's years.
RegimeNetwork average_regime_network(const WeightTensor& tensor, const Regime& regime);

struct RegimeDetectionOptions {
  /// Largest k on the WSS curve; clipped to the number of slices.
  std::size_t k_max = 10;
  std::optional<std::size_t> override_k;
  unsigned threads = 1;
};

struct RegimeDetection {
  SliceDistanceMatrix distances;
  Dendrogram dendrogram;
  std::vector<WssPoint> wss;
  std::size_t chosen_k = 0;
  RegimePartition partition;
};

/// distances -> UPGMA -> WSS curve -> elbow -> cut -> contiguity repair.
RegimeDetection detect_regimes(const WeightTensor& tensor, const RegimeDetectionOptions& options);

/// Newick text with leaves named by year; a node sits at half its merge height.
std::string to_newick(const Dendrogram& dendrogram, const YearRange& years);

/// JSON with raw clusters, repairs, final intervals, WSS curve and chosen k.
std::string format_regime_report(const RegimeDetection& detection, CorpusLabel label);

}  // namespace idnet
