#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "idnet/corpus.hpp"
#include "idnet/matrix.hpp"

namespace idnet {

/// Undirected weighted network: symmetric, non-negative, zero diagonal.
/// Zero weights are non-links.
class WeightedNetwork {
 public:
  WeightedNetwork() = default;
  /// Throws InputError if the matrix is not square-symmetric, has a non-zero
  /// diagonal, or has negative or non-finite entries.
  explicit WeightedNetwork(SquareMatrix<double> weights);

  std::size_t nodes() const noexcept { return weights_.size(); }
  double weight(std::size_t i, std::size_t j) const { return weights_(i, j); }
  const SquareMatrix<double>& weights() const noexcept { return weights_; }

 private:
  SquareMatrix<double> weights_;
};

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

/// Relative tolerance under which two path lengths count as equal.
inline constexpr double kPathTieTolerance = 1e-12;

struct Strengths {
  std::vector<double> node;
  double mean = 0.0;
};

/// s_i = sum_j w_ij and their mean over all N nodes.
Strengths node_strengths(const WeightedNetwork& net);

/// All-pairs shortest path lengths with link length 1/w; unreachable pairs are +inf.
SquareMatrix<double> shortest_path_lengths(const WeightedNetwork& net, unsigned threads = 1);

struct AsplResult {
  double aspl = 0.0;
  std::size_t unreachable_pairs = 0;
};

/// Mean over unordered pairs with finite distance. Throws NumericalError when no
/// pair is connected.
AsplResult aspl(const WeightedNetwork& net, unsigned threads = 1);
AsplResult aspl_from_distances(const SquareMatrix<double>& distances);

/// Brandes betweenness under 1/w lengths, counted over unordered pairs and divided
/// by (N-1)(N-2)/2. Networks with fewer than three nodes give all zeros.
std::vector<double> betweenness(const WeightedNetwork& net, unsigned threads = 1);

class CommunityAssignment {
 public:
  CommunityAssignment() = default;
  /// Relabels ids to be contiguous from 0 in order of first appearance.
  explicit CommunityAssignment(std::vector<std::size_t> membership);

  static CommunityAssignment singletons(std::size_t n);
  static CommunityAssignment single(std::size_t n);

  std::size_t nodes() const noexcept { return membership_.size(); }
  std::size_t communities() const noexcept { return count_; }
  std::size_t of(std::size_t node) const { return membership_.at(node); }
  const std::vector<std::size_t>& membership() const noexcept { return membership_; }

  bool operator==(const CommunityAssignment&) const = default;

 private:
  std::vector<std::size_t> membership_;
  std::size_t count_ = 0;
};

/// Newman modularity with 2m = sum_ij w_ij. Throws NumericalError on an empty network.
double modularity(const WeightedNetwork& net, const CommunityAssignment& communities,
                  double resolution = 1.0);

struct LouvainOptions {
  std::uint64_t seed = 0;
  std::size_t restarts = 10;
  double resolution = 1.0;
  unsigned threads = 1;
};

struct LouvainResult {
  CommunityAssignment communities;
  double modularity = 0.0;
  std::size_t best_restart = 0;
};

/// Two-phase Louvain (local moving, then aggregation). Each restart shuffles the
/// visit order from its own stream derived from (seed, restart index); the best
/// modularity wins with ties going to the lowest restart index.
LouvainResult louvain_communities(const WeightedNetwork& net, const LouvainOptions& options);

/// Hubert-Arabie adjusted Rand index. Two trivial identical partitions give 1.
double adjusted_rand_index(const CommunityAssignment& a, const CommunityAssignment& b);

struct MetricTable {
  std::vector<double> strength;
  std::vector<double> betweenness;
  double mean_strength = 0.0;
  double aspl = 0.0;
  std::size_t unreachable_pairs = 0;
  double modularity = 0.0;
  CommunityAssignment communities;
};

/// Everything reported per network: strengths, betweenness, ASPL and the Louvain
/// partition with its modularity. ASPL is 0 (with all pairs unreachable) and Q is 0
/// for a network without links instead of throwing.
MetricTable compute_metric_table(const WeightedNetwork& net, const LouvainOptions& options);

/// `term,strength,betweenness` rows.
std::string format_metric_table(const MetricTable& table, const Vocabulary& vocabulary);
/// `{mean_strength, aspl, unreachable_pairs, modularity, n_communities}`.
std::string format_metric_summary(const MetricTable& table);

}  // namespace idnet
