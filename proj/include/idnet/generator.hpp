#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "idnet/corpus.hpp"
#include "idnet/metrics.hpp"
#include "idnet/regimes.hpp"

namespace idnet {

struct RegimeCorrelation {
  double rho_in = 0.0;
  double rho_out = 0.0;
};

/// Parameters of a synthetic corpus with planted regimes and communities.
struct GeneratorSpec {
  CorpusLabel label = CorpusLabel::funded;
  Vocabulary vocabulary;
  YearRange years;
  /// Each cut year closes a regime; the next regime starts the following year.
  std::vector<Year> cuts;
  /// Community id of each term, one vector per regime.
  std::vector<std::vector<std::size_t>> communities;
  /// Occurrence intensity lambda_i(t), indexed [t][i].
  std::vector<std::vector<double>> intensity;
  double rho_in = 0.5;
  double rho_out = 0.1;
  /// Optional per-regime correlation targets; when non-empty it overrides rho_in/rho_out.
  std::vector<RegimeCorrelation> regime_correlations;
  std::uint64_t seed = 0;

  std::size_t regime_count() const noexcept { return cuts.size() + 1; }
  RegimeCorrelation correlation(std::size_t regime) const;
};

/// Throws InputError unless cuts lie strictly inside the range and increase,
/// there is one community vector of length N per regime, every intensity is
/// positive and 0 <= rho_out <= rho_in < 1.
void validate_spec(const GeneratorSpec& spec);

struct PlantedTruth {
  RegimePartition partition;
  std::vector<CommunityAssignment> communities;
};

PlantedTruth planted_truth(const GeneratorSpec& spec);

struct GeneratedCorpus {
  CountTensor tensor;
  PlantedTruth truth;
};

/// c_ii ~ Poisson(lambda_i), c_ij ~ Poisson(rho_ij sqrt(lambda_i lambda_j)) clamped
/// to min(c_ii, c_jj). Slices are drawn in chronological order from a single
/// mt19937_64 stream seeded with spec.seed; output is deterministic per seed.
GeneratedCorpus generate_tensor(const GeneratorSpec& spec);

/// "t01", "t02", ... zero-padded to the width of n.
Vocabulary numbered_vocabulary(std::size_t n, const char* prefix = "t");

/// Constant lambda for every term and year.
std::vector<std::vector<double>> constant_intensity(std::size_t terms, std::size_t slices,
                                                    double lambda);

/// Term i goes to community i % k in every regime.
std::vector<std::vector<std::size_t>> round_robin_communities(std::size_t terms,
                                                              std::size_t communities,
                                                              std::size_t regimes);

}  // namespace idnet
