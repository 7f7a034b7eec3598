#include "idnet/generator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "idnet/error.hpp"

namespace idnet {

RegimeCorrelation GeneratorSpec::correlation(std::size_t regime) const {
  if (regime_correlations.empty()) return {rho_in, rho_out};
  return regime_correlations.at(regime);
}

void validate_spec(const GeneratorSpec& spec) {
  const auto n = spec.vocabulary.size();
  if (n < 2) throw InputError("generator needs at least two terms");
  Year previous = spec.years.start() - 1;
  for (Year cut : spec.cuts) {
    if (cut < spec.years.start() || cut >= spec.years.end()) {
      throw InputError("cut year " + std::to_string(cut) + " not strictly inside the year range");
    }
    if (cut <= previous) throw InputError("cut years must be strictly increasing");
    previous = cut;
  }
  if (spec.communities.size() != spec.regime_count()) {
    throw InputError("need one community assignment per regime (" +
                     std::to_string(spec.regime_count()) + ")");
  }
  for (const auto& c : spec.communities) {
    if (c.size() != n) throw InputError("community assignment must cover every term");
  }
  if (spec.intensity.size() != spec.years.slices()) {
    throw InputError("intensity needs one row per year");
  }
  for (const auto& row : spec.intensity) {
    if (row.size() != n) throw InputError("intensity row must cover every term");
    for (double l : row) {
      if (!(l > 0.0) || !std::isfinite(l)) throw InputError("occurrence intensities must be > 0");
    }
  }
  if (!spec.regime_correlations.empty() &&
      spec.regime_correlations.size() != spec.regime_count()) {
    throw InputError("need one correlation target per regime");
  }
  for (std::size_t r = 0; r < spec.regime_count(); ++r) {
    const auto [in, out] = spec.correlation(r);
    if (!(out >= 0.0 && out <= in && in < 1.0)) {
      throw InputError("correlation targets must satisfy 0 <= rho_out <= rho_in < 1");
    }
  }
}

PlantedTruth planted_truth(const GeneratorSpec& spec) {
  validate_spec(spec);
  PlantedTruth truth;
  Year start = spec.years.start();
  const auto prefix = std::string(to_string(spec.label));
  for (std::size_t r = 0; r < spec.regime_count(); ++r) {
    const Year end = r < spec.cuts.size() ? spec.cuts[r] : spec.years.end();
    truth.partition.regimes.push_back({prefix + std::to_string(r + 1), start, end});
    std::vector<Year> ys;
    for (Year y = start; y <= end; ++y) ys.push_back(y);
    truth.partition.raw_clusters.push_back(std::move(ys));
    truth.communities.emplace_back(spec.communities[r]);
    start = end + 1;
  }
  return truth;
}

GeneratedCorpus generate_tensor(const GeneratorSpec& spec) {
  GeneratedCorpus out{CountTensor(spec.label, spec.vocabulary, spec.years), planted_truth(spec)};
  const auto n = spec.vocabulary.size();
  std::mt19937_64 rng(spec.seed);
  const auto draw = [&rng](double mean) -> Count {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<Count> poisson(mean);
    return poisson(rng);
  };

  std::size_t regime = 0;
  for (std::size_t t = 0; t < spec.years.slices(); ++t) {
    const Year year = spec.years.year_at(t);
    while (regime < spec.cuts.size() && year > spec.cuts[regime]) ++regime;
    const auto [rho_in, rho_out] = spec.correlation(regime);
    const auto& community = spec.communities[regime];
    const auto& lambda = spec.intensity[t];
    auto& slice = out.tensor.slice(t);
    for (std::size_t i = 0; i < n; ++i) slice(i, i) = draw(lambda[i]);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double rho = community[i] == community[j] ? rho_in : rho_out;
        const Count c = draw(rho * std::sqrt(lambda[i] * lambda[j]));
        out.tensor.set_pair(t, i, j, std::min({c, slice(i, i), slice(j, j)}));
      }
    }
  }
  return out;
}

Vocabulary numbered_vocabulary(std::size_t n, const char* prefix) {
  const auto width = std::to_string(n).size();
  std::vector<std::string> terms;
  terms.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) {
    auto digits = std::to_string(i);
    terms.push_back(prefix + std::string(width - digits.size(), '0') + digits);
  }
  return Vocabulary(std::move(terms));
}

std::vector<std::vector<double>> constant_intensity(std::size_t terms, std::size_t slices,
                                                    double lambda) {
  return std::vector<std::vector<double>>(slices, std::vector<double>(terms, lambda));
}

std::vector<std::vector<std::size_t>> round_robin_communities(std::size_t terms,
                                                              std::size_t communities,
                                                              std::size_t regimes) {
  std::vector<std::size_t> assignment(terms);
  for (std::size_t i = 0; i < terms; ++i) assignment[i] = i % std::max<std::size_t>(1, communities);
  return std::vector<std::vector<std::size_t>>(regimes, assignment);
}

}  // namespace idnet
