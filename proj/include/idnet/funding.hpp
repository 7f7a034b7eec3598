#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idnet/corpus.hpp"
#include "idnet/normalization.hpp"
#include "idnet/regimes.hpp"

namespace idnet {

/// Regime statistics of one unordered pair (i < j) in both corpora.
struct PairRegimeStat {
  std::size_t i = 0;
  std::size_t j = 0;
  double mean_funded = 0.0;
  double se_funded = 0.0;
  double mean_unfunded = 0.0;
  double se_unfunded = 0.0;
};

/// Mean and standard error (sample sd / sqrt(years)) of w_ij over the regime.
/// Pairs with zero mean in both corpora are dropped. Needs a regime of >= 2 years.
std::vector<PairRegimeStat> pair_regime_stats(const WeightTensor& funded,
                                              const WeightTensor& unfunded,
                                              const Regime& regime);

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  /// 0 when only two points exist (no residual degrees of freedom).
  double slope_se = 0.0;
  double r_squared = 0.0;
  std::size_t n_pairs = 0;
};

/// OLS of mean_funded on mean_unfunded with intercept.
RegressionResult fit_funding_regression(std::span<const PairRegimeStat> stats);

enum class FundingStatus { overfunded, underfunded, on_line };

std::string_view to_string(FundingStatus status) noexcept;

struct PairClassification {
  double residual = 0.0;
  FundingStatus status = FundingStatus::on_line;
};

inline constexpr double kDefaultDeadBand = 1e-6;

/// residual = mean_F - (slope mean_U + intercept); |residual| <= dead_band is on-line.
std::vector<PairClassification> classify_funding_status(std::span<const PairRegimeStat> stats,
                                                        const RegressionResult& regression,
                                                        double dead_band = kDefaultDeadBand);

enum class IncrementGroup { top5, bottom50 };
std::string_view to_string(IncrementGroup group) noexcept;

/// Which links average |delta| in the relative-increment denominator.
enum class IncrementDenominator {
  nonzero_period1,  // the L links with non-zero period-1 mean
  all_pairs,        // every unordered pair
};

struct Period {
  Year start = 0;
  Year end = 0;
};

struct LinkIncrement {
  std::size_t i = 0;
  std::size_t j = 0;
  double mean_period1 = 0.0;
  double mean_period2 = 0.0;
  double relative_increment = 0.0;
};

struct IncrementReport {
  IncrementGroup group = IncrementGroup::top5;
  CorpusLabel corpus = CorpusLabel::funded;
  Period period1;
  Period period2;
  std::size_t nonzero_links = 0;
  double mean_abs_change = 0.0;
  std::vector<LinkIncrement> links;
  double group_mean = 0.0;
};

/// Relative change in link strength between two periods for the ceil(5%) strongest
/// or floor(50%) weakest links by period-1 mean, among links with non-zero
/// period-1 mean. Each change is divided by the average |change| over the
/// denominator set.
IncrementReport link_increment_analysis(
    const WeightTensor& tensor, const Period& period1, const Period& period2,
    IncrementGroup group,
    IncrementDenominator denominator = IncrementDenominator::nonzero_period1);

/// `term_i,term_j,mean_U,se_U,mean_F,se_F,residual,status`.
std::string format_scatter(std::span<const PairRegimeStat> stats,
                           std::span<const PairClassification> classes,
                           const Vocabulary& vocabulary);

std::string format_increment_report(const IncrementReport& report, const Vocabulary& vocabulary);

}  // namespace idnet
