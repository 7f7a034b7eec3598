#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "idnet/corpus.hpp"
#include "idnet/normalization.hpp"
#include "idnet/regimes.hpp"

namespace idnet {

enum class MetricKind { publications, strength, betweenness };

std::string_view to_string(MetricKind kind) noexcept;

/// Node-major time series: series[node][t].
using NodeSeries = std::vector<std::vector<double>>;

/// Width of the endpoint windows averaged at each end of a regime.
inline constexpr std::size_t kEndpointWindow = 3;

/// r_i = (end_i - start_i) / |mean(end) - mean(start)| where start_i and end_i are
/// node i's means over the first and last min(3, length) years.
/// Throws NumericalError when the system-level change is zero.
std::vector<double> relative_change_within(const NodeSeries& series);

/// Sample standard deviation (n-1) of consecutive differences. Needs >= 3 values.
double volatility(std::span<const double> series);

/// Yearly strength or betweenness of every node.
NodeSeries metric_series(const WeightTensor& tensor, MetricKind kind, unsigned threads = 1);
/// Yearly diagonal counts of every node.
NodeSeries publication_series(const CountTensor& tensor);

/// Restricts a full-range series to the years of one regime.
NodeSeries regime_slice(const NodeSeries& series, const YearRange& years, const Regime& regime);

struct ContributionRecord {
  std::string term;
  MetricKind metric = MetricKind::strength;
  std::string regime;
  double r_within = 0.0;
  double volatility = 0.0;
};

/// r_within and volatility for every term within one regime.
std::vector<ContributionRecord> contribution_table(const NodeSeries& series,
                                                   const YearRange& years,
                                                   const Vocabulary& vocabulary,
                                                   const Regime& regime, MetricKind kind);

/// Standard competition ranking, descending ("1224").
std::vector<std::size_t> competition_ranks(std::span<const double> values);

struct RankSeries {
  std::string term;
  MetricKind metric = MetricKind::strength;
  std::vector<std::pair<Year, std::size_t>> ranks;
};

std::vector<RankSeries> rank_series(const NodeSeries& series, const YearRange& years,
                                    const Vocabulary& vocabulary, MetricKind kind);
std::vector<RankSeries> metric_rank_series(const WeightTensor& tensor, MetricKind kind,
                                           unsigned threads = 1);
std::vector<RankSeries> metric_rank_series(const CountTensor& tensor);

/// `term,metric,r_within,volatility,regime`.
std::string format_contributions(std::span<const ContributionRecord> records);
/// `term,metric,year,rank`; within a year rows follow rank, then vocabulary index.
std::string format_rank_series(std::span<const RankSeries> series);

}  // namespace idnet
