#include "idnet/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "idnet/csv.hpp"
#include "idnet/error.hpp"
#include "idnet/metrics.hpp"

namespace idnet {

std::string_view to_string(MetricKind kind) noexcept {
  switch (kind) {
    case MetricKind::publications:
      return "publications";
    case MetricKind::strength:
      return "strength";
    case MetricKind::betweenness:
      return "betweenness";
  }
  return "unknown";
}

namespace {

double mean_of(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace

std::vector<double> relative_change_within(const NodeSeries& series) {
  if (series.empty()) throw InputError("no node series given");
  const auto length = series.front().size();
  if (length == 0) throw InputError("regime must contain at least one year");
  for (const auto& s : series) {
    if (s.size() != length) throw InputError("node series have different lengths");
  }
  const auto window = std::min(kEndpointWindow, length);
  std::vector<double> start(series.size());
  std::vector<double> end(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    std::span<const double> s(series[i]);
    start[i] = mean_of(s.first(window));
    end[i] = mean_of(s.last(window));
  }
  const double denominator = std::abs(mean_of(end) - mean_of(start));
  if (denominator == 0.0) throw NumericalError("no net system change");
  std::vector<double> r(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) r[i] = (end[i] - start[i]) / denominator;
  return r;
}

double volatility(std::span<const double> series) {
  if (series.size() < 3) throw InputError("volatility needs a regime of at least 3 years");
  std::vector<double> diffs(series.size() - 1);
  for (std::size_t t = 1; t < series.size(); ++t) diffs[t - 1] = series[t] - series[t - 1];
  const double mean = mean_of(diffs);
  double ss = 0.0;
  for (double d : diffs) ss += (d - mean) * (d - mean);
  return std::sqrt(ss / static_cast<double>(diffs.size() - 1));
}

NodeSeries metric_series(const WeightTensor& tensor, MetricKind kind, unsigned threads) {
  if (kind == MetricKind::publications) {
    throw InputError("publication series come from count tensors");
  }
  const auto n = tensor.terms();
  NodeSeries out(n, std::vector<double>(tensor.slices.size(), 0.0));
  for (std::size_t t = 0; t < tensor.slices.size(); ++t) {
    const WeightedNetwork net(tensor.slices[t].weights);
    const auto values = kind == MetricKind::strength ? node_strengths(net).node
                                                     : betweenness(net, threads);
    for (std::size_t i = 0; i < n; ++i) out[i][t] = values[i];
  }
  return out;
}

NodeSeries publication_series(const CountTensor& tensor) {
  const auto n = tensor.terms();
  NodeSeries out(n, std::vector<double>(tensor.years().slices(), 0.0));
  for (std::size_t t = 0; t < tensor.years().slices(); ++t) {
    for (std::size_t i = 0; i < n; ++i) out[i][t] = static_cast<double>(tensor.at(t, i, i));
  }
  return out;
}

NodeSeries regime_slice(const NodeSeries& series, const YearRange& years, const Regime& regime) {
  const auto first = years.index_of(regime.start);
  const auto last = years.index_of(regime.end);
  if (last < first) throw InputError("regime " + regime.label + " ends before it starts");
  NodeSeries out;
  out.reserve(series.size());
  for (const auto& s : series) {
    out.emplace_back(s.begin() + static_cast<std::ptrdiff_t>(first),
                     s.begin() + static_cast<std::ptrdiff_t>(last + 1));
  }
  return out;
}

std::vector<ContributionRecord> contribution_table(const NodeSeries& series,
                                                   const YearRange& years,
                                                   const Vocabulary& vocabulary,
                                                   const Regime& regime, MetricKind kind) {
  const auto window = regime_slice(series, years, regime);
  const auto r = relative_change_within(window);
  std::vector<ContributionRecord> out;
  out.reserve(window.size());
  for (std::size_t i = 0; i < window.size(); ++i) {
    out.push_back({vocabulary.term(i), kind, regime.label, r[i], volatility(window[i])});
  }
  return out;
}

std::vector<std::size_t> competition_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  std::vector<std::size_t> rank(values.size(), 0);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    if (pos > 0 && values[order[pos]] == values[order[pos - 1]]) {
      rank[order[pos]] = rank[order[pos - 1]];
    } else {
      rank[order[pos]] = pos + 1;
    }
  }
  return rank;
}

std::vector<RankSeries> rank_series(const NodeSeries& series, const YearRange& years,
                                    const Vocabulary& vocabulary, MetricKind kind) {
  std::vector<RankSeries> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    out[i].term = vocabulary.term(i);
    out[i].metric = kind;
  }
  std::vector<double> column(series.size());
  for (std::size_t t = 0; t < years.slices(); ++t) {
    for (std::size_t i = 0; i < series.size(); ++i) column[i] = series[i].at(t);
    const auto ranks = competition_ranks(column);
    for (std::size_t i = 0; i < series.size(); ++i) {
      out[i].ranks.emplace_back(years.year_at(t), ranks[i]);
    }
  }
  return out;
}

std::vector<RankSeries> metric_rank_series(const WeightTensor& tensor, MetricKind kind,
                                           unsigned threads) {
  return rank_series(metric_series(tensor, kind, threads), tensor.years, tensor.vocabulary, kind);
}

std::vector<RankSeries> metric_rank_series(const CountTensor& tensor) {
  return rank_series(publication_series(tensor), tensor.years(), tensor.vocabulary(),
                     MetricKind::publications);
}

std::string format_contributions(std::span<const ContributionRecord> records) {
  std::ostringstream out;
  out << "term,metric,r_within,volatility,regime\n";
  for (const auto& r : records) {
    out << csv::escape_field(r.term) << ',' << to_string(r.metric) << ','
        << csv::format_real(r.r_within) << ',' << csv::format_real(r.volatility) << ','
        << csv::escape_field(r.regime) << '\n';
  }
  return out.str();
}

std::string format_rank_series(std::span<const RankSeries> series) {
  std::ostringstream out;
  out << "term,metric,year,rank\n";
  if (series.empty()) return out.str();
  const auto years = series.front().ranks.size();
  std::vector<std::size_t> order(series.size());
  for (std::size_t t = 0; t < years; ++t) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return series[a].ranks[t].second < series[b].ranks[t].second;
    });
    for (auto i : order) {
      out << csv::escape_field(series[i].term) << ',' << to_string(series[i].metric) << ','
          << series[i].ranks[t].first << ',' << series[i].ranks[t].second << '\n';
    }
  }
  return out.str();
}

}  // namespace idnet
