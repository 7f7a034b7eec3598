#include "idnet/funding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "idnet/csv.hpp"
#include "idnet/error.hpp"

namespace idnet {

std::string_view to_string(FundingStatus status) noexcept {
  switch (status) {
    case FundingStatus::overfunded:
      return "overfunded";
    case FundingStatus::underfunded:
      return "underfunded";
    case FundingStatus::on_line:
      return "on-line";
  }
  return "unknown";
}

std::string_view to_string(IncrementGroup group) noexcept {
  return group == IncrementGroup::top5 ? "top5" : "bottom50";
}

namespace {

void require_inside(const WeightTensor& tensor, Year start, Year end, const std::string& what) {
  if (start > end || !tensor.years.contains(start) || !tensor.years.contains(end)) {
    throw InputError(what + " " + std::to_string(start) + "-" + std::to_string(end) +
                     " outside the " + std::string(to_string(tensor.label)) + " tensor's years");
  }
}

struct MeanSe {
  double mean;
  double se;
};

MeanSe pair_mean_se(const WeightTensor& tensor, std::size_t i, std::size_t j, Year start, Year end) {
  const auto length = static_cast<double>(end - start + 1);
  double sum = 0.0;
  for (Year y = start; y <= end; ++y) sum += tensor.at_year(y)(i, j);
  const double mean = sum / length;
  double ss = 0.0;
  for (Year y = start; y <= end; ++y) {
    const double d = tensor.at_year(y)(i, j) - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / (length - 1.0));
  return {mean, sd / std::sqrt(length)};
}

double period_mean(const WeightTensor& tensor, std::size_t i, std::size_t j, const Period& p) {
  double sum = 0.0;
  for (Year y = p.start; y <= p.end; ++y) sum += tensor.at_year(y)(i, j);
  return sum / static_cast<double>(p.end - p.start + 1);
}

}  // namespace

std::vector<PairRegimeStat> pair_regime_stats(const WeightTensor& funded,
                                              const WeightTensor& unfunded,
                                              const Regime& regime) {
  if (funded.vocabulary != unfunded.vocabulary) {
    throw InputError("funded and unfunded tensors have different vocabularies");
  }
  require_inside(funded, regime.start, regime.end, "regime " + regime.label);
  require_inside(unfunded, regime.start, regime.end, "regime " + regime.label);
  if (regime.end - regime.start + 1 < 2) {
    throw InputError("regime " + regime.label + " shorter than 2 years: standard error undefined");
  }
  std::vector<PairRegimeStat> out;
  const auto n = funded.terms();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto f = pair_mean_se(funded, i, j, regime.start, regime.end);
      const auto u = pair_mean_se(unfunded, i, j, regime.start, regime.end);
      if (f.mean == 0.0 && u.mean == 0.0) continue;
      out.push_back({i, j, f.mean, f.se, u.mean, u.se});
    }
  }
  return out;
}

RegressionResult fit_funding_regression(std::span<const PairRegimeStat> stats) {
  const auto n = stats.size();
  if (n < 2) throw NumericalError("regression needs at least two pairs");
  double mx = 0.0;
  double my = 0.0;
  for (const auto& s : stats) {
    mx += s.mean_unfunded;
    my += s.mean_funded;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& s : stats) {
    const double dx = s.mean_unfunded - mx;
    const double dy = s.mean_funded - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw NumericalError("degenerate design: all unfunded means identical");

  RegressionResult out;
  out.n_pairs = n;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double ss_res = 0.0;
  for (const auto& s : stats) {
    const double r = s.mean_funded - (out.slope * s.mean_unfunded + out.intercept);
    ss_res += r * r;
  }
  out.slope_se = n > 2 ? std::sqrt(ss_res / static_cast<double>(n - 2) / sxx) : 0.0;
  out.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return out;
}

std::vector<PairClassification> classify_funding_status(std::span<const PairRegimeStat> stats,
                                                        const RegressionResult& regression,
                                                        double dead_band) {
  if (!(dead_band > 0.0)) throw InputError("dead band must be positive");
  std::vector<PairClassification> out;
  out.reserve(stats.size());
  for (const auto& s : stats) {
    const double residual =
        s.mean_funded - (regression.slope * s.mean_unfunded + regression.intercept);
    FundingStatus status = FundingStatus::on_line;
    if (residual > dead_band) {
      status = FundingStatus::overfunded;
    } else if (residual < -dead_band) {
      status = FundingStatus::underfunded;
    }
    out.push_back({residual, status});
  }
  return out;
}

IncrementReport link_increment_analysis(const WeightTensor& tensor, const Period& period1,
                                        const Period& period2, IncrementGroup group,
                                        IncrementDenominator denominator) {
  require_inside(tensor, period1.start, period1.end, "period");
  require_inside(tensor, period2.start, period2.end, "period");
  if (!(period1.end < period2.start || period2.end < period1.start)) {
    throw InputError("increment periods overlap");
  }

  IncrementReport report;
  report.group = group;
  report.corpus = tensor.label;
  report.period1 = period1;
  report.period2 = period2;

  const auto n = tensor.terms();
  std::vector<LinkIncrement> links;
  double abs_sum_all = 0.0;
  std::size_t all_pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double m1 = period_mean(tensor, i, j, period1);
      const double m2 = period_mean(tensor, i, j, period2);
      abs_sum_all += std::abs(m2 - m1);
      ++all_pairs;
      if (m1 > 0.0) links.push_back({i, j, m1, m2, 0.0});
    }
  }
  report.nonzero_links = links.size();
  if (links.empty()) throw NumericalError("no links with non-zero period-1 strength");

  double abs_sum = 0.0;
  for (const auto& l : links) abs_sum += std::abs(l.mean_period2 - l.mean_period1);
  report.mean_abs_change = denominator == IncrementDenominator::nonzero_period1
                               ? abs_sum / static_cast<double>(links.size())
                               : abs_sum_all / static_cast<double>(all_pairs);
  if (report.mean_abs_change == 0.0) throw NumericalError("no link changed between periods");

  // Strongest first; equal strengths keep pair order.
  std::stable_sort(links.begin(), links.end(), [](const LinkIncrement& a, const LinkIncrement& b) {
    return a.mean_period1 > b.mean_period1;
  });
  const auto count = links.size();
  if (group == IncrementGroup::top5) {
    const auto take = static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(count)));
    links.resize(take);
  } else {
    const auto take = static_cast<std::size_t>(std::floor(0.50 * static_cast<double>(count)));
    links.erase(links.begin(), links.end() - static_cast<std::ptrdiff_t>(take));
  }
  double group_sum = 0.0;
  for (auto& l : links) {
    l.relative_increment = (l.mean_period2 - l.mean_period1) / report.mean_abs_change;
    group_sum += l.relative_increment;
  }
  report.group_mean = links.empty() ? 0.0 : group_sum / static_cast<double>(links.size());
  report.links = std::move(links);
  return report;
}

std::string format_scatter(std::span<const PairRegimeStat> stats,
                           std::span<const PairClassification> classes,
                           const Vocabulary& vocabulary) {
  if (stats.size() != classes.size()) throw InputError("scatter and classification sizes differ");
  std::ostringstream out;
  out << "term_i,term_j,mean_U,se_U,mean_F,se_F,residual,status\n";
  for (std::size_t k = 0; k < stats.size(); ++k) {
    const auto& s = stats[k];
    out << csv::escape_field(vocabulary.term(s.i)) << ',' << csv::escape_field(vocabulary.term(s.j))
        << ',' << csv::format_real(s.mean_unfunded) << ',' << csv::format_real(s.se_unfunded) << ','
        << csv::format_real(s.mean_funded) << ',' << csv::format_real(s.se_funded) << ','
        << csv::format_real(classes[k].residual) << ',' << to_string(classes[k].status) << '\n';
  }
  return out.str();
}

std::string format_increment_report(const IncrementReport& report, const Vocabulary& vocabulary) {
  std::ostringstream out;
  out << "corpus,group,period1,period2,term_i,term_j,mean_period1,mean_period2,relative_increment\n";
  const auto p1 = std::to_string(report.period1.start) + "-" + std::to_string(report.period1.end);
  const auto p2 = std::to_string(report.period2.start) + "-" + std::to_string(report.period2.end);
  for (const auto& l : report.links) {
    out << to_string(report.corpus) << ',' << to_string(report.group) << ',' << p1 << ',' << p2
        << ',' << csv::escape_field(vocabulary.term(l.i)) << ','
        << csv::escape_field(vocabulary.term(l.j)) << ',' << csv::format_real(l.mean_period1)
        << ',' << csv::format_real(l.mean_period2) << ',' << csv::format_real(l.relative_increment)
        << '\n';
  }
  return out.str();
}

}  // namespace idnet
