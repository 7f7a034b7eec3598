#include "idnet/regimes.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "idnet/csv.hpp"
#include "idnet/error.hpp"
#include "idnet/parallel.hpp"

namespace idnet {

std::vector<std::vector<double>> slice_vectors(const WeightTensor& tensor) {
  const auto n = tensor.terms();
  std::vector<std::vector<double>> out;
  out.reserve(tensor.slices.size());
  for (const auto& slice : tensor.slices) {
    std::vector<double> v;
    v.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) v.push_back(slice.weights(i, j));
    }
    out.push_back(std::move(v));
  }
  return out;
}

SliceDistanceMatrix slice_distance_matrix(const WeightTensor& tensor, unsigned threads) {
  const auto slices = tensor.slices.size();
  if (slices < 2) throw InputError("slice distances need at least two years");
  const auto n = tensor.terms();
  SliceDistanceMatrix out{tensor.years, SquareMatrix<double>(slices, 0.0)};
  parallel_for(slices, threads, [&](std::size_t a) {
    const auto& wa = tensor.slices[a].weights;
    for (std::size_t b = a + 1; b < slices; ++b) {
      const auto& wb = tensor.slices[b].weights;
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          const double diff = wb(i, j) - wa(i, j);
          sum += diff * diff;
        }
      }
      // Row a owns (a, b>a), so concurrent writers never touch the same cell.
      out.d(a, b) = std::sqrt(sum);
    }
  });
  for (std::size_t a = 0; a < slices; ++a) {
    for (std::size_t b = a + 1; b < slices; ++b) out.d(b, a) = out.d(a, b);
  }
  return out;
}

Dendrogram upgma_cluster(const SquareMatrix<double>& distances) {
  const auto n = distances.size();
  if (n < 2) throw InputError("clustering needs at least two items");

  struct Slot {
    std::size_t id;
    std::size_t representative;
    std::size_t size;
    bool active;
  };
  std::vector<Slot> slots(n);
  for (std::size_t k = 0; k < n; ++k) slots[k] = {k, k, 1, true};
  SquareMatrix<double> d = distances;

  Dendrogram out;
  out.leaves = n;
  out.merges.reserve(n - 1);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n; ++a) {
      if (!slots[a].active) continue;
      for (std::size_t b = a + 1; b < n; ++b) {
        if (slots[b].active) best = std::min(best, d(a, b));
      }
    }
    const double limit = best + kLinkageTieTolerance * std::abs(best);

    // Slot index equals the representative (earliest leaf) of the cluster in it,
    // so scanning slots in order visits pairs in representative order.
    std::size_t pick_a = n;
    std::size_t pick_b = n;
    for (std::size_t a = 0; a < n && pick_a == n; ++a) {
      if (!slots[a].active) continue;
      for (std::size_t b = a + 1; b < n; ++b) {
        if (slots[b].active && d(a, b) <= limit) {
          pick_a = a;
          pick_b = b;
          break;
        }
      }
    }

    auto& sa = slots[pick_a];
    auto& sb = slots[pick_b];
    const double height = d(pick_a, pick_b);
    const auto merged_size = sa.size + sb.size;
    out.merges.push_back({sa.id, sb.id, height, merged_size});

    for (std::size_t c = 0; c < n; ++c) {
      if (!slots[c].active || c == pick_a || c == pick_b) continue;
      const double linked = (static_cast<double>(sa.size) * d(pick_a, c) +
                             static_cast<double>(sb.size) * d(pick_b, c)) /
                            static_cast<double>(merged_size);
      d(pick_a, c) = linked;
      d(c, pick_a) = linked;
    }
    sa.id = n + step;
    sa.size = merged_size;
    sb.active = false;
  }
  return out;
}

std::vector<Cluster> cut_dendrogram(const Dendrogram& dendrogram, std::size_t k) {
  const auto n = dendrogram.leaves;
  if (k < 1 || k > n) {
    throw InputError("cluster count " + std::to_string(k) + " outside 1.." + std::to_string(n));
  }
  std::vector<Cluster> members(n + dendrogram.merges.size());
  std::vector<bool> alive(members.size(), false);
  for (std::size_t leaf = 0; leaf < n; ++leaf) {
    members[leaf] = {leaf};
    alive[leaf] = true;
  }
  for (std::size_t step = 0; step < n - k; ++step) {
    const auto& m = dendrogram.merges[step];
    auto& merged = members[n + step];
    merged = members[m.cluster_a];
    merged.insert(merged.end(), members[m.cluster_b].begin(), members[m.cluster_b].end());
    std::sort(merged.begin(), merged.end());
    alive[m.cluster_a] = false;
    alive[m.cluster_b] = false;
    alive[n + step] = true;
  }
  std::vector<Cluster> out;
  for (std::size_t id = 0; id < members.size(); ++id) {
    if (alive[id]) out.push_back(members[id]);
  }
  std::sort(out.begin(), out.end(),
            [](const Cluster& a, const Cluster& b) { return a.front() < b.front(); });
  return out;
}

double within_cluster_sum_of_squares(std::span<const std::vector<double>> points,
                                     std::span<const Cluster> clusters) {
  double total = 0.0;
  for (const auto& cluster : clusters) {
    if (cluster.empty()) continue;
    const auto dims = points[cluster.front()].size();
    std::vector<double> centroid(dims, 0.0);
    for (auto idx : cluster) {
      const auto& p = points[idx];
      for (std::size_t d = 0; d < dims; ++d) centroid[d] += p[d];
    }
    for (auto& c : centroid) c /= static_cast<double>(cluster.size());
    for (auto idx : cluster) {
      const auto& p = points[idx];
      for (std::size_t d = 0; d < dims; ++d) {
        const double delta = p[d] - centroid[d];
        total += delta * delta;
      }
    }
  }
  return total;
}

std::vector<WssPoint> wss_curve(std::span<const std::vector<double>> points,
                                const Dendrogram& dendrogram, std::size_t k_max) {
  if (points.size() != dendrogram.leaves) {
    throw InputError("point count does not match dendrogram leaves");
  }
  k_max = std::min(k_max, dendrogram.leaves);
  std::vector<WssPoint> curve;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const auto clusters = cut_dendrogram(dendrogram, k);
    curve.push_back({k, within_cluster_sum_of_squares(points, clusters)});
  }
  return curve;
}

std::size_t select_k_elbow(std::span<const WssPoint> curve, std::optional<std::size_t> override_k) {
  if (override_k) {
    if (*override_k < 1) throw InputError("elbow override must be at least 1");
    return *override_k;
  }
  if (curve.size() < 3) throw InputError("WSS curve too short for elbow selection (need 3 points)");
  std::size_t best_k = curve[1].k;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 1; p + 1 < curve.size(); ++p) {
    const double second = curve[p - 1].wss - 2.0 * curve[p].wss + curve[p + 1].wss;
    if (second > best) {
      best = second;
      best_k = curve[p].k;
    }
  }
  return best_k;
}

RegimePartition repair_contiguity(std::span<const std::vector<Year>> clusters,
                                  const YearRange& years, std::string_view label_prefix) {
  const auto slices = years.slices();
  constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> owner(slices, kUnassigned);
  RegimePartition out;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    auto sorted = clusters[c];
    std::sort(sorted.begin(), sorted.end());
    for (Year y : sorted) {
      const auto t = years.index_of(y);
      if (owner[t] != kUnassigned) {
        throw InputError("year " + std::to_string(y) + " assigned to more than one cluster");
      }
      owner[t] = c;
    }
    out.raw_clusters.push_back(std::move(sorted));
  }
  for (std::size_t t = 0; t < slices; ++t) {
    if (owner[t] == kUnassigned) {
      throw InputError("year " + std::to_string(years.year_at(t)) + " not covered by any cluster");
    }
  }

  struct Run {
    std::size_t first;
    std::size_t last;
    std::size_t cluster;
    std::size_t length() const { return last - first + 1; }
  };
  const auto make_runs = [&] {
    std::vector<Run> runs;
    for (std::size_t t = 0; t < slices; ++t) {
      if (!runs.empty() && runs.back().cluster == owner[t]) {
        runs.back().last = t;
      } else {
        runs.push_back({t, t, owner[t]});
      }
    }
    return runs;
  };

  while (true) {
    const auto runs = make_runs();
    // Span (first run index, last run index) of each cluster with two or more runs.
    std::vector<std::pair<std::size_t, std::size_t>> spans(clusters.size(), {kUnassigned, 0});
    std::vector<std::size_t> run_count(clusters.size(), 0);
    for (std::size_t r = 0; r < runs.size(); ++r) {
      const auto c = runs[r].cluster;
      if (run_count[c]++ == 0) spans[c].first = r;
      spans[c].second = r;
    }
    std::size_t pick = kUnassigned;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      bool offending = false;
      for (std::size_t c = 0; c < clusters.size() && !offending; ++c) {
        offending = run_count[c] > 1 && r >= spans[c].first && r <= spans[c].second;
      }
      if (offending && (pick == kUnassigned || runs[r].length() < runs[pick].length())) pick = r;
    }
    if (pick == kUnassigned) break;

    const auto& run = runs[pick];
    std::size_t target;
    if (pick == 0) {
      target = runs[1].cluster;
    } else {
      target = runs[pick - 1].cluster;
    }
    ContiguityRepair repair;
    repair.from_cluster = run.cluster;
    repair.to_cluster = target;
    for (std::size_t t = run.first; t <= run.last; ++t) {
      owner[t] = target;
      repair.years.push_back(years.year_at(t));
    }
    out.repairs.push_back(std::move(repair));
  }

  for (const auto& run : make_runs()) {
    out.regimes.push_back({"", years.year_at(run.first), years.year_at(run.last)});
  }
  for (std::size_t r = 0; r < out.regimes.size(); ++r) {
    out.regimes[r].label = std::string(label_prefix) + std::to_string(r + 1);
  }
  return out;
}

RegimeNetwork average_regime_network(const WeightTensor& tensor, const Regime& regime) {
  if (regime.start > regime.end || !tensor.years.contains(regime.start) ||
      !tensor.years.contains(regime.end)) {
    throw InputError("regime " + regime.label + " (" + std::to_string(regime.start) + "-" +
                     std::to_string(regime.end) + ") outside the tensor's years");
  }
  const auto n = tensor.terms();
  RegimeNetwork out{regime.label, regime.start, regime.end, SquareMatrix<double>(n, 0.0),
                    regime.length()};
  for (Year y = regime.start; y <= regime.end; ++y) {
    const auto& w = tensor.at_year(y);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) out.weights(i, j) += w(i, j);
    }
  }
  const auto count = static_cast<double>(out.year_count);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.weights(i, j) /= count;
  }
  return out;
}

RegimeDetection detect_regimes(const WeightTensor& tensor, const RegimeDetectionOptions& options) {
  RegimeDetection out;
  out.distances = slice_distance_matrix(tensor, options.threads);
  out.dendrogram = upgma_cluster(out.distances);
  const auto points = slice_vectors(tensor);
  out.wss = wss_curve(points, out.dendrogram, std::min(options.k_max, points.size()));
  out.chosen_k = select_k_elbow(out.wss, options.override_k);
  if (out.chosen_k > points.size()) {
    throw InputError("elbow override " + std::to_string(out.chosen_k) + " exceeds " +
                     std::to_string(points.size()) + " slices");
  }
  std::vector<std::vector<Year>> clusters;
  for (const auto& cluster : cut_dendrogram(out.dendrogram, out.chosen_k)) {
    std::vector<Year> ys;
    for (auto t : cluster) ys.push_back(tensor.years.year_at(t));
    clusters.push_back(std::move(ys));
  }
  out.partition = repair_contiguity(clusters, tensor.years, to_string(tensor.label));
  return out;
}

std::string to_newick(const Dendrogram& dendrogram, const YearRange& years) {
  const auto n = dendrogram.leaves;
  if (n == 0) return ";";
  std::vector<double> depth(n + dendrogram.merges.size(), 0.0);
  for (std::size_t s = 0; s < dendrogram.merges.size(); ++s) {
    depth[n + s] = dendrogram.merges[s].height / 2.0;
  }
  std::function<std::string(std::size_t)> render = [&](std::size_t id) -> std::string {
    if (id < n) return std::to_string(years.year_at(id));
    const auto& m = dendrogram.merges[id - n];
    return "(" + render(m.cluster_a) + ":" + csv::format_real(depth[id] - depth[m.cluster_a]) +
           "," + render(m.cluster_b) + ":" + csv::format_real(depth[id] - depth[m.cluster_b]) +
           ")";
  };
  if (dendrogram.merges.empty()) return render(0) + ";";
  return render(n + dendrogram.merges.size() - 1) + ";";
}

std::string format_regime_report(const RegimeDetection& detection, CorpusLabel label) {
  using nlohmann::json;
  json doc;
  doc["corpus"] = std::string(to_string(label));
  doc["years"] = {{"start", detection.distances.years.start()},
                  {"end", detection.distances.years.end()}};
  json curve = json::array();
  for (const auto& p : detection.wss) curve.push_back({{"k", p.k}, {"wss", p.wss}});
  doc["wss_curve"] = curve;
  doc["chosen_k"] = detection.chosen_k;
  doc["raw_clusters"] = detection.partition.raw_clusters;
  json repairs = json::array();
  for (const auto& r : detection.partition.repairs) {
    repairs.push_back({{"years", r.years}, {"from_cluster", r.from_cluster},
                       {"to_cluster", r.to_cluster}});
  }
  doc["repairs"] = repairs;
  json regimes = json::array();
  for (const auto& r : detection.partition.regimes) {
    regimes.push_back({{"label", r.label}, {"start", r.start}, {"end", r.end}});
  }
  doc["regimes"] = regimes;
  return doc.dump(2) + "\n";
}

}  // namespace idnet
