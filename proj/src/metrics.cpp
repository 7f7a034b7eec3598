#include "idnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "idnet/csv.hpp"
#include "idnet/error.hpp"
#include "idnet/parallel.hpp"

namespace idnet {

WeightedNetwork::WeightedNetwork(SquareMatrix<double> weights) : weights_(std::move(weights)) {
  const auto n = weights_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (weights_(i, i) != 0.0) throw InputError("network has a non-zero diagonal");
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = weights_(i, j);
      if (!std::isfinite(w) || w < 0.0) throw InputError("network weights must be finite and >= 0");
      if (w != weights_(j, i)) throw InputError("network weights must be symmetric");
    }
  }
}

Strengths node_strengths(const WeightedNetwork& net) {
  const auto n = net.nodes();
  Strengths out{std::vector<double>(n, 0.0), 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += net.weight(i, j);
    out.node[i] = s;
  }
  if (n > 0) out.mean = std::accumulate(out.node.begin(), out.node.end(), 0.0) / static_cast<double>(n);
  return out;
}

namespace {

bool same_length(double a, double b) {
  return std::abs(a - b) <= kPathTieTolerance * std::max(std::abs(a), std::abs(b));
}

/// Single-source shortest paths on the dense graph (O(N^2) Dijkstra).
/// With `brandes` set it also records path counts, predecessors and the settle order.
struct SourceSearch {
  std::vector<double> dist;
  std::vector<double> sigma;
  std::vector<std::vector<std::size_t>> preds;
  std::vector<std::size_t> order;

  SourceSearch(const WeightedNetwork& net, std::size_t source, bool brandes) {
    const auto n = net.nodes();
    dist.assign(n, kUnreachable);
    std::vector<bool> settled(n, false);
    if (brandes) {
      sigma.assign(n, 0.0);
      preds.assign(n, {});
      sigma[source] = 1.0;
    }
    dist[source] = 0.0;
    for (;;) {
      std::size_t v = n;
      for (std::size_t u = 0; u < n; ++u) {
        if (!settled[u] && dist[u] != kUnreachable && (v == n || dist[u] < dist[v])) v = u;
      }
      if (v == n) break;
      settled[v] = true;
      order.push_back(v);
      for (std::size_t w = 0; w < n; ++w) {
        const double weight = net.weight(v, w);
        if (weight <= 0.0 || settled[w]) continue;
        const double alt = dist[v] + 1.0 / weight;
        if (dist[w] == kUnreachable || (alt < dist[w] && !same_length(alt, dist[w]))) {
          dist[w] = alt;
          if (brandes) {
            sigma[w] = sigma[v];
            preds[w].assign(1, v);
          }
        } else if (brandes && same_length(alt, dist[w])) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
  }
};

}  // namespace

SquareMatrix<double> shortest_path_lengths(const WeightedNetwork& net, unsigned threads) {
  const auto n = net.nodes();
  SquareMatrix<double> out(n, kUnreachable);
  parallel_for(n, threads, [&](std::size_t s) {
    SourceSearch search(net, s, false);
    auto row = out.row(s);
    std::copy(search.dist.begin(), search.dist.end(), row.begin());
  });
  return out;
}

AsplResult aspl_from_distances(const SquareMatrix<double>& distances) {
  const auto n = distances.size();
  double sum = 0.0;
  std::size_t finite = 0;
  AsplResult out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distances(i, j);
      if (d == kUnreachable) {
        ++out.unreachable_pairs;
      } else {
        sum += d;
        ++finite;
      }
    }
  }
  if (finite == 0) throw NumericalError("no finite paths");
  out.aspl = sum / static_cast<double>(finite);
  return out;
}

AsplResult aspl(const WeightedNetwork& net, unsigned threads) {
  return aspl_from_distances(shortest_path_lengths(net, threads));
}

std::vector<double> betweenness(const WeightedNetwork& net, unsigned threads) {
  const auto n = net.nodes();
  std::vector<double> total(n, 0.0);
  if (n < 3) return total;

  std::vector<std::vector<double>> partial(n);
  parallel_for(n, threads, [&](std::size_t s) {
    SourceSearch search(net, s, true);
    std::vector<double> delta(n, 0.0);
    std::vector<double> local(n, 0.0);
    for (auto it = search.order.rbegin(); it != search.order.rend(); ++it) {
      const auto w = *it;
      for (auto v : search.preds[w]) {
        delta[v] += search.sigma[v] / search.sigma[w] * (1.0 + delta[w]);
      }
      if (w != s) local[w] += delta[w];
    }
    partial[s] = std::move(local);
  });
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t v = 0; v < n; ++v) total[v] += partial[s][v];
  }
  // Every unordered pair is seen from both endpoints.
  const double pairs = static_cast<double>(n - 1) * static_cast<double>(n - 2) / 2.0;
  for (auto& b : total) b = b / 2.0 / pairs;
  return total;
}

CommunityAssignment::CommunityAssignment(std::vector<std::size_t> membership) {
  std::map<std::size_t, std::size_t> relabel;
  membership_.reserve(membership.size());
  for (auto c : membership) {
    const auto [it, inserted] = relabel.try_emplace(c, relabel.size());
    membership_.push_back(it->second);
  }
  count_ = relabel.size();
}

CommunityAssignment CommunityAssignment::singletons(std::size_t n) {
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), std::size_t{0});
  return CommunityAssignment(std::move(m));
}

CommunityAssignment CommunityAssignment::single(std::size_t n) {
  return CommunityAssignment(std::vector<std::size_t>(n, 0));
}

double modularity(const WeightedNetwork& net, const CommunityAssignment& communities,
                  double resolution) {
  const auto n = net.nodes();
  if (communities.nodes() != n) throw InputError("community assignment size mismatch");
  const auto strengths = node_strengths(net);
  const double two_m = std::accumulate(strengths.node.begin(), strengths.node.end(), 0.0);
  if (two_m <= 0.0) throw NumericalError("empty network");
  std::vector<double> inside(communities.communities(), 0.0);
  std::vector<double> tot(communities.communities(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ci = communities.of(i);
    tot[ci] += strengths.node[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (communities.of(j) == ci) inside[ci] += net.weight(i, j);
    }
  }
  double q = 0.0;
  for (std::size_t c = 0; c < inside.size(); ++c) {
    const double share = tot[c] / two_m;
    q += inside[c] / two_m - resolution * share * share;
  }
  return q;
}

namespace {

/// Aggregated graph of one Louvain level. adjacency excludes loops; loop[i] is the
/// total weight inside super-node i counted over ordered pairs.
struct LevelGraph {
  std::vector<std::vector<std::pair<std::size_t, double>>> adjacency;
  std::vector<double> loop;
  std::vector<double> degree;

  std::size_t size() const { return adjacency.size(); }
};

LevelGraph base_graph(const WeightedNetwork& net) {
  const auto n = net.nodes();
  LevelGraph g;
  g.adjacency.resize(n);
  g.loop.assign(n, 0.0);
  g.degree.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = net.weight(i, j);
      if (i == j || w <= 0.0) continue;
      g.adjacency[i].emplace_back(j, w);
      g.degree[i] += w;
    }
  }
  return g;
}

bool clearly_greater(double a, double b) {
  return a - b > 1e-12 * (std::abs(a) + std::abs(b));
}

/// Local moving phase. Returns true if any node changed community.
bool local_moves(const LevelGraph& g, double two_m, double resolution,
                 std::vector<std::size_t>& community, std::mt19937_64& rng) {
  const auto n = g.size();
  std::vector<double> tot(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) tot[community[i]] += g.degree[i];

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<double> link_to(n, 0.0);
  std::vector<std::size_t> touched;
  bool any_move = false;
  bool moved = true;
  while (moved) {
    moved = false;
    for (auto i : order) {
      const auto own = community[i];
      const double ki = g.degree[i];
      touched.clear();
      for (const auto& [j, w] : g.adjacency[i]) {
        const auto c = community[j];
        if (link_to[c] == 0.0) touched.push_back(c);
        link_to[c] += w;
      }
      tot[own] -= ki;
      const auto gain = [&](std::size_t c) {
        return link_to[c] - resolution * tot[c] * ki / two_m;
      };
      const double stay = gain(own);
      std::size_t best = own;
      double best_gain = stay;
      for (auto c : touched) {
        if (c != own && clearly_greater(gain(c), best_gain)) {
          best = c;
          best_gain = gain(c);
        }
      }
      tot[best] += ki;
      if (best != own) {
        community[i] = best;
        moved = true;
        any_move = true;
      }
      for (auto c : touched) link_to[c] = 0.0;
    }
  }
  return any_move;
}

LevelGraph aggregate(const LevelGraph& g, const std::vector<std::size_t>& community,
                     std::size_t communities) {
  LevelGraph out;
  out.adjacency.resize(communities);
  out.loop.assign(communities, 0.0);
  out.degree.assign(communities, 0.0);
  std::vector<std::map<std::size_t, double>> links(communities);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto ci = community[i];
    out.loop[ci] += g.loop[i];
    out.degree[ci] += g.degree[i];
    for (const auto& [j, w] : g.adjacency[i]) {
      const auto cj = community[j];
      if (ci == cj) {
        out.loop[ci] += w;
      } else {
        links[ci][cj] += w;
      }
    }
  }
  for (std::size_t c = 0; c < communities; ++c) {
    out.adjacency[c].assign(links[c].begin(), links[c].end());
  }
  return out;
}

/// Compacts ids in order of first appearance; returns the number of communities.
std::size_t renumber(std::vector<std::size_t>& community) {
  std::vector<std::size_t> map(community.size(), community.size());
  std::size_t next = 0;
  for (auto& c : community) {
    if (map[c] == community.size()) map[c] = next++;
    c = map[c];
  }
  return next;
}

CommunityAssignment louvain_once(const WeightedNetwork& net, double resolution,
                                 std::mt19937_64& rng) {
  LevelGraph g = base_graph(net);
  double two_m = 0.0;
  for (double k : g.degree) two_m += k;

  std::vector<std::size_t> node_community(net.nodes());
  std::iota(node_community.begin(), node_community.end(), std::size_t{0});
  for (;;) {
    std::vector<std::size_t> community(g.size());
    std::iota(community.begin(), community.end(), std::size_t{0});
    if (!local_moves(g, two_m, resolution, community, rng)) break;
    const auto count = renumber(community);
    for (auto& c : node_community) c = community[c];
    if (count == g.size()) break;
    g = aggregate(g, community, count);
  }
  return CommunityAssignment(std::move(node_community));
}

}  // namespace

LouvainResult louvain_communities(const WeightedNetwork& net, const LouvainOptions& options) {
  const auto strengths = node_strengths(net);
  if (std::accumulate(strengths.node.begin(), strengths.node.end(), 0.0) <= 0.0) {
    throw NumericalError("empty network");
  }
  const auto restarts = std::max<std::size_t>(1, options.restarts);
  std::vector<CommunityAssignment> found(restarts);
  std::vector<double> quality(restarts, 0.0);
  parallel_for(restarts, options.threads, [&](std::size_t r) {
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed),
                      static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    found[r] = louvain_once(net, options.resolution, rng);
    quality[r] = modularity(net, found[r], options.resolution);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < restarts; ++r) {
    if (quality[r] > quality[best]) best = r;
  }
  return {found[best], quality[best], best};
}

double adjusted_rand_index(const CommunityAssignment& a, const CommunityAssignment& b) {
  if (a.nodes() != b.nodes()) throw InputError("partitions cover different node counts");
  const auto n = a.nodes();
  if (n < 2) return 1.0;
  const auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
  std::vector<double> table(a.communities() * b.communities(), 0.0);
  std::vector<double> rows(a.communities(), 0.0);
  std::vector<double> cols(b.communities(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    table[a.of(i) * b.communities() + b.of(i)] += 1.0;
    rows[a.of(i)] += 1.0;
    cols[b.of(i)] += 1.0;
  }
  double index = 0.0;
  for (double v : table) index += choose2(v);
  double sum_rows = 0.0;
  double sum_cols = 0.0;
  for (double v : rows) sum_rows += choose2(v);
  for (double v : cols) sum_cols += choose2(v);
  const double expected = sum_rows * sum_cols / choose2(static_cast<double>(n));
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return a == b ? 1.0 : 0.0;
  return (index - expected) / (max_index - expected);
}

MetricTable compute_metric_table(const WeightedNetwork& net, const LouvainOptions& options) {
  MetricTable table;
  const auto strengths = node_strengths(net);
  table.strength = strengths.node;
  table.mean_strength = strengths.mean;
  table.betweenness = betweenness(net, options.threads);
  const auto distances = shortest_path_lengths(net, options.threads);
  const auto n = net.nodes();
  try {
    const auto a = aspl_from_distances(distances);
    table.aspl = a.aspl;
    table.unreachable_pairs = a.unreachable_pairs;
  } catch (const NumericalError&) {
    table.aspl = 0.0;
    table.unreachable_pairs = n * (n - 1) / 2;
  }
  if (strengths.mean > 0.0) {
    auto louvain = louvain_communities(net, options);
    table.communities = std::move(louvain.communities);
    table.modularity = modularity(net, table.communities);
  } else {
    table.communities = CommunityAssignment::singletons(n);
    table.modularity = 0.0;
  }
  return table;
}

std::string format_metric_table(const MetricTable& table, const Vocabulary& vocabulary) {
  std::ostringstream out;
  out << "term,strength,betweenness\n";
  for (std::size_t i = 0; i < table.strength.size(); ++i) {
    out << csv::escape_field(vocabulary.term(i)) << ',' << csv::format_real(table.strength[i])
        << ',' << csv::format_real(table.betweenness[i]) << '\n';
  }
  return out.str();
}

std::string format_metric_summary(const MetricTable& table) {
  nlohmann::json doc = {{"mean_strength", table.mean_strength},
                        {"aspl", table.aspl},
                        {"unreachable_pairs", table.unreachable_pairs},
                        {"modularity", table.modularity},
                        {"n_communities", table.communities.communities()}};
  return doc.dump(2) + "\n";
}

}  // namespace idnet
