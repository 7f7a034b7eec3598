#pragma once

// Slow reference implementations used to cross-check the library. None of these
// share code with src/; each follows the textbook definition as literally as
// possible.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline constexpr double inf = std::numeric_limits<double>::infinity();

inline bool close_rel(double a, double b, double rel = 1e-12) {
  return std::fabs(a - b) <= rel * std::max(std::fabs(a), std::fabs(b));
}

inline Matrix zeros(std::size_t n) { return Matrix(n, std::vector<double>(n, 0.0)); }

// ---------------------------------------------------------------------------
// Paths

/// Floyd-Warshall on link lengths 1/w.
inline Matrix relaxation_distances(const Matrix& w) {
  const auto n = w.size();
  Matrix d(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i) {
    d[i][i] = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && w[i][j] > 0.0) d[i][j] = 1.0 / w[i][j];
    }
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

struct AsplOracle {
  double aspl = 0.0;
  std::size_t unreachable = 0;
};

inline AsplOracle relaxation_aspl(const Matrix& w) {
  const auto d = relaxation_distances(w);
  double sum = 0.0;
  std::size_t finite = 0, unreachable = 0;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = i + 1; j < d.size(); ++j) {
      if (std::isinf(d[i][j])) {
        ++unreachable;
      } else {
        sum += d[i][j];
        ++finite;
      }
    }
  return {finite ? sum / static_cast<double>(finite) : 0.0, unreachable};
}

/// Enumerates every simple path between every unordered pair, keeps the
/// shortest ones and credits each intermediate node with its share.
inline std::vector<double> exhaustive_betweenness(const Matrix& w) {
  const auto n = w.size();
  std::vector<double> b(n, 0.0);
  if (n < 3) return b;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = s + 1; t < n; ++t) {
      std::vector<std::pair<double, std::vector<std::size_t>>> paths;
      std::vector<std::size_t> path{s};
      std::vector<bool> used(n, false);
      used[s] = true;
      std::function<void(std::size_t, double)> walk = [&](std::size_t u, double len) {
        if (u == t) {
          paths.emplace_back(len, path);
          return;
        }
        for (std::size_t v = 0; v < n; ++v) {
          if (used[v] || w[u][v] <= 0.0) continue;
          used[v] = true;
          path.push_back(v);
          walk(v, len + 1.0 / w[u][v]);
          path.pop_back();
          used[v] = false;
        }
      };
      walk(s, 0.0);
      if (paths.empty()) continue;
      double best = inf;
      for (const auto& p : paths) best = std::min(best, p.first);
      std::vector<double> through(n, 0.0);
      double count = 0.0;
      for (const auto& [len, nodes] : paths) {
        if (!close_rel(len, best)) continue;
        count += 1.0;
        for (std::size_t k = 1; k + 1 < nodes.size(); ++k) through[nodes[k]] += 1.0;
      }
      for (std::size_t v = 0; v < n; ++v) b[v] += through[v] / count;
    }
  }
  const double norm = static_cast<double>((n - 1) * (n - 2)) / 2.0;
  for (auto& x : b) x /= norm;
  return b;
}

// ---------------------------------------------------------------------------
// Modularity

inline double double_loop_modularity(const Matrix& w, const std::vector<std::size_t>& c,
                                     double gamma = 1.0) {
  const auto n = w.size();
  std::vector<double> s(n, 0.0);
  double two_m = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      s[i] += w[i][j];
      two_m += w[i][j];
    }
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (c[i] == c[j]) q += w[i][j] - gamma * s[i] * s[j] / two_m;
  return q / two_m;
}

// ---------------------------------------------------------------------------
// Clustering

struct OracleMerge {
  std::size_t a, b;
  double height;
  std::size_t size;
};

/// Average linkage recomputed from the original matrix at every step: the
/// distance between two clusters is the mean over all cross pairs of leaves.
/// Ties (relative 1e-12) go to the lexicographically smallest pair of earliest
/// leaves; ids follow the leaves-then-merges numbering.
inline std::vector<OracleMerge> brute_force_upgma(const Matrix& d) {
  const auto n = d.size();
  struct Node {
    std::size_t id;
    std::vector<std::size_t> leaves;
  };
  std::vector<Node> active;
  for (std::size_t i = 0; i < n; ++i) active.push_back({i, {i}});
  std::vector<OracleMerge> merges;
  for (std::size_t step = 0; step + 1 < n; ++step) {
    double best = inf;
    std::size_t ba = 0, bb = 0;
    for (std::size_t x = 0; x < active.size(); ++x) {
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        double sum = 0.0;
        for (auto p : active[x].leaves)
          for (auto q : active[y].leaves) sum += d[p][q];
        const double avg =
            sum / static_cast<double>(active[x].leaves.size() * active[y].leaves.size());
        if (best == inf || (avg < best && !close_rel(avg, best))) {
          best = avg;
          ba = x;
          bb = y;
        } else if (close_rel(avg, best)) {
          auto key = [&](std::size_t u, std::size_t v) {
            auto l1 = active[u].leaves.front(), l2 = active[v].leaves.front();
            return std::make_pair(std::min(l1, l2), std::max(l1, l2));
          };
          if (key(x, y) < key(ba, bb)) {
            best = std::min(avg, best);
            ba = x;
            bb = y;
          }
        }
      }
    }
    auto& A = active[ba];
    auto& B = active[bb];
    const bool a_first = A.leaves.front() < B.leaves.front();
    const auto& first = a_first ? A : B;
    const auto& second = a_first ? B : A;
    std::vector<std::size_t> leaves = A.leaves;
    leaves.insert(leaves.end(), B.leaves.begin(), B.leaves.end());
    std::sort(leaves.begin(), leaves.end());
    merges.push_back({first.id, second.id, best, leaves.size()});
    Node merged{n + step, std::move(leaves)};
    active.erase(active.begin() + static_cast<long>(bb));
    active.erase(active.begin() + static_cast<long>(ba));
    active.push_back(std::move(merged));
  }
  return merges;
}

inline double wss_direct(const std::vector<std::vector<double>>& pts,
                         const std::vector<std::vector<std::size_t>>& clusters) {
  double total = 0.0;
  for (const auto& c : clusters) {
    const auto dim = pts[c.front()].size();
    std::vector<double> centre(dim, 0.0);
    for (auto i : c)
      for (std::size_t k = 0; k < dim; ++k) centre[k] += pts[i][k];
    for (auto& x : centre) x /= static_cast<double>(c.size());
    for (auto i : c)
      for (std::size_t k = 0; k < dim; ++k) total += (pts[i][k] - centre[k]) * (pts[i][k] - centre[k]);
  }
  return total;
}

/// Minimum WSS over every partition of the points into exactly k blocks
/// (restricted-growth strings). Only feasible for small point counts.
inline double optimal_wss(const std::vector<std::vector<double>>& pts, std::size_t k) {
  const auto n = pts.size();
  std::vector<std::size_t> rgs(n, 0);
  double best = inf;
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t used) {
    if (n - i < k - used) return;
    if (i == n) {
      if (used != k) return;
      std::vector<std::vector<std::size_t>> clusters(k);
      for (std::size_t p = 0; p < n; ++p) clusters[rgs[p]].push_back(p);
      best = std::min(best, wss_direct(pts, clusters));
      return;
    }
    for (std::size_t b = 0; b <= used && b < k; ++b) {
      rgs[i] = b;
      rec(i + 1, b == used ? used + 1 : used);
    }
  };
  rec(0, 0);
  return best;
}

// ---------------------------------------------------------------------------
// Statistics

struct Ols {
  double slope, intercept, r_squared;
};

/// Normal equations from raw sums, solved with Cramer's rule.
inline Ols closed_form_ols(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  long double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  const long double det = n * sxx - sx * sx;
  const double b = static_cast<double>((n * sxy - sx * sy) / det);
  const double a = static_cast<double>((sxx * sy - sx * sxy) / det);
  const double ybar = static_cast<double>(sy / n);
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (a + b * x[i]);
    ss_res += e * e;
    ss_tot += (y[i] - ybar) * (y[i] - ybar);
  }
  return {b, a, 1.0 - ss_res / ss_tot};
}

/// r_within written out loop by loop.
inline std::vector<double> r_within(const std::vector<std::vector<double>>& s) {
  const auto n = s.size();
  const auto len = s.front().size();
  const auto w = std::min<std::size_t>(3, len);
  std::vector<double> start(n, 0.0), end(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < w; ++t) start[i] += s[i][t] / static_cast<double>(w);
    for (std::size_t t = len - w; t < len; ++t) end[i] += s[i][t] / static_cast<double>(w);
  }
  double ms = 0, me = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ms += start[i] / static_cast<double>(n);
    me += end[i] / static_cast<double>(n);
  }
  const double denom = std::fabs(me - ms);
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = (end[i] - start[i]) / denom;
  return r;
}

inline double volatility(const std::vector<double>& x) {
  std::vector<double> d;
  for (std::size_t t = 1; t < x.size(); ++t) d.push_back(x[t] - x[t - 1]);
  double mean = 0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(d.size());
  double ss = 0;
  for (double v : d) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(d.size() - 1));
}

// ---------------------------------------------------------------------------
// Random graphs

/// Random connected graph: a random spanning tree plus extra links. Weights are
/// either continuous or drawn from {0.25, 0.5, 1} to provoke equal-length paths.
inline Matrix random_connected_graph(std::mt19937_64& rng, std::size_t n, bool discrete) {
  Matrix w = zeros(n);
  std::uniform_real_distribution<double> uw(0.05, 1.0);
  std::uniform_int_distribution<int> pick(0, 2);
  const double levels[] = {0.25, 0.5, 1.0};
  auto weight = [&] { return discrete ? levels[pick(rng)] : uw(rng); };
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t k = 1; k < n; ++k) {
    std::uniform_int_distribution<std::size_t> parent(0, k - 1);
    const auto a = order[k], b = order[parent(rng)];
    w[a][b] = w[b][a] = weight();
  }
  std::bernoulli_distribution extra(0.4);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (w[i][j] == 0.0 && extra(rng)) w[i][j] = w[j][i] = weight();
  return w;
}

}  // namespace oracle
