// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//
// Every instance set is drawn from fixed seeds, so a run is reproducible.

#include <fcntl.h>
#include <spawn.h>
#include <sys/resource.h>
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "idnet/dynamics.hpp"
#include "idnet/funding.hpp"
#include "idnet/generator.hpp"
#include "idnet/metrics.hpp"
#include "idnet/normalization.hpp"
#include "idnet/pipeline.hpp"
#include "idnet/regimes.hpp"
#include "oracles/oracles.hpp"
#include "support.hpp"

extern char** environ;

namespace {

using namespace idnet;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, format, args...);
  return buffer;
}

bool near(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::fabs(a - b) <= tol * std::max(1.0, std::fabs(b));
}

/// The shared instance set of criteria 1 and 2: 100 connected graphs, N = 3..7,
/// every third one with weights from {0.25, 0.5, 1} so equal-length paths occur.
std::vector<oracle::Matrix> small_graphs() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<std::size_t> size(3, 7);
  std::vector<oracle::Matrix> out;
  for (int g = 0; g < 100; ++g) out.push_back(oracle::random_connected_graph(rng, size(rng), g % 3 == 0));
  return out;
}

// ---------------------------------------------------------------------------

Outcome betweenness_oracle() {
  const auto graphs = small_graphs();
  const auto start = Clock::now();
  std::size_t agree = 0;
  double worst = 0.0;
  for (const auto& w : graphs) {
    const auto ours = betweenness(WeightedNetwork(testing::to_matrix(w)));
    const auto ref = oracle::exhaustive_betweenness(w);
    bool ok = true;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double diff = std::fabs(ours[i] - ref[i]);
      worst = std::max(worst, diff);
      ok = ok && diff <= 1e-9;
    }
    agree += ok;
  }
  const double elapsed = seconds_since(start);
  return {agree == graphs.size() && elapsed < 10.0,
          fmt("%zu/100 graphs within 1e-9 (max |diff| %.1e), %.3f s", agree, worst, elapsed)};
}

Outcome shortest_path_oracle() {
  const auto graphs = small_graphs();
  std::size_t agree = 0;
  double worst = 0.0;
  for (const auto& w : graphs) {
    const WeightedNetwork net(testing::to_matrix(w));
    const auto d = shortest_path_lengths(net);
    const auto ref = oracle::relaxation_distances(w);
    bool ok = true;
    for (std::size_t i = 0; i < w.size(); ++i)
      for (std::size_t j = 0; j < w.size(); ++j) {
        ok = ok && near(d(i, j), ref[i][j], 1e-9);
        if (std::isfinite(ref[i][j])) worst = std::max(worst, std::fabs(d(i, j) - ref[i][j]));
      }
    const auto a = aspl(net);
    const auto ra = oracle::relaxation_aspl(w);
    ok = ok && near(a.aspl, ra.aspl, 1e-9) && a.unreachable_pairs == ra.unreachable;
    worst = std::max(worst, std::fabs(a.aspl - ra.aspl));
    agree += ok;
  }
  return {agree == graphs.size(), fmt("%zu/100 graphs, distances and ASPL within 1e-9 (max |diff| %.1e)", agree, worst)};
}

Outcome modularity_louvain() {
  // Two disconnected unit-weight 5-cliques.
  oracle::Matrix w = oracle::zeros(10);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j)
      if (i != j && (i < 5) == (j < 5)) w[i][j] = 1.0;
  const WeightedNetwork cliques(testing::to_matrix(w));
  std::vector<std::size_t> halves(10);
  for (std::size_t i = 0; i < 10; ++i) halves[i] = i < 5 ? 0 : 1;
  const auto found = louvain_communities(cliques, {.seed = 1});
  const bool cliques_ok = std::fabs(found.modularity - 0.5) <= 1e-12 &&
                          std::fabs(modularity(cliques, CommunityAssignment(halves)) - 0.5) <= 1e-12 &&
                          found.communities == CommunityAssignment(halves);

  // Planted 8+8 blocks drawn by the generator.
  std::size_t exact = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GeneratorSpec spec;
    spec.vocabulary = numbered_vocabulary(16);
    spec.years = YearRange(2000, 2000);
    std::vector<std::size_t> blocks(16);
    for (std::size_t i = 0; i < 16; ++i) blocks[i] = i < 8 ? 0 : 1;
    spec.communities = {blocks};
    spec.intensity = constant_intensity(16, 1, 1000.0);
    spec.rho_in = 0.8;
    spec.rho_out = 0.05;
    spec.seed = seed;
    const auto weights = normalize_tensor(generate_tensor(spec).tensor);
    const auto r = louvain_communities(WeightedNetwork(weights.slices[0].weights), {.seed = seed});
    exact += adjusted_rand_index(r.communities, CommunityAssignment(blocks)) == 1.0;
  }
  return {cliques_ok && exact >= 19,
          fmt("two cliques Q = %.15f, components %s; planted blocks ARI = 1 in %zu/20", found.modularity,
              found.communities == CommunityAssignment(halves) ? "recovered" : "NOT recovered", exact)};
}

Outcome upgma_reference() {
  std::mt19937_64 rng(77001);
  std::uniform_int_distribution<std::size_t> size(2, 8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> small(1, 4);
  std::size_t identical = 0;
  for (int c = 0; c < 100; ++c) {
    const auto n = size(rng);
    SquareMatrix<double> d(n);
    if (c % 4 == 3) {  // integer distances with exact ties
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d(i, j) = d(j, i) = small(rng);
    } else if (c % 4 == 2) {  // Euclidean distances between random points
      std::vector<std::vector<double>> pts(n, std::vector<double>(4));
      for (auto& p : pts)
        for (auto& x : p) x = u(rng);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          double s = 0;
          for (std::size_t k = 0; k < 4; ++k) s += (pts[i][k] - pts[j][k]) * (pts[i][k] - pts[j][k]);
          d(i, j) = std::sqrt(s);
        }
    } else {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d(i, j) = d(j, i) = 10.0 * u(rng);
    }
    const auto ours = upgma_cluster(d);
    const auto ref = oracle::brute_force_upgma(testing::to_rows(d));
    bool same = ours.merges.size() == ref.size();
    for (std::size_t s = 0; same && s < ref.size(); ++s) {
      const auto& m = ours.merges[s];
      same = m.cluster_a == ref[s].a && m.cluster_b == ref[s].b && m.size == ref[s].size &&
             oracle::close_rel(m.height, ref[s].height, 1e-12);
    }
    identical += same;
  }
  return {identical == 100, fmt("%zu/100 dendrograms identical (T = 2..8)", identical)};
}

Outcome regime_recovery() {
  const std::size_t N = 36;
  const YearRange years(1995, 2022);
  std::size_t recovered = 0;
  double slowest = 0.0;
  for (std::uint64_t run = 0; run < 100; ++run) {
    std::mt19937_64 rng(5000 + run);
    // Three regimes of at least five years with random boundaries.
    std::uniform_int_distribution<Year> first(1999, 2008);
    const Year cut1 = first(rng);
    std::uniform_int_distribution<Year> second(cut1 + 5, 2017);
    const Year cut2 = second(rng);
    GeneratorSpec spec;
    spec.vocabulary = numbered_vocabulary(N);
    spec.years = years;
    spec.cuts = {cut1, cut2};
    std::uniform_int_distribution<std::size_t> community(0, 3);
    for (int r = 0; r < 3; ++r) {
      std::vector<std::size_t> c(N);
      for (auto& x : c) x = community(rng);
      spec.communities.push_back(c);
    }
    std::uniform_real_distribution<double> lambda(1000.0, 3000.0);
    std::vector<double> base(N);
    for (auto& b : base) b = lambda(rng);
    spec.intensity.assign(years.slices(), base);
    spec.rho_in = 0.4;
    spec.rho_out = 0.1;
    spec.seed = run;
    const auto generated = generate_tensor(spec);

    const auto start = Clock::now();
    const auto detection = detect_regimes(normalize_tensor(generated.tensor), {});
    slowest = std::max(slowest, seconds_since(start));

    const auto& want = generated.truth.partition.regimes;
    const auto& got = detection.partition.regimes;
    bool same = want.size() == got.size();
    for (std::size_t r = 0; same && r < want.size(); ++r) same = want[r].start == got[r].start && want[r].end == got[r].end;
    recovered += same;
  }
  return {recovered >= 95 && slowest < 5.0,
          fmt("%zu/100 planted partitions recovered (rho 0.4/0.1, lambda 1e3..3e3), slowest detection %.3f s",
              recovered, slowest)};
}

Outcome normalization_properties() {
  std::mt19937_64 rng(60606);
  std::uniform_int_distribution<std::size_t> size(2, 20);
  std::uniform_int_distribution<Count> k_dist(2, 600);
  const Count caps[] = {5, 1000, 100000};
  std::size_t violations = 0;
  for (int s = 0; s < 1000; ++s) {
    const auto n = size(rng);
    SquareMatrix<Count> c(n);
    std::uniform_int_distribution<Count> occ(0, caps[s % 3]);
    for (std::size_t i = 0; i < n; ++i) c(i, i) = occ(rng);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        std::uniform_int_distribution<Count> co(0, std::min(c(i, i), c(j, j)));
        c(i, j) = c(j, i) = co(rng);
      }
    const Count k = k_dist(rng);
    SquareMatrix<Count> scaled(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) scaled(i, j) = k * c(i, j);
    const auto w = cosine_normalize(c), wk = cosine_normalize(scaled);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double x = w(i, j);
        if (!(x >= 0.0 && x <= 1.0)) ++violations;
        if (x != w(j, i)) ++violations;
        if (i == j && x != 0.0) ++violations;
        const double ulp = std::nextafter(x, 2.0) - x;
        if (std::fabs(wk(i, j) - x) > ulp) ++violations;
      }
  }
  return {violations == 0, fmt("1000 slices: %zu violations of bounds, symmetry, zero diagonal or x k scaling", violations)};
}

Outcome regression_oracle() {
  std::size_t covered = 0, matched = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, 0.5);
    std::normal_distribution<double> noise(0.0, 0.02);
    std::vector<PairRegimeStat> stats;
    std::vector<double> x, y;
    for (std::size_t k = 0; k < 100; ++k) {
      x.push_back(ux(rng));
      y.push_back(0.8 * x.back() + noise(rng));
      stats.push_back({0, k + 1, y.back(), 0.0, x.back(), 0.0});
    }
    const auto fit = fit_funding_regression(stats);
    const auto ref = oracle::closed_form_ols(x, y);
    covered += std::fabs(fit.slope - 0.8) <= 2.0 * fit.slope_se;
    matched += near(fit.slope, ref.slope, 1e-9) && near(fit.intercept, ref.intercept, 1e-9) &&
               near(fit.r_squared, ref.r_squared, 1e-9);
  }
  return {covered >= 47 && matched == 50,
          fmt("slope within 2 SE of 0.8 in %zu/50; closed form agrees in %zu/50", covered, matched)};
}

Outcome contribution_formulas() {
  bool examples = true;
  const NodeSeries step{{1, 1, 1, 1.5, 2, 2, 2}, {1, 1, 1, 1, 1, 1, 1}};
  const auto r = relative_change_within(step);
  examples = examples && std::fabs(r[0] - 2.0) <= 1e-12 && std::fabs(r[1]) <= 1e-12;
  const double up_down[] = {1, 2, 1, 2}, flat[] = {4, 4, 4, 4}, line[] = {1, 3, 5, 7, 9};
  examples = examples && std::fabs(volatility(up_down) - std::sqrt(4.0 / 3.0)) <= 1e-12;
  examples = examples && std::fabs(volatility(flat)) <= 1e-12 && std::fabs(volatility(line)) <= 1e-12;

  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::uniform_int_distribution<std::size_t> len(4, 14), nodes(2, 36);
  std::size_t agree = 0;
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    const auto T = len(rng), N = nodes(rng);
    NodeSeries series(N, std::vector<double>(T));
    for (auto& row : series)
      for (auto& x : row) x = u(rng);
    const auto ours = relative_change_within(series);
    const auto ref = oracle::r_within(series);
    bool ok = true;
    for (std::size_t i = 0; i < N; ++i) {
      const double rv = std::fabs(ours[i] - ref[i]) / std::max(1.0, std::fabs(ref[i]));
      const double vv = std::fabs(volatility(series[i]) - oracle::volatility(series[i]));
      worst = std::max({worst, rv, vv});
      ok = ok && rv <= 1e-12 && vv <= 1e-12;
    }
    agree += ok;
  }
  return {examples && agree == 100,
          fmt("worked examples %s; %zu/100 random series within 1e-12 (max diff %.1e)",
              examples ? "exact" : "WRONG", agree, worst)};
}

Outcome qualitative_pattern() {
  const std::size_t N = 36;
  const YearRange years(1995, 2022);
  const auto vocab = numbered_vocabulary(N);
  const auto communities = round_robin_communities(N, 4, 3);
  auto make = [&](CorpusLabel label, std::vector<RegimeCorrelation> rho, std::uint64_t seed) {
    GeneratorSpec spec;
    spec.label = label;
    spec.vocabulary = vocab;
    spec.years = years;
    spec.cuts = {2007, 2015};
    spec.communities = communities;
    spec.intensity = constant_intensity(N, years.slices(), 2000.0);
    spec.regime_correlations = std::move(rho);
    spec.seed = seed;
    return generate_tensor(spec).tensor;
  };
  // F: within-community links strengthen. U: between-community links strengthen.
  const auto F = make(CorpusLabel::funded, {{0.30, 0.05}, {0.45, 0.05}, {0.60, 0.05}}, 11);
  const auto U = make(CorpusLabel::unfunded, {{0.40, 0.05}, {0.40, 0.15}, {0.40, 0.25}}, 12);

  testing::TempDir dir;
  save_vocabulary(vocab, dir / "vocabulary.txt");
  save_counts(F, dir / "counts_F.csv");
  save_counts(U, dir / "counts_U.csv");
  PipelineConfig config;
  config.base_dir = dir.path();
  config.vocabulary = "vocabulary.txt";
  config.counts_funded = "counts_F.csv";
  config.counts_unfunded = "counts_U.csv";
  config.override_k = 3;
  config.louvain_seed = 2;
  Pipeline pipeline(config);

  std::string detail;
  bool pass = true;
  for (auto label : {CorpusLabel::funded, CorpusLabel::unfunded}) {
    const auto& a = pipeline.analysis(label);
    const auto& regimes = a.detection.partition.regimes;
    const bool planted = regimes.size() == 3 && regimes[0].end == 2007 && regimes[1].end == 2015;
    bool q_up = true, q_down = true, s_up = true, l_down = true;
    std::string values;
    for (std::size_t r = 0; r < a.metrics.size(); ++r) {
      const auto& m = a.metrics[r];
      values += fmt("%s%s Q=%.3f s=%.2f L=%.2f", r ? ", " : "", regimes[r].label.c_str(), m.modularity,
                    m.mean_strength, m.aspl);
      if (r == 0) continue;
      const auto& p = a.metrics[r - 1];
      q_up = q_up && m.modularity > p.modularity;
      q_down = q_down && m.modularity < p.modularity;
      s_up = s_up && m.mean_strength > p.mean_strength;
      l_down = l_down && m.aspl < p.aspl;
    }
    const bool q_ok = label == CorpusLabel::funded ? q_up : q_down;
    pass = pass && planted && q_ok && s_up && l_down;
    detail += std::string(detail.empty() ? "" : "; ") + values;
  }
  return {pass, detail};
}

struct ChildRun {
  int code = -1;
  double seconds = 0.0;
  double peak_mb = 0.0;
};

ChildRun run_child(const std::vector<std::string>& args) {
  std::vector<char*> argv;
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  const auto start = Clock::now();
  pid_t pid = 0;
  ChildRun out;
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 1, "/dev/null", O_WRONLY, 0);
  const int spawned = posix_spawn(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (spawned != 0) return out;
  int status = 0;
  rusage usage{};
  wait4(pid, &status, 0, &usage);
  out.seconds = seconds_since(start);
  out.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  out.peak_mb = static_cast<double>(usage.ru_maxrss) / 1024.0;  // kilobytes on Linux
  return out;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    auto text = testing::read_file(e.path());
    if (e.path().filename() == "report.json") {
      auto doc = nlohmann::json::parse(text);
      doc.erase("generated_at");
      text = doc.dump(2);
    }
    files[fs::relative(e.path(), root).generic_string()] = std::move(text);
  }
  return files;
}

Outcome end_to_end() {
  testing::TempDir dir;
  const nlohmann::json corpus = {{"cuts", {2007, 2015}}, {"communities", {{"random", 4}}}, {"rho_in", 0.5},
                                 {"rho_out", 0.1},       {"lambda", {{"min", 1000}, {"max", 5000}}}, {"growth", 1.03}};
  const nlohmann::json sim = {{"simulate", {{"terms", 36}, {"years", {{"start", 1995}, {"end", 2022}}}, {"seed", 2022},
                                            {"F", corpus}, {"U", corpus}}},
                              {"louvain", {{"seed", 7}}},
                              {"output_dir", "data"}};
  testing::write_file(dir / "sim.json", sim.dump());
  const auto simulated = run_child({IDNET_CLI_PATH, "simulate", "--config", (dir / "sim.json").string()});
  if (simulated.code != 0) return {false, "simulate failed"};

  const auto config = (dir / "data/pipeline.json").string();
  const auto first = run_child({IDNET_CLI_PATH, "run", "--config", config});
  if (first.code != 0) return {false, fmt("first run exited %d", first.code)};
  const auto before = snapshot(dir / "data/out");
  const auto second = run_child({IDNET_CLI_PATH, "run", "--config", config});
  if (second.code != 0) return {false, fmt("second run exited %d", second.code)};
  const auto after = snapshot(dir / "data/out");

  std::size_t differing = before.size() == after.size() ? 0 : 1;
  for (const auto& [name, text] : before) {
    const auto it = after.find(name);
    if (it == after.end() || it->second != text) ++differing;
  }
  const double seconds = std::max(first.seconds, second.seconds);
  const double mb = std::max(first.peak_mb, second.peak_mb);
  return {seconds < 10.0 && mb < 200.0 && differing == 0 && !before.empty(),
          fmt("36x36x28 pair: %.2f s, peak %.1f MB; %zu files, %zu differ beyond generated_at", seconds, mb,
              before.size(), differing)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"betweenness oracle equivalence", betweenness_oracle},
      {"shortest-path/ASPL oracle equivalence", shortest_path_oracle},
      {"modularity and Louvain recovery", modularity_louvain},
      {"UPGMA reference equivalence", upgma_reference},
      {"regime recovery", regime_recovery},
      {"normalization properties", normalization_properties},
      {"regression oracle", regression_oracle},
      {"contribution formulas", contribution_formulas},
      {"qualitative funded/unfunded pattern", qualitative_pattern},
      {"end-to-end determinism and performance", end_to_end},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s  %2d  %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", index - failures, index);
  return failures == 0 ? 0 : 1;
}
