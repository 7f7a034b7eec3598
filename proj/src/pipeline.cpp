#include "idnet/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <system_error>

#include "idnet/error.hpp"
#include "idnet/graph_export.hpp"

namespace idnet {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Config

namespace {

void reject_unknown_keys(const json& object, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  if (!object.is_object()) throw InputError(where + " must be a JSON object");
  std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : object.items()) {
    if (!keys.contains(key)) throw InputError("unknown config key '" + where + "." + key + "'");
  }
}

YearRange parse_years(const json& j, const std::string& where) {
  reject_unknown_keys(j, {"start", "end"}, where);
  return YearRange(j.at("start").get<Year>(), j.at("end").get<Year>());
}

IncrementDenominator parse_denominator(const std::string& text) {
  if (text == "nonzero_period1") return IncrementDenominator::nonzero_period1;
  if (text == "all_pairs") return IncrementDenominator::all_pairs;
  throw InputError("unknown increment denominator '" + text + "'");
}

std::string_view to_string(IncrementDenominator d) {
  return d == IncrementDenominator::nonzero_period1 ? "nonzero_period1" : "all_pairs";
}

}  // namespace

fs::path PipelineConfig::resolve(const fs::path& p) const {
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

LouvainOptions PipelineConfig::louvain() const {
  if (!louvain_seed) throw InputError("louvain.seed is required in the config");
  return {*louvain_seed, louvain_restarts, louvain_resolution, threads};
}

PipelineConfig parse_config(const json& doc, const fs::path& base_dir) {
  PipelineConfig config;
  config.base_dir = base_dir;
  try {
    reject_unknown_keys(doc,
                        {"vocabulary", "counts", "years", "clamp_negative", "regimes", "louvain",
                         "dead_band", "increments", "output_dir", "threads", "simulate"},
                        "config");
    if (doc.contains("vocabulary")) config.vocabulary = doc.at("vocabulary").get<std::string>();
    if (doc.contains("counts")) {
      const auto& counts = doc.at("counts");
      reject_unknown_keys(counts, {"A", "F", "U"}, "counts");
      if (counts.contains("A")) config.counts_all = counts.at("A").get<std::string>();
      if (counts.contains("F")) config.counts_funded = counts.at("F").get<std::string>();
      if (counts.contains("U")) config.counts_unfunded = counts.at("U").get<std::string>();
    }
    if (doc.contains("years")) config.years = parse_years(doc.at("years"), "years");
    config.clamp_negative = doc.value("clamp_negative", false);
    if (doc.contains("regimes")) {
      const auto& r = doc.at("regimes");
      reject_unknown_keys(r, {"k_max", "override_k"}, "regimes");
      config.k_max = r.value("k_max", config.k_max);
      if (r.contains("override_k") && !r.at("override_k").is_null()) {
        config.override_k = r.at("override_k").get<std::size_t>();
      }
    }
    if (doc.contains("louvain")) {
      const auto& l = doc.at("louvain");
      reject_unknown_keys(l, {"seed", "restarts", "resolution"}, "louvain");
      if (l.contains("seed")) config.louvain_seed = l.at("seed").get<std::uint64_t>();
      config.louvain_restarts = l.value("restarts", config.louvain_restarts);
      config.louvain_resolution = l.value("resolution", config.louvain_resolution);
    }
    config.dead_band = doc.value("dead_band", config.dead_band);
    if (doc.contains("increments")) {
      const auto& inc = doc.at("increments");
      reject_unknown_keys(inc, {"periods", "denominator"}, "increments");
      if (inc.contains("periods")) {
        for (const auto& p : inc.at("periods")) {
          if (!p.is_array() || p.size() != 2) throw InputError("increment periods are [start, end] pairs");
          config.increment_periods.push_back({p[0].get<Year>(), p[1].get<Year>()});
        }
      }
      if (inc.contains("denominator")) {
        config.increment_denominator = parse_denominator(inc.at("denominator").get<std::string>());
      }
    }
    if (doc.contains("output_dir")) config.output_dir = doc.at("output_dir").get<std::string>();
    config.threads = doc.value("threads", config.threads);
    if (doc.contains("simulate")) {
      const auto& s = doc.at("simulate");
      reject_unknown_keys(s, {"terms", "years", "seed", "F", "U"}, "simulate");
      SimulationConfig sim;
      sim.terms = s.value("terms", sim.terms);
      if (s.contains("years")) sim.years = parse_years(s.at("years"), "simulate.years");
      sim.seed = s.value("seed", sim.seed);
      sim.funded = s.value("F", json::object());
      sim.unfunded = s.value("U", json::object());
      config.simulation = std::move(sim);
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("invalid config: ") + e.what());
  }
  if (!(config.dead_band > 0.0)) throw InputError("dead_band must be positive");
  if (!(config.louvain_resolution > 0.0)) throw InputError("louvain.resolution must be positive");
  if (config.k_max < 3 && !config.override_k) throw InputError("regimes.k_max must be at least 3");
  if (config.override_k && *config.override_k < 1) throw InputError("regimes.override_k must be >= 1");
  if (config.threads < 1) throw InputError("threads must be >= 1");
  return config;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc, fs::absolute(path).parent_path());
}

json config_to_json(const PipelineConfig& c) {
  json doc;
  doc["vocabulary"] = c.vocabulary.generic_string();
  json counts = json::object();
  if (c.counts_all) counts["A"] = c.counts_all->generic_string();
  if (c.counts_funded) counts["F"] = c.counts_funded->generic_string();
  if (c.counts_unfunded) counts["U"] = c.counts_unfunded->generic_string();
  doc["counts"] = counts;
  if (c.years) doc["years"] = {{"start", c.years->start()}, {"end", c.years->end()}};
  doc["clamp_negative"] = c.clamp_negative;
  doc["regimes"] = {{"k_max", c.k_max},
                    {"override_k", c.override_k ? json(*c.override_k) : json(nullptr)}};
  doc["louvain"] = {{"seed", c.louvain_seed ? json(*c.louvain_seed) : json(nullptr)},
                    {"restarts", c.louvain_restarts},
                    {"resolution", c.louvain_resolution}};
  doc["dead_band"] = c.dead_band;
  json periods = json::array();
  for (const auto& p : c.increment_periods) periods.push_back({p.start, p.end});
  doc["increments"] = {{"periods", periods},
                       {"denominator", std::string(to_string(c.increment_denominator))}};
  doc["output_dir"] = c.output_dir.generic_string();
  return doc;
}

// ---------------------------------------------------------------------------
// Output staging

OutputTransaction::OutputTransaction(fs::path output_dir) : output_dir_(std::move(output_dir)) {
  std::error_code ec;
  fs::create_directories(output_dir_, ec);
  if (ec) throw IoError("cannot create output directory '" + output_dir_.string() + "': " + ec.message());
  staging_ = output_dir_ / ".idnet-staging";
  fs::remove_all(staging_, ec);
  fs::create_directories(staging_, ec);
  if (ec) throw IoError("cannot create staging directory '" + staging_.string() + "': " + ec.message());
}

OutputTransaction::~OutputTransaction() {
  std::error_code ec;
  fs::remove_all(staging_, ec);
  if (!committed_ && fs::is_empty(output_dir_, ec) && !ec) fs::remove(output_dir_, ec);
}

void OutputTransaction::write(const fs::path& relative, const std::string& content) {
  if (committed_) throw IoError("output transaction already committed");
  const auto target = staging_ / relative;
  std::error_code ec;
  fs::create_directories(target.parent_path(), ec);
  if (ec) throw IoError("cannot create '" + target.parent_path().string() + "': " + ec.message());
  std::ofstream out(target, std::ios::binary);
  if (!out) throw IoError("cannot open '" + target.string() + "' for writing");
  out << content;
  out.close();
  if (!out) throw IoError("failed writing '" + target.string() + "'");
  if (std::find(files_.begin(), files_.end(), relative) == files_.end()) files_.push_back(relative);
}

void OutputTransaction::commit() {
  for (const auto& rel : files_) {
    const auto target = output_dir_ / rel;
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (!ec) fs::rename(staging_ / rel, target, ec);
    if (ec) throw IoError("cannot move output into '" + target.string() + "': " + ec.message());
  }
  committed_ = true;
}

// ---------------------------------------------------------------------------
// Pipeline stages

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {}

template <typename Fn>
decltype(auto) Pipeline::stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

void Pipeline::load_corpora() {
  if (corpora_loaded_) return;
  stage("ingest", [&] {
    if (config_.vocabulary.empty()) throw InputError("config needs a vocabulary path");
    vocabulary_ = load_vocabulary(config_.resolve(config_.vocabulary));
    if (!config_.counts_funded) throw InputError("config needs counts.F");
    if (!config_.counts_all && !config_.counts_unfunded) {
      throw InputError("config needs counts.A or counts.U");
    }
    LoadOptions options;
    options.years = config_.years;
    auto funded = load_counts(config_.resolve(*config_.counts_funded), *vocabulary_,
                              CorpusLabel::funded, options);
    options.years = funded.years();
    if (config_.counts_all) {
      counts_[CorpusLabel::all] =
          load_counts(config_.resolve(*config_.counts_all), *vocabulary_, CorpusLabel::all, options);
    }
    if (config_.counts_unfunded) {
      counts_[CorpusLabel::unfunded] = load_counts(config_.resolve(*config_.counts_unfunded),
                                                   *vocabulary_, CorpusLabel::unfunded, options);
    }
    counts_[CorpusLabel::funded] = std::move(funded);
  });
  stage("derive-unfunded", [&] {
    const auto& funded = counts_.at(CorpusLabel::funded);
    if (!counts_.contains(CorpusLabel::unfunded)) {
      auto derived = derive_unfunded(counts_.at(CorpusLabel::all), funded, config_.clamp_negative);
      warnings_.insert(warnings_.end(), derived.warnings.begin(), derived.warnings.end());
      counts_[CorpusLabel::unfunded] = std::move(derived.tensor);
    } else if (counts_.contains(CorpusLabel::all)) {
      if (combine_corpora(funded, counts_.at(CorpusLabel::unfunded)) != counts_.at(CorpusLabel::all)) {
        throw InputError("ingested U does not satisfy A = F + U");
      }
    } else {
      counts_[CorpusLabel::all] = combine_corpora(funded, counts_.at(CorpusLabel::unfunded));
    }
    const auto violations = validate_tensor(counts_.at(CorpusLabel::unfunded));
    if (!violations.empty()) {
      throw InputError("unfunded corpus invalid: " + violations.front().describe(*vocabulary_));
    }
  });
  corpora_loaded_ = true;
}

const Vocabulary& Pipeline::vocabulary() {
  load_corpora();
  return *vocabulary_;
}

bool Pipeline::has_corpus(CorpusLabel label) {
  load_corpora();
  return counts_.contains(label);
}

const CountTensor& Pipeline::counts(CorpusLabel label) {
  load_corpora();
  return counts_.at(label);
}

const WeightTensor& Pipeline::weights(CorpusLabel label) {
  if (auto it = weights_.find(label); it != weights_.end()) return it->second;
  const auto& c = counts(label);
  return stage("normalize", [&]() -> const WeightTensor& {
    return weights_[label] = normalize_tensor(c);
  });
}

const CorpusAnalysis& Pipeline::analysis(CorpusLabel label) {
  if (auto it = analyses_.find(label); it != analyses_.end()) return *it->second;
  auto a = std::make_unique<CorpusAnalysis>();
  a->counts = counts(label);
  a->weights = weights(label);
  stage("regimes", [&] {
    RegimeDetectionOptions options;
    options.k_max = config_.k_max;
    options.override_k = config_.override_k;
    options.threads = config_.threads;
    a->detection = detect_regimes(a->weights, options);
    for (const auto& r : a->detection.partition.regimes) {
      a->networks.push_back(average_regime_network(a->weights, r));
    }
  });
  stage("metrics", [&] {
    const auto louvain = config_.louvain();
    const auto n = a->counts.terms();
    for (const auto& net : a->networks) {
      a->metrics.push_back(compute_metric_table(WeightedNetwork(net.weights), louvain));
      std::vector<double> share(n, 0.0);
      double total = 0.0;
      for (Year y = net.start; y <= net.end; ++y) {
        const auto t = a->counts.years().index_of(y);
        for (std::size_t i = 0; i < n; ++i) {
          share[i] += static_cast<double>(a->counts.at(t, i, i));
          total += static_cast<double>(a->counts.at(t, i, i));
        }
      }
      if (total > 0.0) {
        for (auto& s : share) s /= total;
      }
      a->publication_share.push_back(std::move(share));
    }
    a->strength_series = metric_series(a->weights, MetricKind::strength, config_.threads);
    a->betweenness_series = metric_series(a->weights, MetricKind::betweenness, config_.threads);
  });
  return *(analyses_[label] = std::move(a));
}

const std::vector<ContributionRecord>& Pipeline::contributions() {
  if (contributions_) return *contributions_;
  std::vector<ContributionRecord> all;
  for (auto label : {CorpusLabel::funded, CorpusLabel::unfunded}) {
    const auto& a = analysis(label);
    stage("contributions", [&] {
      for (const auto& regime : a.detection.partition.regimes) {
        if (regime.length() < 3) {
          warnings_.push_back("contributions skipped for " + regime.label +
                              ": regime shorter than 3 years");
          continue;
        }
        for (auto kind : {MetricKind::strength, MetricKind::betweenness}) {
          const auto& series = kind == MetricKind::strength ? a.strength_series : a.betweenness_series;
          try {
            auto records = contribution_table(series, a.weights.years, a.weights.vocabulary, regime, kind);
            all.insert(all.end(), records.begin(), records.end());
          } catch (const NumericalError& e) {
            warnings_.push_back("contributions skipped for " + regime.label + " " +
                                std::string(to_string(kind)) + ": " + e.what());
          }
        }
      }
    });
  }
  return *(contributions_ = std::move(all));
}

const std::vector<ComparisonResult>& Pipeline::comparisons() {
  if (comparisons_) return *comparisons_;
  const auto& funded = analysis(CorpusLabel::funded);
  const auto& unfunded = analysis(CorpusLabel::unfunded);
  std::vector<ComparisonResult> out;
  stage("compare", [&] {
    for (const auto* a : {&funded, &unfunded}) {
      for (const auto& regime : a->detection.partition.regimes) {
        if (regime.length() < 2) {
          warnings_.push_back("comparison skipped for " + regime.label + ": single-year regime");
          continue;
        }
        ComparisonResult c;
        c.partition = a->weights.label;
        c.regime = regime;
        c.stats = pair_regime_stats(funded.weights, unfunded.weights, regime);
        c.regression = fit_funding_regression(c.stats);
        c.classes = classify_funding_status(c.stats, c.regression, config_.dead_band);
        out.push_back(std::move(c));
      }
    }
  });
  return *(comparisons_ = std::move(out));
}

const std::vector<IncrementReport>& Pipeline::increments() {
  if (increments_) return *increments_;
  std::vector<Period> periods = config_.increment_periods;
  if (periods.empty()) {
    for (const auto& r : analysis(CorpusLabel::funded).detection.partition.regimes) {
      periods.push_back({r.start, r.end});
    }
  }
  std::vector<IncrementReport> out;
  stage("increments", [&] {
    for (std::size_t p = 0; p + 1 < periods.size(); ++p) {
      for (auto label : {CorpusLabel::funded, CorpusLabel::unfunded}) {
        for (auto group : {IncrementGroup::top5, IncrementGroup::bottom50}) {
          out.push_back(link_increment_analysis(weights(label), periods[p], periods[p + 1], group,
                                                config_.increment_denominator));
        }
      }
    }
  });
  return *(increments_ = std::move(out));
}

// ---------------------------------------------------------------------------
// Writers

namespace {

std::string label_text(CorpusLabel label) { return std::string(to_string(label)); }


}  // namespace

void Pipeline::write_unfunded(OutputTransaction& out) {
  const auto& u = counts(CorpusLabel::unfunded);
  stage("write", [&] { out.write("counts_U.csv", format_counts(u)); });
}

void Pipeline::write_weights(OutputTransaction& out) {
  for (auto label : {CorpusLabel::all, CorpusLabel::funded, CorpusLabel::unfunded}) {
    if (!has_corpus(label)) continue;
    const auto& w = weights(label);
    stage("write", [&] { out.write("weights_" + label_text(label) + ".csv", format_weights(w)); });
  }
}

void Pipeline::write_regimes(OutputTransaction& out) {
  for (auto label : {CorpusLabel::all, CorpusLabel::funded, CorpusLabel::unfunded}) {
    if (!has_corpus(label)) continue;
    const auto& a = analysis(label);
    stage("write", [&] {
      out.write("regimes_" + label_text(label) + ".json", format_regime_report(a.detection, label));
      out.write("dendrogram_" + label_text(label) + ".nwk",
                to_newick(a.detection.dendrogram, a.weights.years) + "\n");
    });
  }
}

void Pipeline::write_metrics(OutputTransaction& out) {
  for (auto label : {CorpusLabel::funded, CorpusLabel::unfunded}) {
    const auto& a = analysis(label);
    stage("write", [&] {
      for (std::size_t r = 0; r < a.networks.size(); ++r) {
        const auto& name = a.networks[r].label;
        out.write("metrics/" + name + ".csv", format_metric_table(a.metrics[r], a.weights.vocabulary));
        out.write("metrics/" + name + ".json", format_metric_summary(a.metrics[r]));
      }
    });
  }
}

void Pipeline::write_graphs(OutputTransaction& out, GraphFormat format,
                            const std::optional<std::string>& only_regime) {
  bool found = false;
  for (auto label : {CorpusLabel::funded, CorpusLabel::unfunded}) {
    const auto& a = analysis(label);
    stage("export-graph", [&] {
      for (std::size_t r = 0; r < a.networks.size(); ++r) {
        const auto& name = a.networks[r].label;
        if (only_regime && *only_regime != name) continue;
        found = true;
        const WeightedNetwork net(a.networks[r].weights);
        const GraphExport g{net, a.weights.vocabulary, a.metrics[r].communities,
                            a.publication_share[r]};
        if (format == GraphFormat::graphml) {
          out.write("graphs/" + name + ".graphml", format_graphml(g));
        } else {
          out.write("graphs/" + name + ".dot", format_dot(g));
        }
      }
    });
  }
  if (only_regime && !found) {
    throw StageError("export-graph", InputError("no regime labelled '" + *only_regime + "'"));
  }
}

void Pipeline::write_contributions(OutputTransaction& out) {
  const auto& records = contributions();
  stage("write", [&] { out.write("contributions.csv", format_contributions(records)); });
}

void Pipeline::write_comparisons(OutputTransaction& out) {
  const auto& results = comparisons();
  const auto& vocab = vocabulary();
  stage("write", [&] {
    json summary = json::array();
    for (const auto& c : results) {
      out.write("scatter/" + c.regime.label + ".csv", format_scatter(c.stats, c.classes, vocab));
      std::size_t over = 0, under = 0, on = 0;
      for (const auto& k : c.classes) {
        if (k.status == FundingStatus::overfunded) ++over;
        else if (k.status == FundingStatus::underfunded) ++under;
        else ++on;
      }
      summary.push_back({{"partition", label_text(c.partition)},
                         {"regime", c.regime.label},
                         {"start", c.regime.start},
                         {"end", c.regime.end},
                         {"n_pairs", c.regression.n_pairs},
                         {"slope", c.regression.slope},
                         {"intercept", c.regression.intercept},
                         {"slope_se", c.regression.slope_se},
                         {"r_squared", c.regression.r_squared},
                         {"overfunded", over},
                         {"underfunded", under},
                         {"on_line", on}});
    }
    out.write("regression.json", summary.dump(2) + "\n");
  });
}

void Pipeline::write_increments(OutputTransaction& out) {
  const auto& reports = increments();
  const auto& vocab = vocabulary();
  stage("write", [&] {
    for (auto group : {IncrementGroup::top5, IncrementGroup::bottom50}) {
      std::string text;
      for (const auto& r : reports) {
        if (r.group != group) continue;
        auto body = format_increment_report(r, vocab);
        if (!text.empty()) body.erase(0, body.find('\n') + 1);
        text += body;
      }
      if (text.empty()) {
        IncrementReport empty;
        empty.group = group;
        text = format_increment_report(empty, vocab);
      }
      out.write("increments_" + std::string(to_string(group)) + ".csv", text);
    }
  });
}

void Pipeline::write_ranks(OutputTransaction& out) {
  for (auto label : {CorpusLabel::funded, CorpusLabel::unfunded}) {
    const auto& a = analysis(label);
    stage("rank", [&] {
      // One block per metric, each ordered by year then rank.
      std::string text = format_rank_series(metric_rank_series(a.counts));
      for (const auto* series : {&a.strength_series, &a.betweenness_series}) {
        const auto kind = series == &a.strength_series ? MetricKind::strength : MetricKind::betweenness;
        const auto body =
            format_rank_series(rank_series(*series, a.weights.years, a.weights.vocabulary, kind));
        text += body.substr(body.find('\n') + 1);
      }
      out.write("ranks_" + label_text(label) + ".csv", text);
    });
  }
}

json Pipeline::run(OutputTransaction& out, const std::string& timestamp) {
  write_unfunded(out);
  write_weights(out);
  write_regimes(out);
  write_metrics(out);
  write_graphs(out, GraphFormat::graphml);
  write_graphs(out, GraphFormat::dot);
  write_contributions(out);
  write_comparisons(out);
  write_increments(out);
  write_ranks(out);

  json report;
  report["tool"] = kToolName;
  report["version"] = kToolVersion;
  report["generated_at"] = timestamp;
  report["seed"] = config_.louvain_seed ? json(*config_.louvain_seed) : json(nullptr);
  report["config"] = config_to_json(config_);

  json corpora = json::object();
  for (auto label : {CorpusLabel::all, CorpusLabel::funded, CorpusLabel::unfunded}) {
    if (!has_corpus(label)) continue;
    const auto& a = analysis(label);
    json entry;
    auto detection = json::parse(format_regime_report(a.detection, label));
    detection.erase("corpus");
    entry["regime_detection"] = detection;
    if (label != CorpusLabel::all) {
      json networks = json::array();
      for (std::size_t r = 0; r < a.networks.size(); ++r) {
        const auto& m = a.metrics[r];
        networks.push_back({{"regime", a.networks[r].label},
                            {"start", a.networks[r].start},
                            {"end", a.networks[r].end},
                            {"mean_strength", m.mean_strength},
                            {"aspl", m.aspl},
                            {"unreachable_pairs", m.unreachable_pairs},
                            {"modularity", m.modularity},
                            {"n_communities", m.communities.communities()},
                            {"communities", m.communities.membership()}});
      }
      entry["regime_metrics"] = networks;
    }
    corpora[label_text(label)] = entry;
  }
  report["corpora"] = corpora;

  json contrib = json::array();
  for (const auto& r : contributions()) {
    contrib.push_back({{"term", r.term}, {"metric", std::string(to_string(r.metric))},
                       {"regime", r.regime}, {"r_within", r.r_within}, {"volatility", r.volatility}});
  }
  report["contributions"] = contrib;

  json comparison = json::array();
  for (const auto& c : comparisons()) {
    comparison.push_back({{"partition", label_text(c.partition)},
                          {"regime", c.regime.label},
                          {"slope", c.regression.slope},
                          {"intercept", c.regression.intercept},
                          {"slope_se", c.regression.slope_se},
                          {"r_squared", c.regression.r_squared},
                          {"n_pairs", c.regression.n_pairs}});
  }
  report["comparison"] = comparison;

  json inc = json::array();
  for (const auto& r : increments()) {
    inc.push_back({{"corpus", label_text(r.corpus)},
                   {"group", std::string(to_string(r.group))},
                   {"period1", {r.period1.start, r.period1.end}},
                   {"period2", {r.period2.start, r.period2.end}},
                   {"nonzero_links", r.nonzero_links},
                   {"mean_abs_change", r.mean_abs_change},
                   {"group_size", r.links.size()},
                   {"group_mean", r.group_mean}});
  }
  report["increments"] = inc;
  report["warnings"] = warnings_;

  stage("write", [&] { out.write("report.json", report.dump(2) + "\n"); });
  return report;
}

json run_pipeline(const PipelineConfig& config, const std::string& timestamp) {
  Pipeline pipeline(config);
  OutputTransaction out(config.resolve(config.output_dir));
  auto report = pipeline.run(out, timestamp);
  out.commit();
  return report;
}

// ---------------------------------------------------------------------------
// Simulation

GeneratorSpec generator_spec_from_json(const json& block, CorpusLabel label,
                                       const Vocabulary& vocabulary, const YearRange& years,
                                       std::uint64_t seed) {
  GeneratorSpec spec;
  try {
    reject_unknown_keys(block,
                        {"cuts", "communities", "rho_in", "rho_out", "regime_correlations",
                         "lambda", "growth", "seed"},
                        std::string("simulate.") + std::string(to_string(label)));
    spec.label = label;
    spec.vocabulary = vocabulary;
    spec.years = years;
    spec.seed = block.value("seed", seed);
    spec.cuts = block.value("cuts", std::vector<Year>{});
    spec.rho_in = block.value("rho_in", spec.rho_in);
    spec.rho_out = block.value("rho_out", spec.rho_out);
    if (block.contains("regime_correlations")) {
      for (const auto& rc : block.at("regime_correlations")) {
        spec.regime_correlations.push_back({rc.at("rho_in").get<double>(), rc.at("rho_out").get<double>()});
      }
    }
    const auto n = vocabulary.size();
    const auto regimes = spec.cuts.size() + 1;
    // Derived streams keep community and intensity draws independent of the count draws.
    std::mt19937_64 setup_rng(spec.seed ^ 0x5bd1e995ULL);

    const json communities = block.value("communities", json{{"round_robin", 4}});
    if (communities.is_array()) {
      spec.communities = communities.get<std::vector<std::vector<std::size_t>>>();
    } else if (communities.contains("random")) {
      const auto k = communities.at("random").get<std::size_t>();
      if (k < 1) throw InputError("random community count must be >= 1");
      std::uniform_int_distribution<std::size_t> pick(0, k - 1);
      for (std::size_t r = 0; r < regimes; ++r) {
        std::vector<std::size_t> c(n);
        for (auto& x : c) x = pick(setup_rng);
        spec.communities.push_back(std::move(c));
      }
    } else if (communities.contains("round_robin")) {
      spec.communities =
          round_robin_communities(n, communities.at("round_robin").get<std::size_t>(), regimes);
    } else {
      throw InputError("communities must be an array, {\"random\": k} or {\"round_robin\": k}");
    }

    const json lambda = block.value("lambda", json(2000.0));
    std::vector<double> base(n);
    if (lambda.is_number()) {
      std::fill(base.begin(), base.end(), lambda.get<double>());
    } else {
      const double lo = lambda.at("min").get<double>();
      const double hi = lambda.at("max").get<double>();
      if (!(lo > 0.0 && hi >= lo)) throw InputError("lambda range needs 0 < min <= max");
      std::uniform_real_distribution<double> draw(lo, hi);
      for (auto& b : base) b = draw(setup_rng);
    }
    const double growth = block.value("growth", 1.0);
    spec.intensity.assign(years.slices(), std::vector<double>(n));
    double factor = 1.0;
    for (std::size_t t = 0; t < years.slices(); ++t) {
      for (std::size_t i = 0; i < n; ++i) spec.intensity[t][i] = base[i] * factor;
      factor *= growth;
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("invalid simulation block: ") + e.what());
  }
  validate_spec(spec);
  return spec;
}

json simulate(const PipelineConfig& config, OutputTransaction& out) {
  if (!config.simulation) {
    throw StageError("simulate", InputError("config has no 'simulate' block"));
  }
  const auto& sim = *config.simulation;
  json truth;
  try {
    const auto vocabulary = numbered_vocabulary(sim.terms);
    const auto f_spec = generator_spec_from_json(sim.funded, CorpusLabel::funded, vocabulary,
                                                 sim.years, sim.seed);
    const auto u_spec = generator_spec_from_json(sim.unfunded, CorpusLabel::unfunded, vocabulary,
                                                 sim.years, sim.seed + 1);
    const auto funded = generate_tensor(f_spec);
    const auto unfunded = generate_tensor(u_spec);
    auto all = combine_corpora(funded.tensor, unfunded.tensor);

    std::string vocab_text;
    for (const auto& t : vocabulary.terms()) vocab_text += t + "\n";
    out.write("vocabulary.txt", vocab_text);
    out.write("counts_F.csv", format_counts(funded.tensor));
    out.write("counts_U.csv", format_counts(unfunded.tensor));
    out.write("counts_A.csv", format_counts(all));

    for (const auto* g : {&funded, &unfunded}) {
      json regimes = json::array();
      for (std::size_t r = 0; r < g->truth.partition.regimes.size(); ++r) {
        const auto& reg = g->truth.partition.regimes[r];
        regimes.push_back({{"label", reg.label},
                           {"start", reg.start},
                           {"end", reg.end},
                           {"communities", g->truth.communities[r].membership()}});
      }
      truth[label_text(g->tensor.label())] = regimes;
    }
    out.write("truth.json", truth.dump(2) + "\n");

    json pipeline = {{"vocabulary", "vocabulary.txt"},
                     {"counts", {{"A", "counts_A.csv"}, {"F", "counts_F.csv"}}},
                     {"years", {{"start", sim.years.start()}, {"end", sim.years.end()}}},
                     {"louvain", {{"seed", config.louvain_seed.value_or(sim.seed)},
                                  {"restarts", config.louvain_restarts}}},
                     {"output_dir", "out"}};
    out.write("pipeline.json", pipeline.dump(2) + "\n");
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError("simulate", e);
  }
  return truth;
}

}  // namespace idnet
