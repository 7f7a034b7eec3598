#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "idnet/corpus.hpp"
#include "idnet/dynamics.hpp"
#include "idnet/error.hpp"
#include "idnet/funding.hpp"
#include "idnet/generator.hpp"
#include "idnet/graph_export.hpp"
#include "idnet/metrics.hpp"
#include "idnet/normalization.hpp"
#include "idnet/regimes.hpp"

namespace idnet {

inline constexpr const char* kToolName = "idnet";
inline constexpr const char* kToolVersion = "1.0.0";

/// Synthetic data recipe for the `simulate` command.
struct SimulationConfig {
  std::size_t terms = 36;
  YearRange years{1995, 2022};
  std::uint64_t seed = 1;
  nlohmann::json funded;
  nlohmann::json unfunded;
};

struct PipelineConfig {
  /// Relative paths in the config file resolve against this directory.
  std::filesystem::path base_dir;

  std::filesystem::path vocabulary;
  std::optional<std::filesystem::path> counts_all;
  std::optional<std::filesystem::path> counts_funded;
  std::optional<std::filesystem::path> counts_unfunded;
  std::optional<YearRange> years;
  bool clamp_negative = false;

  std::size_t k_max = 10;
  std::optional<std::size_t> override_k;

  std::optional<std::uint64_t> louvain_seed;
  std::size_t louvain_restarts = 10;
  double louvain_resolution = 1.0;

  double dead_band = kDefaultDeadBand;
  /// Consecutive periods for the link-increment analysis. Empty means the
  /// detected funded regimes are used.
  std::vector<Period> increment_periods;
  IncrementDenominator increment_denominator = IncrementDenominator::nonzero_period1;

  std::filesystem::path output_dir = "out";
  unsigned threads = 1;

  std::optional<SimulationConfig> simulation;

  std::filesystem::path resolve(const std::filesystem::path& p) const;
  LouvainOptions louvain() const;
};

/// Parses the declarative JSON config. Throws InputError on unknown keys or bad values.
PipelineConfig parse_config(const nlohmann::json& document, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const PipelineConfig& config);

/// An error tagged with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.kind(), cause.what()), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Output files are staged in a hidden directory and moved into place on commit().
/// Destroying an uncommitted transaction removes everything it wrote.
class OutputTransaction {
 public:
  explicit OutputTransaction(std::filesystem::path output_dir);
  ~OutputTransaction();
  OutputTransaction(const OutputTransaction&) = delete;
  OutputTransaction& operator=(const OutputTransaction&) = delete;

  void write(const std::filesystem::path& relative, const std::string& content);
  void commit();
  const std::vector<std::filesystem::path>& files() const noexcept { return files_; }

 private:
  std::filesystem::path output_dir_;
  std::filesystem::path staging_;
  std::vector<std::filesystem::path> files_;
  bool committed_ = false;
};

struct CorpusAnalysis {
  CountTensor counts;
  WeightTensor weights;
  RegimeDetection detection;
  std::vector<RegimeNetwork> networks;
  std::vector<MetricTable> metrics;
  std::vector<std::vector<double>> publication_share;
  NodeSeries strength_series;
  NodeSeries betweenness_series;
};

struct ComparisonResult {
  CorpusLabel partition = CorpusLabel::funded;
  Regime regime;
  std::vector<PairRegimeStat> stats;
  RegressionResult regression;
  std::vector<PairClassification> classes;
};

/// Stage-by-stage driver. Each accessor computes its stage on first use and
/// caches it; failures are rethrown as StageError naming the stage.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  const PipelineConfig& config() const noexcept { return config_; }

  const Vocabulary& vocabulary();
  const CountTensor& counts(CorpusLabel label);
  bool has_corpus(CorpusLabel label);
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  const WeightTensor& weights(CorpusLabel label);
  const CorpusAnalysis& analysis(CorpusLabel label);
  const std::vector<ContributionRecord>& contributions();
  const std::vector<ComparisonResult>& comparisons();
  const std::vector<IncrementReport>& increments();

  /// Writers for each command's outputs.
  void write_unfunded(OutputTransaction& out);
  void write_weights(OutputTransaction& out);
  void write_regimes(OutputTransaction& out);
  void write_metrics(OutputTransaction& out);
  void write_graphs(OutputTransaction& out, GraphFormat format,
                    const std::optional<std::string>& only_regime = std::nullopt);
  void write_contributions(OutputTransaction& out);
  void write_comparisons(OutputTransaction& out);
  void write_increments(OutputTransaction& out);
  void write_ranks(OutputTransaction& out);

  /// Everything above plus report.json. `timestamp` is the only
  /// run-dependent field.
  nlohmann::json run(OutputTransaction& out, const std::string& timestamp);

 private:
  void load_corpora();
  template <typename Fn>
  decltype(auto) stage(const char* name, Fn&& fn);

  PipelineConfig config_;
  std::optional<Vocabulary> vocabulary_;
  std::map<CorpusLabel, CountTensor> counts_;
  std::map<CorpusLabel, WeightTensor> weights_;
  std::map<CorpusLabel, std::unique_ptr<CorpusAnalysis>> analyses_;
  std::optional<std::vector<ContributionRecord>> contributions_;
  std::optional<std::vector<ComparisonResult>> comparisons_;
  std::optional<std::vector<IncrementReport>> increments_;
  std::vector<std::string> warnings_;
  bool corpora_loaded_ = false;
};

/// Builds a generator spec from one corpus block of a simulation config.
GeneratorSpec generator_spec_from_json(const nlohmann::json& block, CorpusLabel label,
                                       const Vocabulary& vocabulary, const YearRange& years,
                                       std::uint64_t seed);

/// Writes vocabulary.txt, counts_F.csv, counts_U.csv, counts_A.csv, truth.json and a
/// ready-to-run pipeline.json into the transaction.
nlohmann::json simulate(const PipelineConfig& config, OutputTransaction& out);

/// Full pipeline into config.output_dir. Returns report.json's document.
nlohmann::json run_pipeline(const PipelineConfig& config, const std::string& timestamp);

}  // namespace idnet
