// idnet: command-line driver for the funded/unfunded co-occurrence network toolkit.
//
// Every command reads a JSON pipeline config (--config). Failures print one JSON
// line on stderr and exit with 2 (input), 3 (numerical) or 4 (I/O).

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "idnet/error.hpp"
#include "idnet/graph_export.hpp"
#include "idnet/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using idnet::CorpusLabel;
using idnet::ErrorKind;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::input:
      return 2;
    case ErrorKind::numerical:
      return 3;
    case ErrorKind::io:
      return 4;
  }
  return 2;
}

int report_error(const std::string& stage, ErrorKind kind, const std::string& message) {
  nlohmann::json line = {
      {"error", {{"stage", stage}, {"kind", std::string(idnet::to_string(kind))}, {"message", message}}}};
  std::cerr << line.dump() << '\n';
  return exit_code(kind);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
  std::optional<std::size_t> override_k;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config, "Pipeline config (JSON)")->required();
  cmd->add_option("--seed", opts.seed, "Louvain seed (overrides config)");
  cmd->add_option("--threads", opts.threads, "Worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", opts.out, "Output directory (overrides config)");
  cmd->add_option("--override-k", opts.override_k, "Force the number of regimes")
      ->check(CLI::PositiveNumber);
}

idnet::PipelineConfig make_config(const CommonOptions& opts) {
  auto config = idnet::load_config(opts.config);
  if (opts.seed) config.louvain_seed = *opts.seed;
  if (opts.threads) config.threads = *opts.threads;
  if (opts.out) config.output_dir = fs::absolute(*opts.out);
  if (opts.override_k) config.override_k = *opts.override_k;
  return config;
}

int run_validate(const idnet::PipelineConfig& config) {
  const auto vocabulary = idnet::load_vocabulary(config.resolve(config.vocabulary));
  idnet::LoadOptions options;
  options.years = config.years;
  options.enforce_invariants = false;
  std::size_t total = 0;
  const std::pair<CorpusLabel, const std::optional<fs::path>*> inputs[] = {
      {CorpusLabel::all, &config.counts_all},
      {CorpusLabel::funded, &config.counts_funded},
      {CorpusLabel::unfunded, &config.counts_unfunded}};
  for (const auto& [label, path] : inputs) {
    if (!*path) continue;
    const auto tensor = idnet::load_counts(config.resolve(**path), vocabulary, label, options);
    const auto violations = idnet::validate_tensor(tensor);
    std::cout << idnet::to_string(label) << ": " << violations.size() << " violation(s)\n";
    for (const auto& v : violations) std::cout << "  " << v.describe(vocabulary) << '\n';
    total += violations.size();
  }
  if (total > 0) {
    throw idnet::InputError(std::to_string(total) + " tensor invariant violation(s)");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interdisciplinarity analysis of funded vs unfunded co-occurrence networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(idnet::kToolVersion));

  CommonOptions opts;
  std::string format = "graphml";
  std::optional<std::string> regime;

  const std::pair<const char*, const char*> commands[] = {
      {"validate", "Check count files against the tensor invariants"},
      {"derive-unfunded", "Write U = A - F as counts_U.csv"},
      {"normalize", "Write cosine weight tensors"},
      {"regimes", "Detect temporal regimes (JSON report + Newick dendrogram)"},
      {"metrics", "Per-regime strength, betweenness, ASPL and modularity"},
      {"contributions", "r_within and volatility per term and regime"},
      {"compare", "Funded vs unfunded scatter, regression and funding status"},
      {"increments", "Top-5% / bottom-50% link increment analysis"},
      {"rank", "Yearly publication, strength and betweenness rankings"},
      {"simulate", "Generate synthetic corpora with planted regimes"},
      {"run", "Full pipeline with report.json"},
      {"export-graph", "Export regime networks as GraphML or DOT"},
  };
  for (const auto& [name, help] : commands) {
    auto* cmd = app.add_subcommand(name, help);
    add_common(cmd, opts);
    if (std::string(name) == "export-graph") {
      cmd->add_option("--format", format, "graphml or dot")->check(CLI::IsMember({"graphml", "dot"}));
      cmd->add_option("--regime", regime, "Only this regime label (e.g. F2)");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("cli", ErrorKind::input, e.what());
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const auto config = make_config(opts);
    if (command == "validate") return run_validate(config);

    if (command == "run") {
      const auto report = idnet::run_pipeline(config, utc_timestamp());
      std::cout << "wrote " << config.resolve(config.output_dir).string() << "/report.json\n";
      for (const auto& w : report.at("warnings")) std::cerr << "warning: " << w.get<std::string>() << '\n';
      return 0;
    }

    idnet::OutputTransaction out(config.resolve(config.output_dir));
    if (command == "simulate") {
      idnet::simulate(config, out);
    } else {
      idnet::Pipeline pipeline(config);
      if (command == "derive-unfunded") pipeline.write_unfunded(out);
      else if (command == "normalize") pipeline.write_weights(out);
      else if (command == "regimes") pipeline.write_regimes(out);
      else if (command == "metrics") pipeline.write_metrics(out);
      else if (command == "contributions") pipeline.write_contributions(out);
      else if (command == "compare") pipeline.write_comparisons(out);
      else if (command == "increments") pipeline.write_increments(out);
      else if (command == "rank") pipeline.write_ranks(out);
      else if (command == "export-graph") {
        pipeline.write_graphs(out, idnet::parse_graph_format(format), regime);
      }
      for (const auto& w : pipeline.warnings()) std::cerr << "warning: " << w << '\n';
    }
    out.commit();
    for (const auto& f : out.files()) {
      std::cout << (config.resolve(config.output_dir) / f).string() << '\n';
    }
    return 0;
  } catch (const idnet::StageError& e) {
    return report_error(e.stage(), e.kind(), e.what());
  } catch (const idnet::Error& e) {
    return report_error(command, e.kind(), e.what());
  } catch (const std::exception& e) {
    return report_error(command, ErrorKind::io, e.what());
  }
}
