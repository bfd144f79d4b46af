#pragma once

#include "liftcalc/checker.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lifts::cli {

enum class Task { Check, Witness, Optimize, Taylor, SlpEvidence };

const char* task_name(Task t);
Task parse_task(const std::string& s);

struct PointSpec {
  enum class Kind { Regime, Coords, Random };
  Kind kind = Kind::Random;
  std::string regime;
  Vec coords;
};

/// Downstairs cost used by the optimize and taylor tasks.
struct CostSpec {
  enum class Kind { RandomConvex, QuadraticQuartic, Linear };
  Kind kind = Kind::RandomConvex;
  double quartic = 0.0;  // QuadraticQuartic: weight of ||x||^4 / 4
  Vec w;                 // Linear
};

struct ExperimentConfig {
  std::string entry;
  Json params = Json::object();
  PointSpec point;
  std::vector<Task> tasks;
  int trials = 1;
  std::uint64_t seed = 0;
  std::string output;
  CostSpec cost;

  /// Normalized form written into reports.
  Json to_json() const;
};

/// Parses and validates one experiment; throws Error(InvalidInput) on unknown keys, entries, regimes or tasks.
ExperimentConfig parse_experiment(const Json& j);
EntryParams entry_params(const std::string& entry, const Json& params);

struct RunOptions {
  int threads = 0;  // 0: hardware concurrency
};

/// Report of one experiment: config echo, one record per trial, summary. Deterministic given the config.
Json run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {});

/// The acceptance matrix run by `suite`.
std::vector<ExperimentConfig> default_suite(std::uint64_t seed);
Json run_suite(const std::vector<ExperimentConfig>& experiments, std::uint64_t seed, const RunOptions& opt = {});

/// Exit-code contract: every expected verdict matched and every witness verified.
bool report_ok(const Json& report);

enum class PlotKind { Taylor, Trace };
/// CSV rows trial,t,residual1,residual2 (Taylor) or trial,iter,gradnorm,mineig (Trace); throws Error(NoData).
std::string emit_plot_data(const Json& report, PlotKind kind);

}  // namespace lifts::cli
