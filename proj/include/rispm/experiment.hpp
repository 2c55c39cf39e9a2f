#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rispm/channel.hpp"

namespace rispm {

inline constexpr const char* kCodeVersion = "rispm 0.1.0";

enum class FigId { kFig2, kFig3, kFig4, kFig5, kFig6, kFig7 };

FigId fig_from_name(const std::string& name);
std::string fig_name(FigId fig);

/// A complete, reproducible experiment description: scenario, sweep,
/// schemes, trial counts, and the master seed.
struct ExperimentSpec {
  std::string name = "fig3_power_vs_dy";
  ScenarioConfig scenario;
  std::string sweep_param = "dy";
  std::vector<double> sweep_values;
  std::vector<std::string> schemes;        // series tokens, e.g. "rpm_k3"
  std::size_t trials = 200;
  std::size_t noise_samples = 200;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::string csi = "estimated";           // "perfect" or "estimated"
  std::size_t randomization_samples = 100;
  double target_rate = 1.0;                // R for the outage experiments
  std::vector<std::size_t> kbars;          // outage-vs-SNR curves
  std::vector<double> pt_series_dbm;       // rate-vs-kbar power levels
  std::vector<std::size_t> groups_list;    // grouping-ratio comparison
  bool apply_overhead = false;

  FigId fig() const { return fig_from_name(name); }
  void validate() const;
};

/// Scenario-scale defaults for each reproduced figure, at desk-scale trial
/// counts. `full` switches to full-scale counts (1000+ realizations).
ExperimentSpec default_spec(FigId fig, bool full = false);

/// Reads a `key = value` config (or a JSON spec echo) into a spec; unknown
/// keys and invalid values raise descriptive errors carrying the key path.
ExperimentSpec load_config(const std::string& path);
ExperimentSpec spec_from_json_text(const std::string& text);
std::string spec_to_json_text(const ExperimentSpec& spec);

struct Series {
  std::string name;
  std::vector<double> mean;
  std::vector<double> stderr_value;
};

struct ResultTable {
  std::string sweep_param;
  std::vector<double> sweep_values;
  std::vector<Series> series;
  ExperimentSpec spec;
  std::map<std::string, std::string> metadata;
};

/// Runs every sweep value x scheme end to end. Trials use substreams keyed
/// by (sweep index, trial, role), so results are identical for any worker
/// count and removing a scheme never changes another scheme's draws.
ResultTable run_experiment(const ExperimentSpec& spec);

struct OutputPaths {
  std::string csv;
  std::string json;
};

/// One CSV (header + one row per sweep value, 12 significant digits) and one
/// JSON summary (schema_version, spec echo, series, metadata).
OutputPaths write_outputs(const ResultTable& table, const std::string& out_dir);

}  // namespace rispm
