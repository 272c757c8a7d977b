#pragma once

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tlr/bench/stats.hpp"
#include "tlr/runtime/system.hpp"

namespace tlr {

class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sweep over worker counts. `run` holds everything else shared by the
/// cells; its seed is the seed base and its workers field is ignored.
struct ExperimentConfig {
  RunConfig run;
  std::vector<int> workers{1, 2, 3};
  int repetitions = 1;
  std::string out_dir = "results";

  /// Throws ConfigError.
  void validate() const;
  /// Configuration of one cell; the seed is seed base + repetition.
  RunConfig cell(int workers, int repetition) const;
};

/// Accepts every run configuration key plus `workers` (a list or a single
/// count), `repetitions` and `out_dir`.
ExperimentConfig parse_experiment_config(const std::string& yaml_text, const std::string& source = "<string>",
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct ExperimentCell {
  int workers = 0;
  int repetition = 0;
  RunLog log;
  IntervalStats stats;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ExperimentCell> cells;  // worker-count major, then repetition
};

/// Runs the cells one after another. `progress` is called after each cell.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::function<void(const ExperimentCell&)>& progress = {});

std::string cell_stem(int workers, int repetition);

/// Writes `runlog_w<W>_r<rep>.csv` and `.json` per cell, `summary.json` keyed
/// by worker count and `intervals_hist.csv`. Refuses a non-empty `dir`
/// unless `force` is set.
void export_results(const ExperimentResult& result, const std::filesystem::path& dir, bool force);

/// Per-worker-count entries of summary.json, recomputed from the run logs
/// found in `dir`.
std::string summary_json(const std::vector<ExperimentCell>& cells);
std::string summary_json_from_dir(const std::filesystem::path& dir);

std::string stats_json(const IntervalStats& stats);

/// `workers,bin_ms,count` rows with 1 ms bins, intervals pooled over
/// repetitions.
std::string interval_histogram_csv(const std::vector<ExperimentCell>& cells);

}  // namespace tlr
