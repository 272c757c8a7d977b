#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "tlr/runtime/run_log.hpp"

namespace tlr {

class StatsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolveStats {
  int worker = -1;
  std::uint64_t count = 0;
  double mean_ms = 0.0;
  double max_ms = 0.0;
};

/// Publish-interval statistics in milliseconds. Percentiles are nearest-rank
/// on the sorted intervals; std is the population standard deviation.
struct IntervalStats {
  std::uint64_t publishes = 0;
  std::uint64_t count = 0;  // intervals
  double mean_ms = 0.0;
  double std_ms = 0.0;
  double min_ms = 0.0;
  double max_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double p99_ms = 0.0;
  std::uint64_t gate_discards = 0;
  std::uint64_t stale_discards = 0;
  std::vector<SolveStats> solve;  // per worker, over every completed solve
};

/// Intervals between consecutive published records, in nanoseconds.
std::vector<Nanos> publish_intervals(const std::vector<RunRecord>& records);

/// Throws StatsError when fewer than 2 publishes are present.
IntervalStats compute_interval_stats(const std::vector<RunRecord>& records);

/// Pools several runs: intervals never span two runs.
IntervalStats compute_interval_stats(std::span<const std::vector<RunRecord>> runs);

/// Nearest-rank percentile of sorted data, p in (0, 100].
Nanos nearest_rank(const std::vector<Nanos>& sorted, double p);

}  // namespace tlr
