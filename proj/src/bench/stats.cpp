#include "tlr/bench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace tlr {

namespace {

__extension__ typedef __int128 Wide;

double to_ms(long double ns) { return static_cast<double>(ns / 1e6L); }

}  // namespace

std::vector<Nanos> publish_intervals(const std::vector<RunRecord>& records) {
  std::vector<Nanos> out;
  bool have = false;
  Nanos last = 0;
  for (const auto& r : records) {
    if (r.flag != RecordFlag::Published) continue;
    if (have) out.push_back(r.publish_wall_ns - last);
    last = r.publish_wall_ns;
    have = true;
  }
  return out;
}

Nanos nearest_rank(const std::vector<Nanos>& sorted, double p) {
  if (sorted.empty()) throw StatsError("percentile of empty data");
  if (!(p > 0.0 && p <= 100.0)) throw StatsError("percentile must be in (0, 100]");
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

IntervalStats compute_interval_stats(const std::vector<RunRecord>& records) {
  return compute_interval_stats(std::span<const std::vector<RunRecord>>(&records, 1));
}

IntervalStats compute_interval_stats(std::span<const std::vector<RunRecord>> runs) {
  IntervalStats s;
  std::vector<Nanos> intervals;
  struct Acc {
    std::uint64_t n = 0;
    Wide sum = 0;
    Nanos max = 0;
  };
  std::map<int, Acc> solves;
  for (const auto& records : runs) {
    const auto iv = publish_intervals(records);
    intervals.insert(intervals.end(), iv.begin(), iv.end());
    for (const auto& r : records) {
      switch (r.flag) {
        case RecordFlag::Published:
          ++s.publishes;
          break;
        case RecordFlag::GateDiscard:
          ++s.gate_discards;
          continue;
        case RecordFlag::StaleDiscard:
          ++s.stale_discards;
          break;
      }
      Acc& a = solves[r.worker_id];
      ++a.n;
      a.sum += r.solve_ns;
      a.max = std::max(a.max, r.solve_ns);
    }
  }
  if (intervals.empty()) {
    throw StatsError("need at least 2 publishes, got " + std::to_string(s.publishes));
  }

  s.count = intervals.size();
  const auto n = static_cast<Wide>(intervals.size());
  Wide sum = 0, sumsq = 0;
  for (Nanos v : intervals) {
    sum += v;
    sumsq += static_cast<Wide>(v) * v;
  }
  const Wide var_num = n * sumsq - sum * sum;
  s.mean_ms = to_ms(static_cast<long double>(sum) / static_cast<long double>(n));
  s.std_ms = to_ms(std::sqrt(static_cast<long double>(var_num)) / static_cast<long double>(n));

  std::sort(intervals.begin(), intervals.end());
  s.min_ms = to_ms(intervals.front());
  s.max_ms = to_ms(intervals.back());
  s.p50_ms = to_ms(nearest_rank(intervals, 50));
  s.p95_ms = to_ms(nearest_rank(intervals, 95));
  s.p99_ms = to_ms(nearest_rank(intervals, 99));

  for (const auto& [w, a] : solves) {
    s.solve.push_back({w, a.n, to_ms(static_cast<long double>(a.sum) / static_cast<long double>(a.n)), to_ms(a.max)});
  }
  return s;
}

}  // namespace tlr
