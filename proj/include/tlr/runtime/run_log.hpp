#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "tlr/dynamics/vehicle.hpp"
#include "tlr/time.hpp"

namespace tlr {

enum class RecordFlag : int { Published = 0, GateDiscard = 1, StaleDiscard = 2 };

/// One row of the run log CSV. For discards `publish_wall_ns` is the time of
/// the discard and `interval_ns` is 0.
struct RunRecord {
  Nanos publish_wall_ns = 0;
  Nanos source_state_ns = 0;
  int worker_id = -1;
  Nanos solve_ns = 0;
  Nanos interval_ns = 0;
  RecordFlag flag = RecordFlag::Published;

  bool operator==(const RunRecord&) const = default;
};

/// Mailbox and worker transitions, kept for log replay checks.
struct PoolEvent {
  enum class Kind { Offer, Pickup, Complete };
  Nanos time = 0;
  Kind kind = Kind::Offer;
  Nanos source_state_ns = 0;
  int worker_id = -1;
};

struct TrajectorySample {
  VehicleState state;
  ControlInput applied;  // input held during the step that produced `state`
};

struct SolverFailure {
  Nanos time = 0;
  Nanos source_state_ns = 0;
  int worker_id = -1;
  std::string reason;
};

struct RunHeader {
  std::string mode;
  int workers = 0;
  double min_gap_ms = 0.0;
  double duration_s = 0.0;
  std::uint64_t seed = 0;
  std::string latency;
  bool pinning = false;
  std::string track;
  std::string params;
  std::string mpcc;
};

struct RunLog {
  RunHeader header;
  std::vector<RunRecord> records;
  std::vector<std::pair<Nanos, ControlInput>> published_inputs;  // (publish time, input)
  std::vector<PoolEvent> pool_events;
  std::vector<TrajectorySample> trajectory;
  std::vector<SolverFailure> solver_failures;
  std::vector<std::string> warnings;
  std::uint64_t state_messages = 0;

  std::vector<RunRecord> published() const;
  std::size_t count(RecordFlag flag) const;
};

inline constexpr const char* kRunLogCsvHeader =
    "publish_wall_ns,source_state_ns,worker_id,solve_ns,interval_ns,discarded_flag";

void write_run_log_csv(std::ostream& out, const std::vector<RunRecord>& records);
/// Throws std::runtime_error naming the line on malformed input.
std::vector<RunRecord> read_run_log_csv(std::istream& in, const std::string& source = "<stream>");
std::vector<RunRecord> load_run_log_csv(const std::filesystem::path& path);

/// Run header plus discard and failure counts as a JSON document.
std::string run_header_json(const RunLog& log);

/// Number of consecutive published records whose source timestamps do not
/// strictly increase.
std::size_t freshness_violations(const std::vector<RunRecord>& records);

/// Replays the pool events and counts instants at which a state sat in the
/// mailbox while a worker was idle, plus pickups of states that were not in
/// the mailbox. Meaningful for simulated runs, where events are exact.
std::size_t work_conservation_violations(const RunLog& log);

/// Consecutive pickups whose source timestamps are not more than min_gap apart.
std::size_t gate_violations(const RunLog& log, Nanos min_gap);

/// Trajectory steps whose applied input is not the input published most
/// recently before the step (neutral before the first publish).
std::size_t held_input_violations(const RunLog& log);

}  // namespace tlr
