#pragma once

#include "tlr/runtime/run_log.hpp"
#include "tlr/runtime/system.hpp"

namespace tlr::detail {

// Appends rows to a RunLog. Not synchronized; wall mode wraps it in a mutex.
class Recorder {
 public:
  Recorder(RunLog& log, const RunConfig& config) : log_(log), decimation_(config.trajectory_decimation) {}

  void published(Nanos now, const ControlInput& input, int worker, Nanos solve_ns) {
    const Nanos interval = last_publish_ < 0 ? 0 : now - last_publish_;
    last_publish_ = now;
    log_.records.push_back({now, input.source_timestamp, worker, solve_ns, interval, RecordFlag::Published});
    log_.published_inputs.emplace_back(now, input);
  }
  void gate_discard(Nanos now, Nanos source) {
    log_.records.push_back({now, source, -1, 0, 0, RecordFlag::GateDiscard});
  }
  void stale_discard(Nanos now, Nanos source, int worker, Nanos solve_ns) {
    log_.records.push_back({now, source, worker, solve_ns, 0, RecordFlag::StaleDiscard});
  }
  void pool_event(Nanos now, PoolEvent::Kind kind, Nanos source, int worker) {
    log_.pool_events.push_back({now, kind, source, worker});
  }
  void failure(Nanos now, Nanos source, int worker, const std::string& reason) {
    log_.solver_failures.push_back({now, source, worker, reason});
  }
  void tick(const VehicleState& state, const ControlInput& applied) {
    ++log_.state_messages;
    if (decimation_ > 0 && log_.state_messages % static_cast<std::uint64_t>(decimation_) == 0) {
      log_.trajectory.push_back({state, applied});
    }
  }

 private:
  RunLog& log_;
  int decimation_;
  Nanos last_publish_ = -1;
};

RunHeader make_header(const RunConfig& config);
RunLog run_sim(const RunConfig& config, const Scenario& scenario);
RunLog run_wall(const RunConfig& config, const Scenario& scenario);

}  // namespace tlr::detail
