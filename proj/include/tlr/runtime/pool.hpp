#pragma once

#include <atomic>
#include <mutex>
#include <optional>

#include "tlr/dynamics/vehicle.hpp"
#include "tlr/runtime/mailbox.hpp"
#include "tlr/time.hpp"

namespace tlr {

/// A computed control waiting for the publisher.
struct PoolResult {
  ControlInput input;  // input.source_timestamp identifies the state
  int worker = -1;
  Nanos solve_ns = 0;
};

/// Shared scalars and slots of the controller worker pool. Thread-safe;
/// waiting and waking are left to the executor that drives it.
class PoolCore {
 public:
  PoolCore(Nanos min_gap, int workers);

  struct Offer {
    bool accepted = false;
    std::optional<Nanos> displaced;  // source timestamp of an overwritten state
  };

  /// Gate: a state enters the mailbox only if it is more than MIN_GAP newer
  /// than the last state a worker picked up.
  Offer offer(const VehicleState& state);

  /// Empties the mailbox and records the pickup time stamp.
  std::optional<VehicleState> pickup();

  struct Completion {
    bool accepted = false;
    std::optional<PoolResult> displaced;  // unpublished result overwritten in the slot
  };

  /// Freshness check and deposit in one critical section. Rejects the
  /// result when one from a newer state has already been accepted.
  Completion complete(const PoolResult& result);

  std::optional<PoolResult> take_result();

  bool has_state() const { return !states_.empty(); }
  bool has_result() const { return !results_.empty(); }
  Nanos min_gap() const { return min_gap_; }
  int workers() const { return workers_; }
  Nanos last_queued_timestamp() const { return last_queued_.load(); }
  Nanos last_output_time() const;

 private:
  Nanos min_gap_;
  int workers_;
  std::atomic<Nanos> last_queued_{0};
  mutable std::mutex output_mutex_;
  Nanos last_output_time_ = 0;
  Mailbox<VehicleState> states_;
  Mailbox<PoolResult> results_;
};

}  // namespace tlr
