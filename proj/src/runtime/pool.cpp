#include "tlr/runtime/pool.hpp"

#include <stdexcept>

namespace tlr {

PoolCore::PoolCore(Nanos min_gap, int workers) : min_gap_(min_gap), workers_(workers) {
  if (min_gap <= 0) throw std::invalid_argument("pool: MIN_GAP must be > 0");
  if (workers < 1) throw std::invalid_argument("pool: need at least one worker");
}

PoolCore::Offer PoolCore::offer(const VehicleState& state) {
  Offer out;
  if (state.timestamp - last_queued_.load() <= min_gap_) return out;
  out.accepted = true;
  if (auto old = states_.put(state)) out.displaced = old->timestamp;
  return out;
}

std::optional<VehicleState> PoolCore::pickup() {
  auto state = states_.take();
  if (!state) return std::nullopt;
  last_queued_.store(state->timestamp);
  return *state;
}

PoolCore::Completion PoolCore::complete(const PoolResult& result) {
  Completion out;
  std::lock_guard lock(output_mutex_);
  if (result.input.source_timestamp < last_output_time_) return out;
  last_output_time_ = result.input.source_timestamp;
  out.accepted = true;
  if (auto old = results_.put(result)) out.displaced = *old;
  return out;
}

std::optional<PoolResult> PoolCore::take_result() {
  auto r = results_.take();
  if (!r) return std::nullopt;
  return *r;
}

Nanos PoolCore::last_output_time() const {
  std::lock_guard lock(output_mutex_);
  return last_output_time_;
}

}  // namespace tlr
