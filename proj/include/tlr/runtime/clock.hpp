#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

#include "tlr/time.hpp"

namespace tlr {

class Clock {
 public:
  virtual ~Clock() = default;
  /// Nanoseconds since the start of the experiment. Never decreases.
  virtual Nanos now() const = 0;
};

/// Monotonic wall clock whose epoch is the moment of construction.
class WallClock final : public Clock {
 public:
  WallClock() : epoch_(std::chrono::steady_clock::now()) {}
  Nanos now() const override {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - epoch_).count();
  }
  std::chrono::steady_clock::time_point epoch() const { return epoch_; }

 private:
  std::chrono::steady_clock::time_point epoch_;
};

/// Virtual-time event queue. Events run in time order; events scheduled for
/// the same instant run in the order they were scheduled. Single-threaded.
class EventQueue final : public Clock {
 public:
  using Action = std::function<void()>;

  Nanos now() const override { return now_; }

  /// Throws std::logic_error when `at` lies in the past.
  void schedule(Nanos at, Action action);
  void schedule_after(Nanos delay, Action action) { schedule(now_ + delay, std::move(action)); }

  /// Runs events with time <= end. Returns the number executed.
  std::uint64_t run_until(Nanos end);
  bool empty() const { return queue_.empty(); }
  std::size_t pending() const { return queue_.size(); }

 private:
  struct Event {
    Nanos at;
    std::uint64_t seq;
    Action action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const { return a.at != b.at ? a.at > b.at : a.seq > b.seq; }
  };

  Nanos now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
};

}  // namespace tlr
