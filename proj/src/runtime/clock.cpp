#include "tlr/runtime/clock.hpp"

#include <stdexcept>
#include <string>

namespace tlr {

void EventQueue::schedule(Nanos at, Action action) {
  if (at < now_) {
    throw std::logic_error("event queue: cannot schedule at " + std::to_string(at) + " ns, now is " +
                           std::to_string(now_));
  }
  queue_.push(Event{at, next_seq_++, std::move(action)});
}

std::uint64_t EventQueue::run_until(Nanos end) {
  std::uint64_t executed = 0;
  while (!queue_.empty() && queue_.top().at <= end) {
    Event e = queue_.top();
    queue_.pop();
    now_ = e.at;
    e.action();
    ++executed;
  }
  if (end > now_) now_ = end;
  return executed;
}

}  // namespace tlr
