#pragma once

#include <atomic>
#include <memory>

namespace tlr {

/// Single-slot overwrite container. Every operation is one atomic exchange,
/// so concurrent swaps and takes are linearizable.
template <typename T>
class Mailbox {
 public:
  Mailbox() = default;
  Mailbox(const Mailbox&) = delete;
  Mailbox& operator=(const Mailbox&) = delete;
  ~Mailbox() { delete slot_.load(); }

  /// Puts `value` in the slot and returns whatever it displaced.
  std::unique_ptr<T> exchange(std::unique_ptr<T> value) {
    return std::unique_ptr<T>(slot_.exchange(value.release(), std::memory_order_acq_rel));
  }
  std::unique_ptr<T> put(T value) { return exchange(std::make_unique<T>(std::move(value))); }
  /// Empties the slot.
  std::unique_ptr<T> take() { return exchange(nullptr); }
  bool empty() const { return slot_.load(std::memory_order_acquire) == nullptr; }

 private:
  std::atomic<T*> slot_{nullptr};
};

}  // namespace tlr
