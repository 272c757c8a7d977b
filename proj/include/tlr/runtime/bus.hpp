#pragma once

#include <any>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <typeindex>
#include <vector>

#include "tlr/runtime/clock.hpp"
#include "tlr/time.hpp"

namespace tlr {

inline constexpr const char* kStateTopic = "nextState";
inline constexpr const char* kInputTopic = "inputCmd";
inline constexpr const char* kInputTopicAlias = "mpcInput";

class BusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename T>
struct TimestampedMessage {
  T payload;
  Nanos timestamp = 0;
};

/// In-process topic bus. Messages are stamped with the bus clock at publish
/// and handed to `dispatch`, which decides where each subscriber callback
/// runs (inline for wall mode, as a same-instant event in simulated mode).
/// Subscribers only see messages published after they subscribed.
class Bus {
 public:
  using Task = std::function<void()>;
  using Dispatcher = std::function<void(Task)>;

  Bus(const Clock& clock, Dispatcher dispatch) : clock_(clock), dispatch_(std::move(dispatch)) {}

  template <typename T>
  void register_topic(const std::string& name) {
    std::lock_guard lock(mutex_);
    auto [it, inserted] = topics_.try_emplace(name, std::make_shared<Topic>(std::type_index(typeid(T))));
    if (!inserted && it->second->type != std::type_index(typeid(T))) {
      throw BusError("bus: topic '" + name + "' already registered with another type");
    }
  }

  /// Makes `alias` another name for the registered topic `target`.
  void alias(const std::string& alias, const std::string& target) {
    std::lock_guard lock(mutex_);
    auto it = topics_.find(resolve_locked(target));
    if (it == topics_.end()) throw BusError("bus: cannot alias unknown topic '" + target + "'");
    aliases_[alias] = it->first;
  }

  template <typename T>
  void subscribe(const std::string& topic, std::function<void(const TimestampedMessage<T>&)> handler) {
    std::lock_guard lock(mutex_);
    Topic& t = checked_locked<T>(topic);
    t.handlers.push_back([h = std::move(handler)](const std::any& msg) {
      h(std::any_cast<const TimestampedMessage<T>&>(msg));
    });
  }

  /// Stamps and delivers `payload` to the current subscribers of `topic`.
  template <typename T>
  TimestampedMessage<T> publish(const std::string& topic, T payload) {
    std::vector<Handler> handlers;
    {
      std::lock_guard lock(mutex_);
      handlers = checked_locked<T>(topic).handlers;
    }
    auto msg = std::make_shared<const std::any>(TimestampedMessage<T>{std::move(payload), clock_.now()});
    for (const auto& h : handlers) {
      dispatch_([h, msg] { h(*msg); });
    }
    return std::any_cast<const TimestampedMessage<T>&>(*msg);
  }

  bool has_topic(const std::string& name) const {
    std::lock_guard lock(mutex_);
    return topics_.count(resolve_locked(name)) > 0;
  }

 private:
  using Handler = std::function<void(const std::any&)>;
  struct Topic {
    explicit Topic(std::type_index t) : type(t) {}
    std::type_index type;
    std::vector<Handler> handlers;
  };

  std::string resolve_locked(const std::string& name) const {
    auto it = aliases_.find(name);
    return it == aliases_.end() ? name : it->second;
  }

  template <typename T>
  Topic& checked_locked(const std::string& name) {
    auto it = topics_.find(resolve_locked(name));
    if (it == topics_.end()) throw BusError("bus: unknown topic '" + name + "'");
    if (it->second->type != std::type_index(typeid(T))) throw BusError("bus: type mismatch on topic '" + name + "'");
    return *it->second;
  }

  const Clock& clock_;
  Dispatcher dispatch_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Topic>> topics_;
  std::map<std::string, std::string> aliases_;
};

}  // namespace tlr
