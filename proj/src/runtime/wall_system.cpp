#include <pthread.h>
#include <sched.h>

#include <condition_variable>
#include <cstring>
#include <mutex>
#include <thread>
#include <vector>

#include "recorder.hpp"
#include "tlr/mpcc/controller.hpp"
#include "tlr/runtime/bus.hpp"
#include "tlr/runtime/pool.hpp"

namespace tlr::detail {

namespace {

class WallSystem {
 public:
  WallSystem(const RunConfig& config, const Scenario& scenario)
      : config_(config),
        scenario_(scenario),
        bus_(clock_, [](Bus::Task task) { task(); }),
        pool_(millis_to_nanos(config.min_gap_ms), config.workers),
        state_(initial_state(scenario.track, config.initial_speed)),
        recorder_(log_, config) {
    log_.header = make_header(config);
    bus_.register_topic<VehicleState>(kStateTopic);
    bus_.register_topic<ControlInput>(kInputTopic);
    bus_.alias(kInputTopicAlias, kInputTopic);
    bus_.subscribe<VehicleState>(kStateTopic, [this](const auto& msg) { on_state(msg); });
    bus_.subscribe<ControlInput>(config.input_topic, [this](const auto& msg) {
      std::lock_guard lock(input_mutex_);
      latest_ = msg.payload;
    });
  }

  RunLog run() {
    const unsigned cores = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> threads;
    for (int w = 0; w < config_.workers; ++w) {
      threads.emplace_back([this, w, cores] {
        configure_thread("worker " + std::to_string(w), static_cast<unsigned>(w + 1) % cores);
        worker_loop(w);
      });
    }
    threads.emplace_back([this, cores] {
      configure_thread("publisher", static_cast<unsigned>(config_.workers + 1) % cores);
      publisher_loop();
    });
    std::exception_ptr failure;
    std::thread integrator([this, &failure] {
      configure_thread("integrator", 0);
      try {
        integrator_loop();
      } catch (...) {
        failure = std::current_exception();
      }
    });
    integrator.join();
    {
      std::lock_guard lock(wake_mutex_);
      shutdown_ = true;
    }
    worker_cv_.notify_all();
    publisher_cv_.notify_all();
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
    return std::move(log_);
  }

 private:
  void configure_thread(const std::string& name, unsigned core) {
    if (!config_.pinning) return;
    cpu_set_t set;
    CPU_ZERO(&set);
    CPU_SET(core, &set);
    if (int rc = pthread_setaffinity_np(pthread_self(), sizeof(set), &set); rc != 0) {
      warn(name + ": pinning to core " + std::to_string(core) + " failed: " + std::strerror(rc));
    }
    sched_param param{};
    param.sched_priority = sched_get_priority_max(SCHED_FIFO) / 2;
    if (int rc = pthread_setschedparam(pthread_self(), SCHED_FIFO, &param); rc != 0) {
      warn(name + ": real-time priority unavailable: " + std::strerror(rc));
    }
  }

  void warn(const std::string& message) {
    std::lock_guard lock(log_mutex_);
    log_.warnings.push_back(message);
  }

  void integrator_loop() {
    const Nanos end = seconds_to_nanos(config_.duration_s);
    const auto epoch = clock_.epoch();
    for (Nanos t = kIntegratorPeriod; t <= end; t += kIntegratorPeriod) {
      std::this_thread::sleep_until(epoch + std::chrono::nanoseconds(t));
      ControlInput applied;
      {
        std::lock_guard lock(input_mutex_);
        applied = latest_;
      }
      const Nanos stamp = clock_.now();
      state_ = rk4_step(state_, applied, scenario_.params, nanos_to_seconds(kIntegratorPeriod));
      state_.timestamp = stamp;
      {
        std::lock_guard lock(log_mutex_);
        recorder_.tick(state_, applied);
      }
      bus_.publish(kStateTopic, state_);
    }
  }

  void on_state(const TimestampedMessage<VehicleState>& msg) {
    const PoolCore::Offer offer = pool_.offer(msg.payload);
    {
      std::lock_guard lock(log_mutex_);
      if (!offer.accepted) {
        recorder_.gate_discard(clock_.now(), msg.payload.timestamp);
        return;
      }
      recorder_.pool_event(clock_.now(), PoolEvent::Kind::Offer, msg.payload.timestamp, -1);
    }
    // Taking the lock orders this notify after any waiter's predicate check.
    { std::lock_guard lock(wake_mutex_); }
    worker_cv_.notify_one();
  }

  void worker_loop(int w) {
    ControllerMemory memory;
    for (;;) {
      {
        std::unique_lock lock(wake_mutex_);
        worker_cv_.wait(lock, [this] { return shutdown_ || pool_.has_state(); });
        if (shutdown_) return;
      }
      const auto state = pool_.pickup();
      if (!state) continue;
      {
        std::lock_guard lock(log_mutex_);
        recorder_.pool_event(clock_.now(), PoolEvent::Kind::Pickup, state->timestamp, w);
      }
      const Nanos start = clock_.now();
      const MpcResult r = mpc_step(*state, memory, scenario_.track, scenario_.mpcc, scenario_.params);
      const Nanos solve = clock_.now() - start;
      const PoolCore::Completion c = pool_.complete(PoolResult{r.input, w, solve});
      {
        std::lock_guard lock(log_mutex_);
        const Nanos now = clock_.now();
        recorder_.pool_event(now, PoolEvent::Kind::Complete, state->timestamp, w);
        if (r.failed) recorder_.failure(now, state->timestamp, w, r.failure);
        if (!c.accepted) recorder_.stale_discard(now, state->timestamp, w, solve);
        if (c.displaced) {
          recorder_.stale_discard(now, c.displaced->input.source_timestamp, c.displaced->worker,
                                  c.displaced->solve_ns);
        }
      }
      if (c.accepted) {
        { std::lock_guard lock(wake_mutex_); }
        publisher_cv_.notify_one();
      }
    }
  }

  void publisher_loop() {
    for (;;) {
      {
        std::unique_lock lock(wake_mutex_);
        publisher_cv_.wait(lock, [this] { return shutdown_ || pool_.has_result(); });
        if (shutdown_ && !pool_.has_result()) return;
      }
      const auto result = pool_.take_result();
      if (!result) continue;
      const auto msg = bus_.publish(config_.input_topic, result->input);
      std::lock_guard lock(log_mutex_);
      recorder_.published(msg.timestamp, result->input, result->worker, result->solve_ns);
    }
  }

  const RunConfig& config_;
  const Scenario& scenario_;
  WallClock clock_;
  Bus bus_;
  PoolCore pool_;
  VehicleState state_;

  std::mutex input_mutex_;
  ControlInput latest_{};

  std::mutex wake_mutex_;
  std::condition_variable worker_cv_;
  std::condition_variable publisher_cv_;
  bool shutdown_ = false;

  std::mutex log_mutex_;
  RunLog log_;
  Recorder recorder_;
};

}  // namespace

RunLog run_wall(const RunConfig& config, const Scenario& scenario) { return WallSystem(config, scenario).run(); }

}  // namespace tlr::detail
