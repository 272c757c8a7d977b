#include <random>
#include <vector>

#include "recorder.hpp"
#include "tlr/mpcc/controller.hpp"
#include "tlr/runtime/bus.hpp"
#include "tlr/runtime/pool.hpp"

namespace tlr::detail {

namespace {

class SimSystem {
 public:
  SimSystem(const RunConfig& config, const Scenario& scenario)
      : config_(config),
        scenario_(scenario),
        bus_(queue_, [this](Bus::Task task) { queue_.schedule(queue_.now(), std::move(task)); }),
        pool_(millis_to_nanos(config.min_gap_ms), config.workers),
        workers_(static_cast<std::size_t>(config.workers)),
        rng_(config.seed),
        end_(seconds_to_nanos(config.duration_s)),
        state_(initial_state(scenario.track, config.initial_speed)),
        recorder_(log_, config) {
    log_.header = make_header(config);
    bus_.register_topic<VehicleState>(kStateTopic);
    bus_.register_topic<ControlInput>(kInputTopic);
    bus_.alias(kInputTopicAlias, kInputTopic);
    bus_.subscribe<VehicleState>(kStateTopic, [this](const auto& msg) { on_state(msg); });
    bus_.subscribe<ControlInput>(config.input_topic, [this](const auto& msg) { latest_ = msg.payload; });
  }

  RunLog run() {
    queue_.schedule(kIntegratorPeriod, [this] { tick(); });
    queue_.run_until(end_);
    return std::move(log_);
  }

 private:
  struct Worker {
    ControllerMemory memory;
    bool busy = false;
  };

  void tick() {
    const ControlInput applied = latest_;
    state_ = rk4_step(state_, applied, scenario_.params, nanos_to_seconds(kIntegratorPeriod));
    state_.timestamp = queue_.now();
    recorder_.tick(state_, applied);
    bus_.publish(kStateTopic, state_);
    if (queue_.now() + kIntegratorPeriod <= end_) queue_.schedule_after(kIntegratorPeriod, [this] { tick(); });
  }

  void on_state(const TimestampedMessage<VehicleState>& msg) {
    const PoolCore::Offer offer = pool_.offer(msg.payload);
    if (!offer.accepted) {
      recorder_.gate_discard(queue_.now(), msg.payload.timestamp);
      return;
    }
    recorder_.pool_event(queue_.now(), PoolEvent::Kind::Offer, msg.payload.timestamp, -1);
    for (std::size_t w = 0; w < workers_.size(); ++w) {
      if (!workers_[w].busy) {
        start(static_cast<int>(w));
        return;
      }
    }
  }

  void start(int w) {
    const auto state = pool_.pickup();
    if (!state) return;
    Worker& worker = workers_[static_cast<std::size_t>(w)];
    worker.busy = true;
    recorder_.pool_event(queue_.now(), PoolEvent::Kind::Pickup, state->timestamp, w);
    const MpcResult r = mpc_step(*state, worker.memory, scenario_.track, scenario_.mpcc, scenario_.params);
    if (r.failed) recorder_.failure(queue_.now(), state->timestamp, w, r.failure);
    const Nanos latency = config_.latency.sample(rng_);
    const PoolResult result{r.input, w, latency};
    queue_.schedule_after(latency, [this, w, result] { finish(w, result); });
  }

  void finish(int w, const PoolResult& result) {
    workers_[static_cast<std::size_t>(w)].busy = false;
    recorder_.pool_event(queue_.now(), PoolEvent::Kind::Complete, result.input.source_timestamp, w);
    const PoolCore::Completion c = pool_.complete(result);
    if (!c.accepted) {
      recorder_.stale_discard(queue_.now(), result.input.source_timestamp, w, result.solve_ns);
    } else {
      if (c.displaced) {
        recorder_.stale_discard(queue_.now(), c.displaced->input.source_timestamp, c.displaced->worker,
                                c.displaced->solve_ns);
      }
      if (!publisher_pending_) {
        publisher_pending_ = true;
        queue_.schedule(queue_.now(), [this] { publish(); });
      }
    }
    if (pool_.has_state()) start(w);
  }

  void publish() {
    publisher_pending_ = false;
    const auto result = pool_.take_result();
    if (!result) return;
    bus_.publish(config_.input_topic, result->input);
    recorder_.published(queue_.now(), result->input, result->worker, result->solve_ns);
  }

  const RunConfig& config_;
  const Scenario& scenario_;
  EventQueue queue_;
  Bus bus_;
  PoolCore pool_;
  std::vector<Worker> workers_;
  std::mt19937_64 rng_;
  Nanos end_;
  VehicleState state_;
  ControlInput latest_{};
  bool publisher_pending_ = false;
  RunLog log_;
  Recorder recorder_;
};

}  // namespace

RunLog run_sim(const RunConfig& config, const Scenario& scenario) { return SimSystem(config, scenario).run(); }

}  // namespace tlr::detail
