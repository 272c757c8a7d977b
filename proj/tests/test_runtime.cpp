#include <doctest.h>

#include <algorithm>
#include <sstream>
#include <thread>

#include "tlr/config_error.hpp"
#include "tlr/runtime/bus.hpp"
#include "tlr/runtime/pool.hpp"
#include "tlr/runtime/system.hpp"

using namespace tlr;

namespace {

const Scenario& scenario() {
  static const Scenario s = load_scenario(RunConfig{});
  return s;
}

RunLog sim_run(int workers, const std::string& latency, double duration_s, std::uint64_t seed = 1) {
  RunConfig c;
  c.workers = workers;
  c.latency = LatencyModel::parse(latency);
  c.duration_s = duration_s;
  c.seed = seed;
  return run_system(c, scenario());
}

VehicleState stamped(Nanos t) {
  VehicleState s;
  s.timestamp = t;
  return s;
}

PoolResult result_for(Nanos source, int worker) {
  PoolResult r;
  r.input.source_timestamp = source;
  r.worker = worker;
  return r;
}

std::string csv_of(const RunLog& log) {
  std::ostringstream out;
  write_run_log_csv(out, log.records);
  return out.str();
}

// Mean of the publish intervals after the first `skip` publishes, in ms.
double steady_mean_ms(const RunLog& log, std::size_t skip) {
  const auto pub = log.published();
  REQUIRE(pub.size() > skip + 2);
  return nanos_to_millis(pub.back().publish_wall_ns - pub[skip].publish_wall_ns) /
         static_cast<double>(pub.size() - 1 - skip);
}

}  // namespace

TEST_CASE("event queue orders by time then by scheduling order") {
  EventQueue q;
  std::vector<int> order;
  q.schedule(5, [&] { order.push_back(4); });
  q.schedule(2, [&] { order.push_back(1); });
  q.schedule(2, [&] {
    order.push_back(2);
    q.schedule(q.now(), [&] { order.push_back(3); });
  });
  q.schedule(9, [&] { order.push_back(5); });
  CHECK(q.run_until(8) == 4);
  CHECK(order == std::vector<int>{1, 2, 3, 4});
  CHECK(q.now() == 8);
  CHECK(q.pending() == 1);
  CHECK_THROWS_AS(q.schedule(7, [] {}), std::logic_error);
  q.run_until(100);
  CHECK(order.back() == 5);
  CHECK(q.empty());
}

TEST_CASE("bus delivery") {
  EventQueue q;
  Bus bus(q, [&q](Bus::Task t) { q.schedule(q.now(), std::move(t)); });
  bus.register_topic<int>("ticks");

  SUBCASE("late subscriber sees only later messages") {
    std::vector<int> early, late;
    bus.subscribe<int>("ticks", [&](const auto& m) { early.push_back(m.payload); });
    bus.publish("ticks", 1);
    q.run_until(0);
    bus.subscribe<int>("ticks", [&](const auto& m) { late.push_back(m.payload); });
    bus.publish("ticks", 2);
    bus.publish("ticks", 3);
    q.run_until(0);
    CHECK(early == std::vector<int>{1, 2, 3});
    CHECK(late == std::vector<int>{2, 3});
  }

  SUBCASE("1000 publishes at 1 ms intervals arrive in order with their stamps") {
    std::vector<TimestampedMessage<int>> got;
    bus.subscribe<int>("ticks", [&](const auto& m) { got.push_back(m); });
    for (int k = 1; k <= 1000; ++k) {
      q.schedule(k * kNanosPerMilli, [&bus, k] { bus.publish("ticks", k); });
    }
    q.run_until(kNanosPerSecond);
    REQUIRE(got.size() == 1000);
    for (int k = 1; k <= 1000; ++k) {
      CHECK(got[k - 1].payload == k);
      CHECK(got[k - 1].timestamp == k * kNanosPerMilli);
    }
  }

  SUBCASE("errors and aliases") {
    CHECK_THROWS_AS(bus.publish("nope", 1), BusError);
    CHECK_THROWS_AS(bus.publish("ticks", 1.5), BusError);
    CHECK_THROWS_AS(bus.register_topic<double>("ticks"), BusError);
    CHECK_THROWS_AS(bus.alias("x", "missing"), BusError);
    bus.alias("clock", "ticks");
    CHECK(bus.has_topic("clock"));
    int seen = 0;
    bus.subscribe<int>("ticks", [&](const auto& m) { seen = m.payload; });
    bus.publish("clock", 42);
    q.run_until(0);
    CHECK(seen == 42);
  }
}

TEST_CASE("mailbox overwrite and take") {
  Mailbox<int> box;
  CHECK(box.empty());
  CHECK_FALSE(box.put(1));
  auto displaced = box.put(2);
  REQUIRE(displaced);
  CHECK(*displaced == 1);
  auto taken = box.take();
  REQUIRE(taken);
  CHECK(*taken == 2);
  CHECK(box.empty());
  CHECK_FALSE(box.take());
}

TEST_CASE("mailbox is linearizable under concurrent swaps") {
  Mailbox<int> box;
  constexpr int kPerThread = 20000;
  std::vector<std::vector<int>> received(4);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < kPerThread; ++i) {
        if (auto old = box.put(t * kPerThread + i)) received[t].push_back(*old);
        if (i % 3 == 0)
          if (auto got = box.take()) received[t].push_back(*got);
      }
    });
  }
  for (auto& th : threads) th.join();
  std::vector<int> all;
  for (auto& r : received) all.insert(all.end(), r.begin(), r.end());
  if (auto last = box.take()) all.push_back(*last);
  std::sort(all.begin(), all.end());
  // Every value put is seen exactly once, either displaced or taken.
  REQUIRE(all.size() == 4u * kPerThread);
  for (int i = 0; i < 4 * kPerThread; ++i) CHECK(all[i] == i);
}

TEST_CASE("pool gate, overwrite and staleness") {
  PoolCore pool(10 * kNanosPerMilli, 2);

  SUBCASE("gate arithmetic") {
    CHECK_FALSE(pool.offer(stamped(5 * kNanosPerMilli)).accepted);
    CHECK_FALSE(pool.offer(stamped(10 * kNanosPerMilli)).accepted);
    CHECK(pool.offer(stamped(12 * kNanosPerMilli)).accepted);
    CHECK(pool.has_state());
    auto s = pool.pickup();
    REQUIRE(s);
    CHECK(s->timestamp == 12 * kNanosPerMilli);
    CHECK(pool.last_queued_timestamp() == 12 * kNanosPerMilli);
    CHECK_FALSE(pool.offer(stamped(22 * kNanosPerMilli)).accepted);
    CHECK(pool.offer(stamped(23 * kNanosPerMilli)).accepted);
  }

  SUBCASE("busy workers leave only the newest state in the mailbox") {
    CHECK(pool.offer(stamped(12 * kNanosPerMilli)).accepted);
    auto second = pool.offer(stamped(24 * kNanosPerMilli));
    CHECK(second.accepted);
    CHECK(second.displaced == 12 * kNanosPerMilli);
    CHECK(pool.offer(stamped(36 * kNanosPerMilli)).displaced == 24 * kNanosPerMilli);
    auto s = pool.pickup();
    REQUIRE(s);
    CHECK(s->timestamp == 36 * kNanosPerMilli);
    CHECK_FALSE(pool.pickup());
  }

  SUBCASE("older result is discarded after a newer one was accepted") {
    CHECK(pool.complete(result_for(110, 1)).accepted);
    CHECK(pool.take_result()->input.source_timestamp == 110);
    CHECK_FALSE(pool.complete(result_for(100, 0)).accepted);
    CHECK_FALSE(pool.has_result());
    CHECK(pool.last_output_time() == 110);
  }

  SUBCASE("publisher sees only the newest of two deposits") {
    CHECK(pool.complete(result_for(5, 0)).accepted);
    auto c = pool.complete(result_for(7, 1));
    CHECK(c.accepted);
    REQUIRE(c.displaced);
    CHECK(c.displaced->input.source_timestamp == 5);
    auto r = pool.take_result();
    REQUIRE(r);
    CHECK(r->input.source_timestamp == 7);
    CHECK_FALSE(pool.take_result());
  }

  CHECK_THROWS(PoolCore(0, 1));
  CHECK_THROWS(PoolCore(1, 0));
}

TEST_CASE("latency models") {
  std::mt19937_64 rng(3);
  const auto c = LatencyModel::parse("const:25");
  CHECK(c.sample(rng) == 25 * kNanosPerMilli);
  const auto u = LatencyModel::parse("uniform:15,25");
  const auto l = LatencyModel::parse("lognormal:3,0.8,60");
  for (int i = 0; i < 10000; ++i) {
    const Nanos a = u.sample(rng);
    CHECK((a >= 15 * kNanosPerMilli && a <= 25 * kNanosPerMilli));
    const Nanos b = l.sample(rng);
    CHECK((b > 0 && b <= 60 * kNanosPerMilli));
  }
  CHECK(LatencyModel::parse(u.to_string()).to_string() == u.to_string());
  CHECK(LatencyModel::parse(l.to_string()).to_string() == l.to_string());
  for (const char* bad : {"", "const", "const:0", "const:-3", "uniform:25,15", "uniform:1", "lognormal:3,0.5",
                          "lognormal:3,-1,60", "gamma:2", "const:abc"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(LatencyModel::parse(bad), ConfigError);
  }
}

TEST_CASE("integrator node") {
  const RunLog log = sim_run(1, "const:100", 1.0);
  CHECK(log.state_messages == 1000);
  REQUIRE(log.trajectory.size() == 1000);
  for (std::size_t k = 0; k < log.trajectory.size(); ++k) {
    CHECK(log.trajectory[k].state.timestamp == static_cast<Nanos>(k + 1) * kNanosPerMilli);
  }
  // First pickup at 11 ms, first result 100 ms later.
  REQUIRE_FALSE(log.published_inputs.empty());
  CHECK(log.published_inputs.front().first == 111 * kNanosPerMilli);
  for (std::size_t k = 0; k < 50; ++k) {
    CHECK(log.trajectory[k].applied.d == 0.0);
    CHECK(log.trajectory[k].applied.delta == 0.0);
  }
  CHECK(log.trajectory[110].applied.d == 0.0);
  CHECK(log.trajectory[111].applied.d == log.published_inputs.front().second.d);
  CHECK(held_input_violations(log) == 0);
}

TEST_CASE("steady-state publish intervals with constant latency") {
  const RunLog one = sim_run(1, "const:25", 10.0);
  CHECK(steady_mean_ms(one, 5) == doctest::Approx(25.0).epsilon(0.02));
  for (const auto& r : one.published()) {
    if (r.interval_ns != 0) CHECK(r.interval_ns == 25 * kNanosPerMilli);
  }
  CHECK(one.count(RecordFlag::StaleDiscard) == 0);

  const RunLog three = sim_run(3, "const:25", 10.0);
  CHECK(steady_mean_ms(three, 5) <= 12.0);
  CHECK(steady_mean_ms(three, 5) == doctest::Approx(11.0).epsilon(0.01));

  const RunLog two = sim_run(2, "const:25", 10.0);
  CHECK(two.count(RecordFlag::StaleDiscard) == 0);
  CHECK(two.published().size() > one.published().size());
}

TEST_CASE("stale results from a slow worker are discarded") {
  // Worker 0 picks up the 11 ms state and takes 60 ms; worker 1 picks up
  // 22 ms and finishes first, so worker 0's result is older on completion.
  RunConfig c;
  c.workers = 2;
  c.duration_s = 0.2;
  c.latency = LatencyModel::lognormal(3.5, 1.5, 80);
  bool found = false;
  for (std::uint64_t seed = 1; seed <= 20 && !found; ++seed) {
    c.seed = seed;
    const RunLog log = run_system(c, scenario());
    CHECK(freshness_violations(log.records) == 0);
    found = log.count(RecordFlag::StaleDiscard) > 0;
  }
  CHECK(found);
}

TEST_CASE("simulated runs are deterministic") {
  const RunLog a = sim_run(3, "uniform:15,25", 3.0, 42);
  const RunLog b = sim_run(3, "uniform:15,25", 3.0, 42);
  CHECK(csv_of(a) == csv_of(b));
  CHECK(run_header_json(a) == run_header_json(b));
  const RunLog c = sim_run(3, "uniform:15,25", 3.0, 43);
  CHECK(csv_of(a) != csv_of(c));
}

TEST_CASE("pool properties hold over randomized runs") {
  for (int w = 1; w <= 3; ++w) {
    CAPTURE(w);
    const RunLog log = sim_run(w, "lognormal:2.9,0.6,80", 5.0, 7 + static_cast<std::uint64_t>(w));
    CHECK(freshness_violations(log.records) == 0);
    CHECK(work_conservation_violations(log) == 0);
    CHECK(gate_violations(log, 10 * kNanosPerMilli) == 0);
    CHECK(held_input_violations(log) == 0);
    CHECK(log.published().size() > 50);
    std::size_t published = 0;
    for (const auto& r : log.records) published += r.flag == RecordFlag::Published;
    CHECK(published == log.published_inputs.size());
  }
}

TEST_CASE("liveness over a long randomized run") {
  const RunLog log = sim_run(2, "lognormal:3.0,0.7,120", 60.0, 11);
  CHECK(freshness_violations(log.records) == 0);
  // No publish gap may exceed the latency cap plus the gate and one tick.
  Nanos last = 0;
  for (const auto& [t, input] : log.published_inputs) {
    CHECK(t - last <= 132 * kNanosPerMilli);
    last = t;
  }
  CHECK(seconds_to_nanos(60.0) - last <= 132 * kNanosPerMilli);
}

TEST_CASE("sub-gap publish intervals occur with two workers") {
  const RunLog log = sim_run(2, "uniform:15,25", 10.0, 1);
  const auto pub = log.published();
  const bool sub_gap = std::any_of(pub.begin() + 1, pub.end(),
                                   [](const RunRecord& r) { return r.interval_ns < 10 * kNanosPerMilli; });
  CHECK(sub_gap);
  CHECK(freshness_violations(log.records) == 0);
}

TEST_CASE("wall mode run") {
  RunConfig c;
  c.mode = RunMode::Wall;
  c.workers = 2;
  c.duration_s = 1.0;
  c.pinning = true;
  const RunLog log = run_system(c, scenario());
  CHECK(log.header.mode == "wall");
  CHECK(log.state_messages == 1000);
  CHECK(log.published().size() > 10);
  CHECK(freshness_violations(log.records) == 0);
  for (const auto& w : log.warnings) MESSAGE(w);
}

TEST_CASE("mpcInput alias drives the integrator") {
  RunConfig c;
  c.input_topic = "mpcInput";
  c.duration_s = 0.5;
  const RunLog log = run_system(c, scenario());
  CHECK(log.published().size() > 5);
  CHECK(held_input_violations(log) == 0);
}

TEST_CASE("run log csv round trip") {
  const RunLog log = sim_run(2, "uniform:15,25", 1.0);
  std::stringstream ss(csv_of(log));
  CHECK(read_run_log_csv(ss) == log.records);

  std::stringstream bad_header("a,b\n");
  CHECK_THROWS_AS(read_run_log_csv(bad_header), std::runtime_error);
  std::stringstream bad_row(std::string(kRunLogCsvHeader) + "\n1,2,3\n");
  CHECK_THROWS_WITH_AS(read_run_log_csv(bad_row, "x.csv"), doctest::Contains("x.csv:2"), std::runtime_error);
  std::stringstream bad_flag(std::string(kRunLogCsvHeader) + "\n1,2,3,4,5,9\n");
  CHECK_THROWS_AS(read_run_log_csv(bad_flag), std::runtime_error);
}

TEST_CASE("run config parsing") {
  const RunConfig c = parse_run_config(
      "mode: wall\nworkers: 2\nmin_gap_ms: 12.5\nduration_s: 3\nseed: 9\nlatency: const:20\n"
      "pinning: true\ninput_topic: mpcInput\n");
  CHECK(c.mode == RunMode::Wall);
  CHECK(c.workers == 2);
  CHECK(c.min_gap_ms == 12.5);
  CHECK(c.duration_s == 3.0);
  CHECK(c.seed == 9);
  CHECK(c.latency.kind == LatencyModel::Kind::Constant);
  CHECK(c.pinning);
  CHECK(c.input_topic == "mpcInput");

  CHECK_THROWS_AS(parse_run_config("workers: 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("min_gap_ms: 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("mode: fast\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("duration_s: -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("input_topic: other\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("wokers: 2\n"), ConfigError);
}
