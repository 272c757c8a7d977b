#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "tlr/bench/experiment.hpp"
#include "tlr/config_error.hpp"
#include "tlr/dynamics/params_io.hpp"

using namespace tlr;

namespace {

struct BenchRunArgs {
  std::string config;
  std::optional<std::vector<int>> workers;
  std::optional<double> min_gap_ms;
  std::optional<double> duration_s;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> latency;
  std::optional<int> repetitions;
  std::optional<std::string> out;
  bool force = false;
};

int bench_run(const BenchRunArgs& a) {
  ExperimentConfig cfg = a.config.empty() ? ExperimentConfig{} : load_experiment_config(a.config);
  if (a.workers) cfg.workers = *a.workers;
  if (a.min_gap_ms) cfg.run.min_gap_ms = *a.min_gap_ms;
  if (a.duration_s) cfg.run.duration_s = *a.duration_s;
  if (a.mode) cfg.run.mode = parse_run_mode(*a.mode);
  if (a.seed) cfg.run.seed = *a.seed;
  if (a.latency) cfg.run.latency = LatencyModel::parse(*a.latency);
  if (a.repetitions) cfg.repetitions = *a.repetitions;
  if (a.out) cfg.out_dir = *a.out;
  cfg.validate();

  const std::filesystem::path out = cfg.out_dir;
  if (std::filesystem::exists(out) && !std::filesystem::is_empty(out) && !a.force) {
    throw std::runtime_error(out.string() + ": directory is not empty (use --force to overwrite)");
  }

  std::printf("%-7s %-4s %8s %9s %8s %8s %8s %8s %6s %6s\n", "workers", "rep", "publish", "mean_ms", "std_ms",
              "min_ms", "p99_ms", "max_ms", "gate", "stale");
  const ExperimentResult result = run_experiment(cfg, [](const ExperimentCell& c) {
    const IntervalStats& s = c.stats;
    std::printf("%-7d %-4d %8llu %9.3f %8.3f %8.3f %8.3f %8.3f %6llu %6llu\n", c.workers, c.repetition,
                static_cast<unsigned long long>(s.publishes), s.mean_ms, s.std_ms, s.min_ms, s.p99_ms, s.max_ms,
                static_cast<unsigned long long>(s.gate_discards), static_cast<unsigned long long>(s.stale_discards));
    for (const auto& w : c.log.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    if (!c.log.solver_failures.empty()) {
      std::fprintf(stderr, "warning: %zu solver failures in cell workers=%d repetition=%d\n",
                   c.log.solver_failures.size(), c.workers, c.repetition);
    }
    std::fflush(stdout);
  });
  export_results(result, out, a.force);
  std::printf("wrote %s\n", out.string().c_str());
  return 0;
}

int bench_stats(const std::string& path) {
  std::cout << stats_json(compute_interval_stats(load_run_log_csv(path)));
  return 0;
}

struct OvalArgs {
  double length = kDefaultOvalLength;
  double width = kDefaultOvalWidth;
  double half_width = kDefaultHalfWidth;
  int points = kDefaultOvalPoints;
  std::string out;
};

int track_gen_oval(const OvalArgs& a) {
  const auto waypoints = generate_oval(a.length, a.width, a.half_width, a.points);
  if (a.out.empty() || a.out == "-") {
    write_track_csv(std::cout, waypoints);
    return 0;
  }
  std::ofstream f(a.out);
  if (!f) throw std::runtime_error(a.out + ": cannot open for writing");
  write_track_csv(f, waypoints);
  return 0;
}

struct RolloutArgs {
  std::string params;
  double duty = 0.2;
  double steer = 0.0;
  double speed = 1.0;
  double duration_s = 1.0;
  double dt_ms = 1.0;
  std::string out;
};

int sim_rollout(const RolloutArgs& a) {
  const VehicleParams params = a.params.empty() ? default_vehicle_params() : load_vehicle_params(a.params);
  if (!(a.dt_ms > 0.0)) throw ConfigError("--dt-ms must be > 0");
  if (!(a.duration_s > 0.0)) throw ConfigError("--duration-s must be > 0");
  const int steps = static_cast<int>(std::llround(a.duration_s * 1e3 / a.dt_ms));
  const ControlInput input{a.duty, a.steer, 0};
  const VehicleState start{0.0, 0.0, 0.0, a.speed, 0.0, 0.0, 0};
  const auto traj = simulate(start, std::span<const ControlInput>(&input, 1), params, a.dt_ms * 1e-3, steps);

  std::ofstream file;
  if (!a.out.empty() && a.out != "-") {
    file.open(a.out);
    if (!file) throw std::runtime_error(a.out + ": cannot open for writing");
  }
  std::ostream& out = file.is_open() ? file : std::cout;
  out.precision(17);
  out << "t_ns,X,Y,phi,vx,vy,omega\n";
  for (const auto& s : traj) {
    out << s.timestamp << ',' << s.X << ',' << s.Y << ',' << s.phi << ',' << s.vx << ',' << s.vy << ',' << s.omega
        << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"F1TENTH MPCC closed-loop simulator and worker-pool latency benchmark"};
  app.require_subcommand(1);
  int rc = 0;

  auto* bench = app.add_subcommand("bench", "Worker-pool latency experiments");
  bench->require_subcommand(1);

  BenchRunArgs run;
  auto* bench_run_cmd = bench->add_subcommand("run", "Run a worker-count sweep and export the results");
  bench_run_cmd->add_option("--config", run.config, "Experiment YAML file")->check(CLI::ExistingFile);
  bench_run_cmd->add_option("--workers", run.workers, "Worker counts, e.g. --workers 1 2 3");
  bench_run_cmd->add_option("--min-gap-ms", run.min_gap_ms, "Gate between worker pickups [ms]");
  bench_run_cmd->add_option("--duration-s", run.duration_s, "Run length per cell [s]");
  bench_run_cmd->add_option("--mode", run.mode, "sim or wall")->check(CLI::IsMember({"sim", "wall"}));
  bench_run_cmd->add_option("--seed", run.seed, "Seed base");
  bench_run_cmd->add_option("--latency", run.latency, "const:25 | uniform:15,25 | lognormal:mu,sigma,cap");
  bench_run_cmd->add_option("--repetitions", run.repetitions, "Runs per worker count");
  bench_run_cmd->add_option("--out", run.out, "Output directory");
  bench_run_cmd->add_flag("--force", run.force, "Write into a non-empty output directory");
  bench_run_cmd->callback([&] { rc = bench_run(run); });

  std::string stats_path;
  auto* bench_stats_cmd = bench->add_subcommand("stats", "Interval statistics of a run log CSV");
  bench_stats_cmd->add_option("runlog", stats_path, "Run log CSV")->required()->check(CLI::ExistingFile);
  bench_stats_cmd->callback([&] { rc = bench_stats(stats_path); });

  auto* track = app.add_subcommand("track", "Track utilities");
  track->require_subcommand(1);
  OvalArgs oval;
  auto* gen = track->add_subcommand("gen-oval", "Write a stadium-shaped track CSV");
  gen->add_option("--length", oval.length, "Overall length [m]");
  gen->add_option("--width", oval.width, "Overall width [m]");
  gen->add_option("--half-width", oval.half_width, "Drivable half-width [m]");
  gen->add_option("--points", oval.points, "Number of waypoints");
  gen->add_option("--out", oval.out, "Output CSV, stdout when omitted");
  gen->callback([&] { rc = track_gen_oval(oval); });

  auto* sim = app.add_subcommand("sim", "Dynamics utilities");
  sim->require_subcommand(1);
  RolloutArgs roll;
  auto* rollout = sim->add_subcommand("rollout", "Open-loop rollout under a constant input, as CSV");
  rollout->add_option("--params", roll.params, "Vehicle parameter YAML")->check(CLI::ExistingFile);
  rollout->add_option("--duty", roll.duty, "Duty cycle");
  rollout->add_option("--steer", roll.steer, "Steering angle [rad]");
  rollout->add_option("--speed", roll.speed, "Initial longitudinal speed [m/s]");
  rollout->add_option("--duration-s", roll.duration_s, "Rollout length [s]");
  rollout->add_option("--dt-ms", roll.dt_ms, "Step size [ms], at most 10");
  rollout->add_option("--out", roll.out, "Output CSV, stdout when omitted");
  rollout->callback([&] { rc = sim_rollout(roll); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "tlr: " << e.what() << '\n';
    return 1;
  }
  return rc;
}
