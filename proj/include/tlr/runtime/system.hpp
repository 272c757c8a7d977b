#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "tlr/dynamics/vehicle.hpp"
#include "tlr/mpcc/config.hpp"
#include "tlr/runtime/latency.hpp"
#include "tlr/runtime/run_log.hpp"
#include "tlr/track/track.hpp"

namespace tlr {

enum class RunMode { Sim, Wall };

const char* to_string(RunMode mode);
RunMode parse_run_mode(const std::string& text);

struct RunConfig {
  RunMode mode = RunMode::Sim;
  int workers = 3;
  double min_gap_ms = 10.0;
  double duration_s = 10.0;
  std::uint64_t seed = 1;
  LatencyModel latency = LatencyModel::uniform(15.0, 25.0);
  bool pinning = false;
  // Empty paths select the built-in oval, default parameters and tuning.
  std::string track;
  std::string params;
  std::string mpcc;
  std::string input_topic = "inputCmd";  // "mpcInput" is accepted as an alias
  int trajectory_decimation = 1;         // keep every k-th integrator sample, 0 disables
  double initial_speed = 1.0;            // [m/s] along the centerline at theta = 0

  /// Throws ConfigError.
  void validate() const;
};

/// Loads a run configuration. Relative paths inside the file are resolved
/// against the file's directory.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& yaml_text, const std::string& source = "<string>",
                           const std::filesystem::path& base_dir = {});

/// Immutable inputs shared by every worker.
struct Scenario {
  Track track;
  VehicleParams params;
  MpccConfig mpcc;
};

inline constexpr double kDefaultOvalLength = 10.0;
inline constexpr double kDefaultOvalWidth = 6.0;
inline constexpr double kDefaultHalfWidth = 0.8;
inline constexpr int kDefaultOvalPoints = 200;

Track default_track();
Scenario load_scenario(const RunConfig& config);

/// Vehicle on the centerline at theta = 0, heading along the track.
VehicleState initial_state(const Track& track, double speed);

inline constexpr Nanos kIntegratorPeriod = kNanosPerMilli;

/// Runs the integrator node and the controller pool for the configured
/// duration. Simulated mode is single-threaded on a virtual clock and its
/// log is a pure function of (config, seed). Wall mode uses one thread per
/// worker plus publisher and integrator threads; pinning failures are
/// recorded as warnings.
RunLog run_system(const RunConfig& config, const Scenario& scenario);

}  // namespace tlr
