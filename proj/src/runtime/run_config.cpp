#include <cmath>
#include <fstream>
#include <sstream>

#include "../common/flat_config.hpp"
#include "tlr/dynamics/params_io.hpp"
#include "tlr/runtime/bus.hpp"
#include "tlr/runtime/system.hpp"

namespace tlr {

const char* to_string(RunMode mode) { return mode == RunMode::Sim ? "sim" : "wall"; }

RunMode parse_run_mode(const std::string& text) {
  if (text == "sim") return RunMode::Sim;
  if (text == "wall") return RunMode::Wall;
  throw ConfigError("mode must be 'sim' or 'wall', got '" + text + "'");
}

void RunConfig::validate() const {
  if (workers < 1) throw ConfigError("run config: workers must be >= 1");
  if (!(min_gap_ms > 0.0) || !std::isfinite(min_gap_ms)) throw ConfigError("run config: min_gap_ms must be > 0");
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) throw ConfigError("run config: duration_s must be > 0");
  if (trajectory_decimation < 0) throw ConfigError("run config: trajectory_decimation must be >= 0");
  if (!std::isfinite(initial_speed) || initial_speed < 0.0) throw ConfigError("run config: initial_speed must be >= 0");
  if (input_topic != kInputTopic && input_topic != kInputTopicAlias) {
    throw ConfigError("run config: input_topic must be 'inputCmd' or 'mpcInput'");
  }
  latency.validate();
}

RunConfig parse_run_config(const std::string& yaml_text, const std::string& source,
                           const std::filesystem::path& base_dir) {
  RunConfig c;
  detail::FlatConfig cfg(detail::load_yaml_text(yaml_text, source), source);
  std::string mode = to_string(c.mode), latency = c.latency.to_string();
  cfg.get("mode", mode);
  cfg.get("workers", c.workers);
  cfg.get("min_gap_ms", c.min_gap_ms);
  cfg.get("duration_s", c.duration_s);
  cfg.get("seed", c.seed);
  cfg.get("latency", latency);
  cfg.get("pinning", c.pinning);
  cfg.get("track", c.track);
  cfg.get("params", c.params);
  cfg.get("mpcc", c.mpcc);
  cfg.get("input_topic", c.input_topic);
  cfg.get("trajectory_decimation", c.trajectory_decimation);
  cfg.get("initial_speed", c.initial_speed);
  cfg.reject_unknown();
  try {
    c.mode = parse_run_mode(mode);
    c.latency = LatencyModel::parse(latency);
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  for (std::string* p : {&c.track, &c.params, &c.mpcc}) {
    if (!p->empty() && !base_dir.empty() && std::filesystem::path(*p).is_relative()) {
      *p = (base_dir / *p).lexically_normal().string();
    }
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::stringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.string(), path.parent_path());
}

Track default_track() {
  return build_track(generate_oval(kDefaultOvalLength, kDefaultOvalWidth, kDefaultHalfWidth, kDefaultOvalPoints));
}

Scenario load_scenario(const RunConfig& c) {
  return Scenario{c.track.empty() ? default_track() : build_track(load_track_csv(c.track)),
                  c.params.empty() ? default_vehicle_params() : load_vehicle_params(c.params),
                  c.mpcc.empty() ? MpccConfig{} : load_mpcc_config(c.mpcc)};
}

VehicleState initial_state(const Track& track, double speed) {
  const CenterlinePoint c = track.at(0.0);
  return VehicleState{c.x, c.y, normalize_angle(c.heading), speed, 0.0, 0.0, 0};
}

}  // namespace tlr
