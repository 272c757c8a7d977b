#include "tlr/runtime/system.hpp"

#include "recorder.hpp"

namespace tlr {

namespace detail {

RunHeader make_header(const RunConfig& c) {
  RunHeader h;
  h.mode = to_string(c.mode);
  h.workers = c.workers;
  h.min_gap_ms = c.min_gap_ms;
  h.duration_s = c.duration_s;
  h.seed = c.seed;
  h.latency = c.mode == RunMode::Sim ? c.latency.to_string() : "measured";
  h.pinning = c.pinning;
  h.track = c.track.empty() ? "builtin:oval" : c.track;
  h.params = c.params.empty() ? "builtin:default" : c.params;
  h.mpcc = c.mpcc.empty() ? "builtin:default" : c.mpcc;
  return h;
}

}  // namespace detail

RunLog run_system(const RunConfig& config, const Scenario& scenario) {
  config.validate();
  return config.mode == RunMode::Sim ? detail::run_sim(config, scenario) : detail::run_wall(config, scenario);
}

}  // namespace tlr
