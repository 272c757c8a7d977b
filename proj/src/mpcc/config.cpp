#include "tlr/mpcc/config.hpp"

#include <cmath>

#include "../common/flat_config.hpp"

namespace tlr {

namespace {

MpccConfig from_node(const YAML::Node& root, const std::string& source) {
  MpccConfig c;
  detail::FlatConfig cfg(root, source);
  cfg.get("N", c.N);
  cfg.get("Ts", c.Ts);
  cfg.get("q_c", c.q_c);
  cfg.get("q_l", c.q_l);
  cfg.get("gamma", c.gamma);
  cfg.get("r_d", c.r_d);
  cfg.get("r_delta", c.r_delta);
  cfg.get("r_vtheta", c.r_vtheta);
  cfg.get("q_s", c.q_s);
  cfg.get("v_theta_max", c.v_theta_max);
  cfg.get("border_margin", c.border_margin);
  cfg.get("regularization", c.regularization);
  cfg.get("tol", c.tol);
  cfg.get("max_iter", c.max_iter);
  cfg.get("polish", c.polish);
  cfg.get("relinearizations", c.relinearizations);
  cfg.get("cold_start_relinearizations", c.cold_start_relinearizations);
  cfg.reject_unknown();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("mpcc config: ") + what);
}

}  // namespace

void MpccConfig::validate() const {
  require(N >= 2, "N must be >= 2");
  require(Ts > 0.0 && Ts <= 0.050, "Ts must be in (0, 0.05] s");
  for (double w : {q_c, gamma, r_d, r_delta, r_vtheta, q_s, regularization}) {
    require(std::isfinite(w) && w >= 0.0, "weights must be finite and >= 0");
  }
  require(std::isfinite(q_l) && q_l > 0.0, "q_l must be > 0");
  require(std::isfinite(v_theta_max) && v_theta_max > 0.0, "v_theta_max must be > 0");
  require(std::isfinite(border_margin) && border_margin >= 0.0, "border_margin must be >= 0");
  require(tol > 0.0, "tol must be > 0");
  require(max_iter >= 1, "max_iter must be >= 1");
  require(relinearizations >= 1 && cold_start_relinearizations >= 1, "relinearization counts must be >= 1");
}

MpccConfig parse_mpcc_config(const std::string& yaml_text, const std::string& source) {
  return from_node(detail::load_yaml_text(yaml_text, source), source);
}

MpccConfig load_mpcc_config(const std::filesystem::path& path) {
  return from_node(detail::load_yaml_file(path.string()), path.string());
}

}  // namespace tlr
