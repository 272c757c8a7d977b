#pragma once

#include <filesystem>
#include <string>

namespace tlr {

/// Controller tuning. Input bounds for d and delta come from VehicleParams.
struct MpccConfig {
  int N = 20;
  double Ts = 0.025;            // [s]
  double q_c = 1.0;             // contouring weight
  double q_l = 100.0;           // lag weight
  double gamma = 1.0;           // progress reward
  double r_d = 0.01;            // rate penalty on d
  double r_delta = 10.0;        // rate penalty on delta
  double r_vtheta = 0.001;      // rate penalty on v_theta
  double q_s = 1000.0;          // border slack penalty
  double v_theta_max = 5.0;     // [m/s]
  double border_margin = 0.1;   // [m]
  double regularization = 1e-8;
  double tol = 1e-6;
  int max_iter = 4000;
  bool polish = true;
  int relinearizations = 1;
  int cold_start_relinearizations = 3;

  /// Throws ConfigError.
  void validate() const;
};

MpccConfig parse_mpcc_config(const std::string& yaml_text, const std::string& source = "<string>");
MpccConfig load_mpcc_config(const std::filesystem::path& path);

}  // namespace tlr
