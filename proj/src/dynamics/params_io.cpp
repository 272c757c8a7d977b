#include "tlr/dynamics/params_io.hpp"

#include <iomanip>
#include <sstream>

#include "../common/flat_config.hpp"

namespace tlr {

namespace {

VehicleParams from_node(const YAML::Node& root, const std::string& source) {
  VehicleParams p = default_vehicle_params();
  detail::FlatConfig cfg(root, source);
  cfg.get("m", p.m);
  cfg.get("lf", p.lf);
  cfg.get("lr", p.lr);
  cfg.get("Iz", p.Iz);
  cfg.get("Bf", p.tire_front.B);
  cfg.get("Cf", p.tire_front.C);
  cfg.get("Df", p.tire_front.D);
  cfg.get("Br", p.tire_rear.B);
  cfg.get("Cr", p.tire_rear.C);
  cfg.get("Dr", p.tire_rear.D);
  cfg.get("Cm1", p.drivetrain.Cm1);
  cfg.get("Cm2", p.drivetrain.Cm2);
  cfg.get("Cr0", p.drivetrain.Cr0);
  cfg.get("Cr2", p.drivetrain.Cr2);
  cfg.get("d_min", p.bounds.d_min);
  cfg.get("d_max", p.bounds.d_max);
  cfg.get("delta_max", p.bounds.delta_max);
  cfg.get("vx_guard", p.vx_guard);
  cfg.reject_unknown();
  try {
    p.validate();
  } catch (const DynamicsError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return p;
}

}  // namespace

VehicleParams parse_vehicle_params(const std::string& yaml_text, const std::string& source) {
  return from_node(detail::load_yaml_text(yaml_text, source), source);
}

VehicleParams load_vehicle_params(const std::filesystem::path& path) {
  return from_node(detail::load_yaml_file(path.string()), path.string());
}

std::string format_vehicle_params(const VehicleParams& p) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "m: " << p.m << "\nlf: " << p.lf << "\nlr: " << p.lr << "\nIz: " << p.Iz << "\n"
      << "Bf: " << p.tire_front.B << "\nCf: " << p.tire_front.C << "\nDf: " << p.tire_front.D << "\n"
      << "Br: " << p.tire_rear.B << "\nCr: " << p.tire_rear.C << "\nDr: " << p.tire_rear.D << "\n"
      << "Cm1: " << p.drivetrain.Cm1 << "\nCm2: " << p.drivetrain.Cm2 << "\nCr0: " << p.drivetrain.Cr0
      << "\nCr2: " << p.drivetrain.Cr2 << "\n"
      << "d_min: " << p.bounds.d_min << "\nd_max: " << p.bounds.d_max << "\ndelta_max: " << p.bounds.delta_max
      << "\nvx_guard: " << p.vx_guard << "\n";
  return out.str();
}

}  // namespace tlr
