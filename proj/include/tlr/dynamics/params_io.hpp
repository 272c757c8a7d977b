#pragma once

#include <filesystem>
#include <string>

#include "tlr/dynamics/vehicle.hpp"

namespace tlr {

// Vehicle parameter file: a flat YAML map. Missing keys keep their defaults,
// unknown keys are rejected.
//
//   m, lf, lr, Iz            mass [kg], axle distances [m], yaw inertia [kg m^2]
//   Bf, Cf, Df / Br, Cr, Dr  front / rear Pacejka coefficients (D in N)
//   Cm1, Cm2, Cr0, Cr2       drivetrain
//   d_min, d_max, delta_max  input bounds
//   vx_guard                 slip-angle denominator floor [m/s]

VehicleParams parse_vehicle_params(const std::string& yaml_text, const std::string& source = "<string>");
VehicleParams load_vehicle_params(const std::filesystem::path& path);
std::string format_vehicle_params(const VehicleParams& params);

}  // namespace tlr
