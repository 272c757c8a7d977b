#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tlr/time.hpp"

namespace tlr {

class DynamicsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Planar rigid-body state of the car. Pose is in the inertial frame,
/// velocities in the body frame.
struct VehicleState {
  double X = 0.0;      // [m]
  double Y = 0.0;      // [m]
  double phi = 0.0;    // heading [rad], kept in (-pi, pi]
  double vx = 0.0;     // longitudinal [m/s]
  double vy = 0.0;     // lateral [m/s]
  double omega = 0.0;  // yaw rate [rad/s]
  Nanos timestamp = 0;

  bool finite() const;
};

struct ControlInput {
  double d = 0.0;      // duty cycle [-]
  double delta = 0.0;  // steering angle [rad]
  Nanos source_timestamp = 0;
};

struct PacejkaCoeffs {
  double B = 5.0;
  double C = 1.2;
  double D = 0.35 * 3.47 * 9.81;  // peak lateral force [N]
};

struct DrivetrainCoeffs {
  double Cm1 = 12.0;
  double Cm2 = 2.5;
  double Cr0 = 0.6;
  double Cr2 = 0.1;
};

struct InputBounds {
  double d_min = -1.0;
  double d_max = 1.0;
  double delta_max = 0.4;
};

struct VehicleParams {
  double m = 3.47;
  double lf = 0.15;
  double lr = 0.17;
  double Iz = 0.04;
  PacejkaCoeffs tire_front;
  PacejkaCoeffs tire_rear;
  DrivetrainCoeffs drivetrain;
  InputBounds bounds;
  // Slip angles divide by max(vx, vx_guard); the tire model is meaningless near standstill.
  double vx_guard = 0.3;

  /// Throws DynamicsError naming the first offending field.
  void validate() const;
};

/// 1/10-scale placeholder parameter set. Not identified from a real car.
VehicleParams default_vehicle_params();

struct SlipAngles {
  double front = 0.0;
  double rear = 0.0;
};

struct TireForces {
  double Frx = 0.0;  // rear longitudinal [N]
  double Fry = 0.0;  // rear lateral [N]
  double Ffy = 0.0;  // front lateral [N]
};

struct StateDerivative {
  double X = 0.0;
  double Y = 0.0;
  double phi = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;
};

/// Dynamic part of the state as a vector (X, Y, phi, vx, vy, omega).
using DynamicsVector = Eigen::Matrix<double, 6, 1>;

DynamicsVector to_vector(const VehicleState& state);
VehicleState from_vector(const DynamicsVector& x, Nanos timestamp);
DynamicsVector to_vector(const StateDerivative& deriv);

/// Wraps an angle to (-pi, pi].
double normalize_angle(double angle);

SlipAngles slip_angles(const VehicleState& state, const ControlInput& input, const VehicleParams& params);

/// Magic-formula lateral force D sin(C atan(B alpha)).
double pacejka_lateral(const PacejkaCoeffs& tire, double alpha);

TireForces tire_forces(const VehicleState& state, const ControlInput& input, const VehicleParams& params);

StateDerivative state_derivative(const VehicleState& state, const ControlInput& input,
                                 const VehicleParams& params);

/// Bicycle-model vector field on the raw state vector. No angle wrapping.
DynamicsVector dynamics(const DynamicsVector& x, double d, double delta, const VehicleParams& params);

/// One classical RK4 step of `dynamics` with the input held. No dt cap, no
/// wrapping, no finiteness check; the linearization works on this map.
DynamicsVector rk4_map(const DynamicsVector& x, double d, double delta, const VehicleParams& params,
                       double dt);

inline constexpr double kMaxIntegratorStep = 0.010;  // [s]

/// Advances the state by dt seconds (0 < dt <= 10 ms). Heading is wrapped and
/// the timestamp advanced by dt. Throws DynamicsError on a non-finite result.
VehicleState rk4_step(const VehicleState& state, const ControlInput& input, const VehicleParams& params,
                      double dt);

/// Open-loop rollout. `inputs` holds either one input per step or a single
/// input applied throughout. Returns steps + 1 states including `initial`.
std::vector<VehicleState> simulate(const VehicleState& initial, std::span<const ControlInput> inputs,
                                   const VehicleParams& params, double dt, int steps);

}  // namespace tlr
