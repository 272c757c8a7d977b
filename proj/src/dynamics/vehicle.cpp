#include "tlr/dynamics/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace tlr {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DynamicsError(std::string("invalid vehicle params: ") + what);
}

bool finite_and_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

bool VehicleState::finite() const {
  return std::isfinite(X) && std::isfinite(Y) && std::isfinite(phi) && std::isfinite(vx) &&
         std::isfinite(vy) && std::isfinite(omega);
}

void VehicleParams::validate() const {
  require(finite_and_positive(m), "m must be > 0");
  require(finite_and_positive(Iz), "Iz must be > 0");
  require(finite_and_positive(lf), "lf must be > 0");
  require(finite_and_positive(lr), "lr must be > 0");
  for (const auto* tire : {&tire_front, &tire_rear}) {
    require(finite_and_positive(tire->B), "Pacejka B must be > 0");
    require(finite_and_positive(tire->C), "Pacejka C must be > 0");
    require(finite_and_positive(tire->D), "Pacejka D must be > 0");
  }
  require(std::isfinite(drivetrain.Cm1) && std::isfinite(drivetrain.Cm2) && std::isfinite(drivetrain.Cr0) &&
              std::isfinite(drivetrain.Cr2),
          "drivetrain coefficients must be finite");
  require(std::isfinite(bounds.d_min) && std::isfinite(bounds.d_max) && bounds.d_min < bounds.d_max,
          "d_min < d_max required");
  require(finite_and_positive(bounds.delta_max), "delta_max must be > 0");
  require(finite_and_positive(vx_guard), "vx_guard must be > 0");
}

VehicleParams default_vehicle_params() {
  VehicleParams p;
  p.tire_front.D = 0.35 * p.m * 9.81;
  p.tire_rear.D = 0.35 * p.m * 9.81;
  return p;
}

DynamicsVector to_vector(const VehicleState& s) {
  DynamicsVector x;
  x << s.X, s.Y, s.phi, s.vx, s.vy, s.omega;
  return x;
}

VehicleState from_vector(const DynamicsVector& x, Nanos timestamp) {
  return VehicleState{x[0], x[1], x[2], x[3], x[4], x[5], timestamp};
}

DynamicsVector to_vector(const StateDerivative& f) {
  DynamicsVector x;
  x << f.X, f.Y, f.phi, f.vx, f.vy, f.omega;
  return x;
}

double normalize_angle(double angle) {
  double a = std::remainder(angle, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

namespace {

SlipAngles slip_angles_raw(double vx, double vy, double omega, double delta, const VehicleParams& p) {
  const double vx_eff = std::max(vx, p.vx_guard);
  return SlipAngles{-std::atan((omega * p.lf + vy) / vx_eff) + delta, std::atan((omega * p.lr - vy) / vx_eff)};
}

TireForces tire_forces_raw(double vx, double vy, double omega, double d, double delta, const VehicleParams& p) {
  const SlipAngles alpha = slip_angles_raw(vx, vy, omega, delta, p);
  const DrivetrainCoeffs& dt = p.drivetrain;
  return TireForces{(dt.Cm1 - dt.Cm2 * vx) * d - dt.Cr0 - dt.Cr2 * vx * vx,
                    pacejka_lateral(p.tire_rear, alpha.rear), pacejka_lateral(p.tire_front, alpha.front)};
}

}  // namespace

SlipAngles slip_angles(const VehicleState& s, const ControlInput& u, const VehicleParams& p) {
  return slip_angles_raw(s.vx, s.vy, s.omega, u.delta, p);
}

double pacejka_lateral(const PacejkaCoeffs& tire, double alpha) {
  return tire.D * std::sin(tire.C * std::atan(tire.B * alpha));
}

TireForces tire_forces(const VehicleState& s, const ControlInput& u, const VehicleParams& p) {
  return tire_forces_raw(s.vx, s.vy, s.omega, u.d, u.delta, p);
}

DynamicsVector dynamics(const DynamicsVector& x, double d, double delta, const VehicleParams& p) {
  const double phi = x[2], vx = x[3], vy = x[4], omega = x[5];
  const TireForces f = tire_forces_raw(vx, vy, omega, d, delta, p);
  const double sin_delta = std::sin(delta), cos_delta = std::cos(delta);
  const double sin_phi = std::sin(phi), cos_phi = std::cos(phi);

  DynamicsVector dx;
  dx[0] = vx * cos_phi - vy * sin_phi;
  dx[1] = vx * sin_phi + vy * cos_phi;
  dx[2] = omega;
  dx[3] = (f.Frx - f.Ffy * sin_delta + p.m * vy * omega) / p.m;
  dx[4] = (f.Fry + f.Ffy * cos_delta - p.m * vx * omega) / p.m;
  dx[5] = (f.Ffy * p.lf * cos_delta - f.Fry * p.lr) / p.Iz;
  return dx;
}

StateDerivative state_derivative(const VehicleState& s, const ControlInput& u, const VehicleParams& p) {
  const DynamicsVector dx = dynamics(to_vector(s), u.d, u.delta, p);
  return StateDerivative{dx[0], dx[1], dx[2], dx[3], dx[4], dx[5]};
}

DynamicsVector rk4_map(const DynamicsVector& x, double d, double delta, const VehicleParams& p, double dt) {
  const DynamicsVector k1 = dynamics(x, d, delta, p);
  const DynamicsVector k2 = dynamics(x + 0.5 * dt * k1, d, delta, p);
  const DynamicsVector k3 = dynamics(x + 0.5 * dt * k2, d, delta, p);
  const DynamicsVector k4 = dynamics(x + dt * k3, d, delta, p);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

VehicleState rk4_step(const VehicleState& s, const ControlInput& u, const VehicleParams& p, double dt) {
  if (!(dt > 0.0) || dt > kMaxIntegratorStep) {
    std::ostringstream msg;
    msg << "rk4_step: dt must be in (0, " << kMaxIntegratorStep << "] s, got " << dt;
    throw DynamicsError(msg.str());
  }
  DynamicsVector x = rk4_map(to_vector(s), u.d, u.delta, p, dt);
  if (!x.allFinite()) throw DynamicsError("rk4_step: non-finite state");
  x[2] = normalize_angle(x[2]);
  return from_vector(x, s.timestamp + seconds_to_nanos(dt));
}

std::vector<VehicleState> simulate(const VehicleState& initial, std::span<const ControlInput> inputs,
                                   const VehicleParams& p, double dt, int steps) {
  if (steps < 1) throw DynamicsError("simulate: steps must be >= 1");
  if (inputs.size() != 1 && inputs.size() != static_cast<std::size_t>(steps)) {
    throw DynamicsError("simulate: need one input per step or a single held input");
  }
  std::vector<VehicleState> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(initial);
  for (int k = 0; k < steps; ++k) {
    const ControlInput& u = inputs.size() == 1 ? inputs[0] : inputs[static_cast<std::size_t>(k)];
    try {
      out.push_back(rk4_step(out.back(), u, p, dt));
    } catch (const DynamicsError& e) {
      throw DynamicsError("simulate: step " + std::to_string(k) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace tlr
