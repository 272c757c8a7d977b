#include "tlr/mpcc/linearize.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tlr {

namespace {

constexpr double kRelativeStep = 1e-6;

DynamicsVector vehicle_part(const AugmentedState& x) { return x.head<6>(); }

}  // namespace

AugmentedState augment(const VehicleState& s, double theta) {
  AugmentedState x;
  x << s.X, s.Y, s.phi, s.vx, s.vy, s.omega, theta;
  return x;
}

AugmentedState discrete_map(const AugmentedState& x, const AugmentedInput& u, const VehicleParams& params,
                            double Ts) {
  AugmentedState next;
  next.head<6>() = rk4_map(vehicle_part(x), u[aug::kDuty], u[aug::kSteer], params, Ts);
  next[aug::kTheta] = x[aug::kTheta] + u[aug::kVTheta] * Ts;
  return next;
}

Linearization discretize_linearize(const AugmentedState& x, const AugmentedInput& u, const VehicleParams& params,
                                   double Ts) {
  if (!(Ts > 0.0) || Ts > kMaxDiscretizationStep) {
    std::ostringstream msg;
    msg << "discretize_linearize: Ts must be in (0, " << kMaxDiscretizationStep << "] s, got " << Ts;
    throw LinearizationError(msg.str());
  }
  const DynamicsVector x0 = vehicle_part(x);
  const double d = u[aug::kDuty], delta = u[aug::kSteer];

  Linearization lin;
  lin.A.setZero();
  lin.B.setZero();
  for (int j = 0; j < 6; ++j) {
    const double h = kRelativeStep * std::max(1.0, std::abs(x0[j]));
    DynamicsVector xp = x0, xm = x0;
    xp[j] += h;
    xm[j] -= h;
    lin.A.block<6, 1>(0, j) = (rk4_map(xp, d, delta, params, Ts) - rk4_map(xm, d, delta, params, Ts)) / (2.0 * h);
  }
  for (int j = 0; j < 2; ++j) {
    const double h = kRelativeStep * std::max(1.0, std::abs(u[j]));
    const double dp = j == 0 ? d + h : d, dm = j == 0 ? d - h : d;
    const double sp = j == 1 ? delta + h : delta, sm = j == 1 ? delta - h : delta;
    lin.B.block<6, 1>(0, j) = (rk4_map(x0, dp, sp, params, Ts) - rk4_map(x0, dm, sm, params, Ts)) / (2.0 * h);
  }
  lin.A(aug::kTheta, aug::kTheta) = 1.0;
  lin.B(aug::kTheta, aug::kVTheta) = Ts;

  const AugmentedState f = discrete_map(x, u, params, Ts);
  lin.c = f - lin.A * x - lin.B * u;
  if (!lin.A.allFinite() || !lin.B.allFinite() || !lin.c.allFinite()) {
    throw LinearizationError("discretize_linearize: non-finite Jacobian");
  }
  return lin;
}

}  // namespace tlr
