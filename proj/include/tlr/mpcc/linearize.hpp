#pragma once

#include <stdexcept>

#include <Eigen/Core>

#include "tlr/dynamics/vehicle.hpp"

namespace tlr {

/// (X, Y, phi, vx, vy, omega, theta). phi and theta are not wrapped.
using AugmentedState = Eigen::Matrix<double, 7, 1>;
/// (d, delta, v_theta)
using AugmentedInput = Eigen::Vector3d;

namespace aug {
inline constexpr int kX = 0;
inline constexpr int kY = 1;
inline constexpr int kPhi = 2;
inline constexpr int kVx = 3;
inline constexpr int kVy = 4;
inline constexpr int kOmega = 5;
inline constexpr int kTheta = 6;
inline constexpr int kStates = 7;

inline constexpr int kDuty = 0;
inline constexpr int kSteer = 1;
inline constexpr int kVTheta = 2;
inline constexpr int kInputs = 3;
}  // namespace aug

class LinearizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kMaxDiscretizationStep = 0.050;  // [s]

/// One RK4 step of the bicycle model over Ts plus theta+ = theta + v_theta Ts.
AugmentedState discrete_map(const AugmentedState& x, const AugmentedInput& u, const VehicleParams& params,
                            double Ts);

/// x+ ~= A x + B u + c, exact at the linearization point.
struct Linearization {
  Eigen::Matrix<double, 7, 7> A;
  Eigen::Matrix<double, 7, 3> B;
  AugmentedState c;
};

/// Jacobians of discrete_map by central differences with step
/// 1e-6 * max(1, |v|); the progress row and columns are set exactly.
/// Throws LinearizationError for Ts outside (0, 50 ms] or non-finite entries.
Linearization discretize_linearize(const AugmentedState& x, const AugmentedInput& u, const VehicleParams& params,
                                   double Ts);

AugmentedState augment(const VehicleState& state, double theta);

}  // namespace tlr
