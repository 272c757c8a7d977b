#pragma once

#include <Eigen/Core>

#include "tlr/track/track.hpp"

namespace tlr {

/// Contouring (lateral) and lag (longitudinal) errors of a point against the
/// centerline point at progress theta, with gradients w.r.t. (X, Y, theta).
///
///   e_c =  sin(Phi) (X - Xref) - cos(Phi) (Y - Yref)
///   e_l = -cos(Phi) (X - Xref) - sin(Phi) (Y - Yref)
struct ContouringErrors {
  double contouring = 0.0;
  double lag = 0.0;
  Eigen::Vector3d contouring_gradient = Eigen::Vector3d::Zero();
  Eigen::Vector3d lag_gradient = Eigen::Vector3d::Zero();
};

ContouringErrors contouring_errors(const Track& track, double theta, double X, double Y);

}  // namespace tlr
