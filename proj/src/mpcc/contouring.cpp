#include "tlr/mpcc/contouring.hpp"

#include <cmath>

namespace tlr {

ContouringErrors contouring_errors(const Track& track, double theta, double X, double Y) {
  const CenterlineJet j = track.jet(theta);
  const double s = std::sin(j.heading), c = std::cos(j.heading);
  const double dx = X - j.position.x(), dy = Y - j.position.y();
  // d heading / d theta for a parameterization that need not be unit speed.
  const double dphi = (j.d1.x() * j.d2.y() - j.d1.y() * j.d2.x()) / j.d1.squaredNorm();

  ContouringErrors e;
  e.contouring = s * dx - c * dy;
  e.lag = -c * dx - s * dy;
  e.contouring_gradient << s, -c, dphi * (c * dx + s * dy) - (s * j.d1.x() - c * j.d1.y());
  e.lag_gradient << -c, -s, dphi * (s * dx - c * dy) + (c * j.d1.x() + s * j.d1.y());
  return e;
}

}  // namespace tlr
