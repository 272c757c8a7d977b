#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace tlr {

class TrackError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the windowed progress search when no interior minimum exists.
class OffTrackError : public TrackError {
 public:
  using TrackError::TrackError;
};

struct Waypoint {
  double x = 0.0;
  double y = 0.0;
  double half_width = 0.0;
};

struct CenterlinePoint {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // continuous along the lap, winds by +-2pi per lap
  double curvature = 0.0;
  double half_width = 0.0;

  Eigen::Vector2d position() const { return {x, y}; }
  Eigen::Vector2d tangent() const;
  Eigen::Vector2d normal() const;  // left of the direction of travel
};

/// Centerline value and parameter derivatives at one progress value.
struct CenterlineJet {
  Eigen::Vector2d position;
  Eigen::Vector2d d1;  // d position / d theta
  Eigen::Vector2d d2;
  double heading = 0.0;
  double half_width = 0.0;
};

struct TrackSample {
  double theta = 0.0;
  Eigen::Vector2d position;
  Eigen::Vector2d tangent;  // unit
  double heading = 0.0;
  double curvature = 0.0;
  double half_width = 0.0;
};

/// Closed centerline parameterized by progress theta in [0, total_length).
///
/// Internally a periodic cubic spline with uniform knots every ds(), fitted
/// through points resampled at equal arc length, so theta is arc length to
/// within the resampling error. Immutable once built.
class Track {
 public:
  double total_length() const { return length_; }
  double ds() const { return ds_; }
  std::size_t size() const { return samples_.size(); }
  const std::vector<TrackSample>& samples() const { return samples_; }
  /// +1 for counterclockwise layouts, -1 for clockwise.
  int orientation() const { return orientation_; }
  double min_half_width() const { return min_half_width_; }
  double max_half_width() const { return max_half_width_; }

  /// theta mod total_length, in [0, total_length).
  double wrap(double theta) const;

  CenterlineJet jet(double theta) const;
  CenterlinePoint at(double theta) const;

  /// Arc length of the spline over one lap by Gauss-Legendre quadrature.
  double spline_arc_length() const;

 private:
  friend Track build_track(const std::vector<Waypoint>&, double);

  double length_ = 0.0;
  double ds_ = 0.0;
  int orientation_ = 1;
  double min_half_width_ = 0.0;
  double max_half_width_ = 0.0;
  std::vector<TrackSample> samples_;
  // Second derivatives of the x/y splines at the knots.
  std::vector<double> mx_;
  std::vector<double> my_;
};

/// Builds a track from a closed waypoint loop (last connects to first; an
/// explicit duplicate of the first point at the end is dropped). Throws
/// TrackError on fewer than 4 points, coincident neighbours, non-positive
/// half-widths, self-intersection, or ds >= length / 8.
Track build_track(const std::vector<Waypoint>& waypoints, double ds = 0.05);

CenterlinePoint centerline_point(const Track& track, double theta);

inline constexpr double kProgressWindow = 2.0;  // [m]

/// Local minimizer of the distance to the centerline within
/// [theta_hint - window, theta_hint + window]. The result is not wrapped; it
/// lies in the same lap frame as the hint. Throws OffTrackError when the
/// minimum sits on a window end or the point is more than 5 half-widths away.
double project_progress(const Track& track, const Eigen::Vector2d& position, double theta_hint,
                        double window = kProgressWindow);

/// Coarse scan over the whole lap followed by a local refinement. Returns a
/// wrapped theta.
double project_progress_global(const Track& track, const Eigen::Vector2d& position);

/// normal . p <= offset
struct Halfspace {
  Eigen::Vector2d normal;
  double offset = 0.0;

  double slack(const Eigen::Vector2d& p) const { return offset - normal.dot(p); }
};

struct BorderHalfspaces {
  Halfspace left;
  Halfspace right;
};

/// Linearized track borders at theta, pulled in by `margin`.
BorderHalfspaces border_halfspaces(const Track& track, double theta, double margin);

/// Stadium loop: two straights of length (length - width) joined by
/// semicircles of radius width / 2, counterclockwise, starting at the middle
/// of the lower straight. Points are equally spaced in arc length.
std::vector<Waypoint> generate_oval(double length, double width, double half_width, int n_points);

/// CSV with header `x_m,y_m,half_width_m`.
std::vector<Waypoint> read_track_csv(std::istream& in, const std::string& source = "<stream>");
std::vector<Waypoint> load_track_csv(const std::filesystem::path& path);
void write_track_csv(std::ostream& out, const std::vector<Waypoint>& waypoints);

}  // namespace tlr
