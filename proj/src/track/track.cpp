#include "tlr/track/track.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "tlr/dynamics/vehicle.hpp"

namespace tlr {

namespace {

// 5-point Gauss-Legendre nodes and weights on [-1, 1].
constexpr std::array<double, 5> kGaussNodes = {0.0, -0.5384693101056831, 0.5384693101056831,
                                               -0.9061798459386640, 0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                                 0.2369268850561891, 0.2369268850561891};

// Periodic interpolating cubic spline through (t_i, y_i) with period T.
// Stores knot second derivatives.
std::vector<double> periodic_second_derivatives(const std::vector<double>& t, const std::vector<double>& y,
                                                double period) {
  const int n = static_cast<int>(t.size());
  auto h = [&](int i) {
    const int j = (i + n) % n;
    return j + 1 < n ? t[j + 1] - t[j] : period - t[j] + t[0];
  };
  auto yv = [&](int i) { return y[static_cast<std::size_t>((i % n + n) % n)]; };

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(3 * n));
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    const double hp = h(i - 1), hi = h(i);
    trip.emplace_back(i, (i - 1 + n) % n, hp);
    trip.emplace_back(i, i, 2.0 * (hp + hi));
    trip.emplace_back(i, (i + 1) % n, hi);
    rhs[i] = 6.0 * ((yv(i + 1) - yv(i)) / hi - (yv(i) - yv(i - 1)) / hp);
  }
  Eigen::SparseMatrix<double> K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success) throw TrackError("spline system is singular");
  const Eigen::VectorXd m = lu.solve(rhs);
  return {m.data(), m.data() + n};
}

struct SplineEval {
  double value, d1, d2;
};

SplineEval eval_segment(double y0, double y1, double m0, double m1, double h, double u) {
  const double a = h - u, b = u;
  const double c0 = y0 / h - m0 * h / 6.0;
  const double c1 = y1 / h - m1 * h / 6.0;
  return {m0 * a * a * a / (6.0 * h) + m1 * b * b * b / (6.0 * h) + c0 * a + c1 * b,
          -m0 * a * a / (2.0 * h) + m1 * b * b / (2.0 * h) - c0 + c1, (m0 * a + m1 * b) / h};
}

// Planar periodic spline on arbitrary knots, used for the chord-length fit.
struct ChordSpline {
  std::vector<double> t, x, y, mx, my;
  double period = 0.0;

  std::size_t n() const { return t.size(); }
  double h(std::size_t i) const { return i + 1 < n() ? t[i + 1] - t[i] : period - t[i] + t[0]; }

  std::pair<Eigen::Vector2d, Eigen::Vector2d> eval(std::size_t i, double u) const {
    const std::size_t j = (i + 1) % n();
    const SplineEval ex = eval_segment(x[i], x[j], mx[i], mx[j], h(i), u);
    const SplineEval ey = eval_segment(y[i], y[j], my[i], my[j], h(i), u);
    return {{ex.value, ey.value}, {ex.d1, ey.d1}};
  }

  double speed(std::size_t i, double u) const { return eval(i, u).second.norm(); }

  // Arc length of segment i from its start to local parameter u.
  double arc(std::size_t i, double u) const {
    constexpr int kPieces = 4;
    double sum = 0.0;
    const double w = u / kPieces;
    for (int p = 0; p < kPieces; ++p) {
      const double mid = (p + 0.5) * w;
      for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
        sum += kGaussWeights[q] * speed(i, mid + 0.5 * w * kGaussNodes[q]) * 0.5 * w;
      }
    }
    return sum;
  }
};

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_intersect(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2, const Eigen::Vector2d& q1,
                        const Eigen::Vector2d& q2) {
  auto orient = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
    const double v = cross(b - a, c - a);
    return (v > 0.0) - (v < 0.0);
  };
  auto on_segment = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
    return std::min(a.x(), b.x()) <= c.x() && c.x() <= std::max(a.x(), b.x()) && std::min(a.y(), b.y()) <= c.y() &&
           c.y() <= std::max(a.y(), b.y());
  };
  const int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2), o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

// Throws if the closed polygon through `pts` crosses itself.
void check_simple_loop(const std::vector<Eigen::Vector2d>& pts, const char* what) {
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a1 = pts[i];
    const auto& a2 = pts[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the closing edge
      if (segments_intersect(a1, a2, pts[j], pts[(j + 1) % n])) {
        throw TrackError(std::string(what) + " is self-intersecting (edges " + std::to_string(i) + " and " +
                         std::to_string(j) + ")");
      }
    }
  }
}

double signed_area(const std::vector<Eigen::Vector2d>& pts) {
  double a = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) a += cross(pts[i], pts[(i + 1) % pts.size()]);
  return 0.5 * a;
}

}  // namespace

Eigen::Vector2d CenterlinePoint::tangent() const { return {std::cos(heading), std::sin(heading)}; }
Eigen::Vector2d CenterlinePoint::normal() const { return {-std::sin(heading), std::cos(heading)}; }

double Track::wrap(double theta) const {
  double w = std::fmod(theta, length_);
  if (w < 0.0) w += length_;
  if (w >= length_) w = 0.0;
  return w;
}

CenterlineJet Track::jet(double theta) const {
  const double w = wrap(theta);
  const std::size_t n = samples_.size();
  std::size_t i = std::min(static_cast<std::size_t>(w / ds_), n - 1);
  const double u = w - static_cast<double>(i) * ds_;
  const std::size_t j = (i + 1) % n;
  const TrackSample& s0 = samples_[i];
  const TrackSample& s1 = samples_[j];
  const SplineEval ex = eval_segment(s0.position.x(), s1.position.x(), mx_[i], mx_[j], ds_, u);
  const SplineEval ey = eval_segment(s0.position.y(), s1.position.y(), my_[i], my_[j], ds_, u);

  CenterlineJet out;
  out.position = {ex.value, ey.value};
  out.d1 = {ex.d1, ey.d1};
  out.d2 = {ex.d2, ey.d2};
  out.heading = s0.heading + normalize_angle(std::atan2(ey.d1, ex.d1) - s0.heading);
  const double frac = u / ds_;
  out.half_width = (1.0 - frac) * s0.half_width + frac * s1.half_width;
  return out;
}

CenterlinePoint Track::at(double theta) const {
  const CenterlineJet j = jet(theta);
  const double speed = j.d1.norm();
  return CenterlinePoint{j.position.x(), j.position.y(), j.heading, cross(j.d1, j.d2) / (speed * speed * speed),
                         j.half_width};
}

double Track::spline_arc_length() const {
  double total = 0.0;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const std::size_t j = (i + 1) % samples_.size();
    for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
      const double u = 0.5 * ds_ * (1.0 + kGaussNodes[q]);
      const double dx = eval_segment(samples_[i].position.x(), samples_[j].position.x(), mx_[i], mx_[j], ds_, u).d1;
      const double dy = eval_segment(samples_[i].position.y(), samples_[j].position.y(), my_[i], my_[j], ds_, u).d1;
      total += kGaussWeights[q] * std::hypot(dx, dy) * 0.5 * ds_;
    }
  }
  return total;
}

Track build_track(const std::vector<Waypoint>& input, double ds) {
  if (!(ds > 0.0) || !std::isfinite(ds)) throw TrackError("ds must be > 0");
  std::vector<Waypoint> wps = input;
  if (wps.size() >= 2 && wps.front().x == wps.back().x && wps.front().y == wps.back().y) wps.pop_back();
  if (wps.size() < 4) throw TrackError("a track needs at least 4 waypoints, got " + std::to_string(wps.size()));

  std::vector<Eigen::Vector2d> pts;
  pts.reserve(wps.size());
  for (std::size_t i = 0; i < wps.size(); ++i) {
    const Waypoint& w = wps[i];
    if (!std::isfinite(w.x) || !std::isfinite(w.y) || !std::isfinite(w.half_width)) {
      throw TrackError("waypoint " + std::to_string(i) + " is not finite");
    }
    if (!(w.half_width > 0.0)) throw TrackError("waypoint " + std::to_string(i) + " has half_width <= 0");
    pts.emplace_back(w.x, w.y);
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if ((pts[(i + 1) % pts.size()] - pts[i]).norm() == 0.0) {
      throw TrackError("waypoints " + std::to_string(i) + " and " + std::to_string((i + 1) % pts.size()) +
                       " coincide");
    }
  }
  check_simple_loop(pts, "waypoint loop");
  const double area = signed_area(pts);
  if (area == 0.0) throw TrackError("waypoint loop encloses no area");

  // Chord-length parameterized periodic spline through the waypoints.
  ChordSpline chord;
  chord.t.resize(pts.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    chord.t[i] = acc;
    chord.x.push_back(pts[i].x());
    chord.y.push_back(pts[i].y());
    acc += (pts[(i + 1) % pts.size()] - pts[i]).norm();
  }
  chord.period = acc;
  chord.mx = periodic_second_derivatives(chord.t, chord.x, chord.period);
  chord.my = periodic_second_derivatives(chord.t, chord.y, chord.period);

  std::vector<double> seg_start(pts.size() + 1, 0.0);
  for (std::size_t i = 0; i < pts.size(); ++i) seg_start[i + 1] = seg_start[i] + chord.arc(i, chord.h(i));
  const double length = seg_start.back();
  if (ds >= length / 8.0) {
    throw TrackError("ds must be < loop length / 8 (length " + std::to_string(length) + ")");
  }

  // Resample at equal arc length.
  const std::size_t n = std::max<std::size_t>(8, static_cast<std::size_t>(std::llround(length / ds)));
  const double step = length / static_cast<double>(n);
  std::vector<double> xs(n), ys(n), hws(n);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = static_cast<double>(k) * step;
    while (seg + 1 < pts.size() && seg_start[seg + 1] <= s) ++seg;
    const double h = chord.h(seg);
    const double target = s - seg_start[seg];
    double u = h * target / (seg_start[seg + 1] - seg_start[seg]);
    for (int it = 0; it < 30; ++it) {
      const double f = chord.arc(seg, u) - target;
      const double du = f / chord.speed(seg, u);
      u = std::clamp(u - du, 0.0, h);
      if (std::abs(du) < 1e-13 * std::max(1.0, h)) break;
    }
    const Eigen::Vector2d p = chord.eval(seg, u).first;
    xs[k] = p.x();
    ys[k] = p.y();
    const double frac = u / h;
    hws[k] = (1.0 - frac) * wps[seg].half_width + frac * wps[(seg + 1) % wps.size()].half_width;
  }

  Track track;
  track.length_ = length;
  track.ds_ = step;
  track.orientation_ = area > 0.0 ? 1 : -1;
  std::vector<double> knots(n);
  for (std::size_t k = 0; k < n; ++k) knots[k] = static_cast<double>(k) * step;
  track.mx_ = periodic_second_derivatives(knots, xs, length);
  track.my_ = periodic_second_derivatives(knots, ys, length);

  track.samples_.resize(n);
  std::vector<Eigen::Vector2d> resampled(n);
  for (std::size_t k = 0; k < n; ++k) {
    TrackSample& s = track.samples_[k];
    s.theta = knots[k];
    s.position = {xs[k], ys[k]};
    s.half_width = hws[k];
    resampled[k] = s.position;
  }
  double prev_heading = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    TrackSample& s = track.samples_[k];
    const std::size_t j = (k + 1) % n;
    const SplineEval ex = eval_segment(xs[k], xs[j], track.mx_[k], track.mx_[j], step, 0.0);
    const SplineEval ey = eval_segment(ys[k], ys[j], track.my_[k], track.my_[j], step, 0.0);
    const Eigen::Vector2d d1(ex.d1, ey.d1), d2(ex.d2, ey.d2);
    const double speed = d1.norm();
    if (!(speed > 0.0)) throw TrackError("degenerate centerline tangent");
    s.tangent = d1 / speed;
    const double raw = std::atan2(d1.y(), d1.x());
    s.heading = k == 0 ? raw : prev_heading + normalize_angle(raw - prev_heading);
    prev_heading = s.heading;
    s.curvature = cross(d1, d2) / (speed * speed * speed);
  }
  check_simple_loop(resampled, "resampled centerline");

  const auto [lo, hi] = std::minmax_element(hws.begin(), hws.end());
  track.min_half_width_ = *lo;
  track.max_half_width_ = *hi;
  return track;
}

CenterlinePoint centerline_point(const Track& track, double theta) { return track.at(theta); }

namespace {

double squared_distance(const Track& track, const Eigen::Vector2d& p, double theta) {
  return (track.jet(theta).position - p).squaredNorm();
}

}  // namespace

double project_progress(const Track& track, const Eigen::Vector2d& p, double hint, double window) {
  if (!std::isfinite(hint) || !p.allFinite()) throw OffTrackError("project_progress: non-finite input");
  const double step = track.ds() / 4.0;
  const int count = static_cast<int>(std::ceil(2.0 * window / step));
  const double start = hint - window;
  int best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= count; ++k) {
    const double d2 = squared_distance(track, p, start + k * step);
    if (d2 <= best_d2) {  // ties go to the larger theta
      best_d2 = d2;
      best = k;
    }
  }
  if (best == 0 || best == count) {
    throw OffTrackError("project_progress: no interior minimum within +-" + std::to_string(window) +
                        " m of hint " + std::to_string(hint));
  }

  // Golden-section refinement on the bracketing cells.
  constexpr double kInvPhi = 0.6180339887498949;
  double a = start + (best - 1) * step, b = start + (best + 1) * step;
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double fc = squared_distance(track, p, c), fd = squared_distance(track, p, d);
  while (b - a > 1e-4) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = squared_distance(track, p, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = squared_distance(track, p, d);
    }
  }
  double theta = 0.5 * (a + b);
  double f = squared_distance(track, p, theta);

  // Newton polish on the stationarity condition (p - c) . c' = 0.
  const double lo = start + (best - 1) * step, hi = start + (best + 1) * step;
  for (int it = 0; it < 4; ++it) {
    const CenterlineJet j = track.jet(theta);
    const Eigen::Vector2d r = p - j.position;
    const double grad = -r.dot(j.d1);
    const double curv = j.d1.squaredNorm() - r.dot(j.d2);
    if (!(curv > 0.0)) break;
    const double next = std::clamp(theta - grad / curv, lo, hi);
    const double fn = squared_distance(track, p, next);
    if (!(fn <= f)) break;
    const bool done = std::abs(next - theta) < 1e-12;
    theta = next;
    f = fn;
    if (done) break;
  }

  const double half_width = track.jet(theta).half_width;
  if (std::sqrt(f) > 5.0 * half_width) {
    throw OffTrackError("project_progress: point is " + std::to_string(std::sqrt(f)) +
                        " m from the centerline");
  }
  return theta;
}

double project_progress_global(const Track& track, const Eigen::Vector2d& p) {
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  const auto& samples = track.samples();
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double d2 = (samples[k].position - p).squaredNorm();
    if (d2 <= best_d2) {
      best_d2 = d2;
      best = k;
    }
  }
  const double window = std::min(kProgressWindow, 0.25 * track.total_length());
  return track.wrap(project_progress(track, p, samples[best].theta, window));
}

BorderHalfspaces border_halfspaces(const Track& track, double theta, double margin) {
  const CenterlinePoint c = track.at(theta);
  const Eigen::Vector2d n = c.normal();
  const double room = c.half_width - margin;
  return BorderHalfspaces{Halfspace{n, n.dot(c.position()) + room}, Halfspace{-n, -n.dot(c.position()) + room}};
}

std::vector<Waypoint> generate_oval(double length, double width, double half_width, int n_points) {
  if (!(length > 0.0) || !(width > 0.0) || !(half_width > 0.0)) {
    throw TrackError("generate_oval: dimensions must be positive");
  }
  if (length < width) throw TrackError("generate_oval: length must be >= width");
  if (n_points < 8) throw TrackError("generate_oval: need at least 8 points");

  const double r = 0.5 * width;
  const double a = 0.5 * (length - width);  // half straight
  const double arc = std::numbers::pi * r;
  const double perimeter = 4.0 * a + 2.0 * arc;
  std::vector<Waypoint> out;
  out.reserve(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) {
    const double s = perimeter * i / n_points;
    double x, y;
    if (s < a) {
      x = s;
      y = -r;
    } else if (s < a + arc) {
      const double psi = -0.5 * std::numbers::pi + (s - a) / r;
      x = a + r * std::cos(psi);
      y = r * std::sin(psi);
    } else if (s < 3.0 * a + arc) {
      x = a - (s - a - arc);
      y = r;
    } else if (s < 3.0 * a + 2.0 * arc) {
      const double psi = 0.5 * std::numbers::pi + (s - 3.0 * a - arc) / r;
      x = -a + r * std::cos(psi);
      y = r * std::sin(psi);
    } else {
      x = -a + (s - 3.0 * a - 2.0 * arc);
      y = -r;
    }
    out.push_back({x, y, half_width});
  }
  return out;
}

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<Waypoint> read_track_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "x_m,y_m,half_width_m") {
    throw TrackError(source + ": expected header 'x_m,y_m,half_width_m'");
  }
  std::vector<Waypoint> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::array<double, 3> vals{};
    int col = 0;
    while (std::getline(ls, cell, ',')) {
      if (col >= 3) throw TrackError(source + ":" + std::to_string(row) + ": too many columns");
      try {
        std::size_t used = 0;
        const std::string t = trim(cell);
        vals[static_cast<std::size_t>(col)] = std::stod(t, &used);
        if (used != t.size()) throw std::invalid_argument(t);
      } catch (const std::exception&) {
        throw TrackError(source + ":" + std::to_string(row) + ": bad number '" + cell + "'");
      }
      ++col;
    }
    if (col != 3) throw TrackError(source + ":" + std::to_string(row) + ": expected 3 columns");
    out.push_back({vals[0], vals[1], vals[2]});
  }
  return out;
}

std::vector<Waypoint> load_track_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TrackError("cannot open track file " + path.string());
  return read_track_csv(in, path.string());
}

void write_track_csv(std::ostream& out, const std::vector<Waypoint>& waypoints) {
  out << "x_m,y_m,half_width_m\n" << std::setprecision(17);
  for (const Waypoint& w : waypoints) out << w.x << ',' << w.y << ',' << w.half_width << '\n';
}

}  // namespace tlr
