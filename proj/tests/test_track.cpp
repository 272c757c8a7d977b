#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "tlr/dynamics/vehicle.hpp"
#include "tlr/track/track.hpp"

using namespace tlr;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Waypoint> circle(double radius, int n, double half_width = 0.5) {
  std::vector<Waypoint> w;
  for (int i = 0; i < n; ++i) {
    const double a = 2 * kPi * i / n;
    w.push_back({radius * std::cos(a), radius * std::sin(a), half_width});
  }
  return w;
}

// Total heading change over one lap, summed over fine steps.
double winding(const Track& t) {
  const int steps = 4000;
  double total = 0.0;
  double prev = t.at(0.0).heading;
  for (int k = 1; k <= steps; ++k) {
    const double h = t.at(t.total_length() * k / steps * (1.0 - 1e-12)).heading;
    total += normalize_angle(h - prev);
    prev = h;
  }
  total += normalize_angle(t.at(0.0).heading - prev);
  return total;
}

// Dense brute-force scan of the distance over [lo, hi].
double brute_force_projection(const Track& t, const Eigen::Vector2d& p, double lo, double hi) {
  double best = lo, best_d = 1e300;
  for (double th = lo; th <= hi; th += 1e-5) {
    const double d = (t.at(th).position() - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = th;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("build_track on a circle") {
  const double R = 3.0;
  const Track t = build_track(circle(R, 100), 0.05);
  CHECK(t.total_length() == doctest::Approx(2 * kPi * R).epsilon(0.005));
  CHECK(t.orientation() == 1);
  for (const auto& s : t.samples()) {
    CHECK(s.curvature == doctest::Approx(1.0 / R).epsilon(0.02));
    CHECK(s.tangent.norm() == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(t.spline_arc_length() == doctest::Approx(t.total_length()).epsilon(0.001));

  SUBCASE("centerline lookups") {
    const CenterlinePoint p0 = t.at(0.0);
    CHECK(p0.x == doctest::Approx(t.samples()[0].position.x()));
    CHECK(p0.y == doctest::Approx(t.samples()[0].position.y()));
    const CenterlinePoint pl = t.at(t.total_length());
    CHECK(pl.x == doctest::Approx(p0.x).epsilon(1e-12));
    CHECK(pl.y == doctest::Approx(p0.y).epsilon(1e-12));
    const CenterlinePoint half = t.at(kPi * R);
    CHECK(half.x == doctest::Approx(-R).epsilon(1e-3));
    CHECK(std::abs(half.y) < 1e-2 * R);
  }
  SUBCASE("centerline is continuous") {
    double max_jump = 0.0;
    for (double th = 0.0; th < t.total_length(); th += 1e-3) {
      max_jump = std::max(max_jump, (t.at(th + 1e-3).position() - t.at(th).position()).norm());
    }
    CHECK(max_jump < 1.01e-3);
  }
}

TEST_CASE("heading winds once per lap") {
  // Square with several points per side and cut corners.
  std::vector<Waypoint> sq;
  const double side = 4.0;
  for (int edge = 0; edge < 4; ++edge) {
    for (int k = 1; k < 8; ++k) {
      const double s = side * k / 8.0 - side / 2;
      const double h = side / 2;
      Eigen::Vector2d p = edge == 0 ? Eigen::Vector2d(s, -h)
                          : edge == 1 ? Eigen::Vector2d(h, s)
                          : edge == 2 ? Eigen::Vector2d(-s, h)
                                      : Eigen::Vector2d(-h, -s);
      sq.push_back({p.x(), p.y(), 0.4});
    }
  }
  const Track ccw = build_track(sq, 0.05);
  CHECK(winding(ccw) == doctest::Approx(2 * kPi).epsilon(1e-9));

  std::vector<Waypoint> reversed(sq.rbegin(), sq.rend());
  const Track cw = build_track(reversed, 0.05);
  CHECK(cw.orientation() == -1);
  CHECK(winding(cw) == doctest::Approx(-2 * kPi).epsilon(1e-9));
}

TEST_CASE("build_track rejects bad input") {
  CHECK_THROWS_AS(build_track(circle(2.0, 3), 0.05), TrackError);
  CHECK_THROWS_AS(build_track(circle(2.0, 20), 0.0), TrackError);
  CHECK_THROWS_AS(build_track(circle(2.0, 20), 2 * kPi * 2.0 / 8.0), TrackError);

  auto dup = circle(2.0, 20);
  dup.insert(dup.begin() + 5, dup[5]);
  CHECK_THROWS_AS(build_track(dup, 0.05), TrackError);

  auto narrow = circle(2.0, 20);
  narrow[3].half_width = 0.0;
  CHECK_THROWS_AS(build_track(narrow, 0.05), TrackError);

  // Figure eight.
  std::vector<Waypoint> eight;
  for (int i = 0; i < 40; ++i) {
    const double a = 2 * kPi * i / 40;
    eight.push_back({2 * std::sin(a), std::sin(2 * a), 0.3});
  }
  CHECK_THROWS_AS(build_track(eight, 0.05), TrackError);

  // An explicitly closed loop is accepted.
  auto closed = circle(2.0, 20);
  closed.push_back(closed.front());
  CHECK_NOTHROW(build_track(closed, 0.05));
}

TEST_CASE("half-width interpolation stays within the input range") {
  auto w = circle(3.0, 24);
  for (std::size_t i = 0; i < w.size(); ++i) w[i].half_width = (i % 3 == 0) ? 0.3 : 0.9;
  const Track t = build_track(w, 0.05);
  for (double th = 0.0; th < t.total_length(); th += 0.01) {
    const double hw = t.at(th).half_width;
    CHECK(hw >= 0.3 * 0.95);
    CHECK(hw <= 0.9 * 1.05);
  }
}

TEST_CASE("project_progress") {
  const Track t = build_track(generate_oval(10, 6, 0.8, 200), 0.05);

  SUBCASE("point on the centerline") {
    for (double th : {0.0, 1.3, 7.77, 15.0, 26.0}) {
      const double got = project_progress(t, t.at(th).position(), th);
      CHECK(got == doctest::Approx(th).epsilon(1e-3 / std::max(1.0, th)));
    }
  }
  SUBCASE("lateral offset matches brute force") {
    for (double th : {2.0, 6.1, 11.4, 19.9}) {
      const CenterlinePoint c = t.at(th);
      for (double off : {0.1, -0.1}) {
        const Eigen::Vector2d p = c.position() + off * c.normal();
        const double got = project_progress(t, p, th + 0.3);
        const double oracle = brute_force_projection(t, p, th - 0.5, th + 0.5);
        CHECK(std::abs(got - oracle) < 1e-4);
        CHECK(std::abs(got - th) < 1e-3);
      }
    }
  }
  SUBCASE("roundtrip for all theta") {
    for (double th = 0.0; th < t.total_length(); th += 0.037) {
      REQUIRE(std::abs(project_progress(t, t.at(th).position(), th) - th) < 1e-3);
    }
  }
  SUBCASE("unwrapped across the start line") {
    const double L = t.total_length();
    const double got = project_progress(t, t.at(0.2).position(), L - 0.3);
    CHECK(got == doctest::Approx(L + 0.2).epsilon(1e-6));
  }
  SUBCASE("hint outside the window") {
    CHECK_THROWS_AS(project_progress(t, t.at(10.0).position(), 4.0), OffTrackError);
  }
  SUBCASE("far from the track") {
    CHECK_THROWS_AS(project_progress(t, Eigen::Vector2d(0.0, -3.0 - 5.0), 0.0), OffTrackError);
  }
  SUBCASE("global projection") {
    const CenterlinePoint c = t.at(17.3);
    CHECK(project_progress_global(t, c.position() + 0.2 * c.normal()) == doctest::Approx(17.3).epsilon(1e-4));
  }
}

TEST_CASE("border halfspaces") {
  const Track t = build_track(generate_oval(40, 6, 0.8, 400), 0.05);
  const double margin = 0.1;
  const double th = 8.0;  // middle of the lower straight
  const BorderHalfspaces b = border_halfspaces(t, th, margin);
  const CenterlinePoint c = t.at(th);

  CHECK(b.left.slack(c.position()) == doctest::Approx(c.half_width - margin));
  CHECK(b.right.slack(c.position()) == doctest::Approx(c.half_width - margin));

  const Eigen::Vector2d edge = c.position() + (c.half_width - margin) * c.normal();
  CHECK(std::abs(b.left.slack(edge)) < 1e-12);
  CHECK(b.right.slack(edge) > 0.0);

  // The lower straight runs along +x at y = -3: borders are y <= -3 + 0.7 and -y <= 3 + 0.7.
  CHECK(b.left.normal.x() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(b.left.normal.y() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(b.left.offset == doctest::Approx(-3.0 + 0.7).epsilon(1e-9));
  CHECK(b.right.normal.y() == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(b.right.offset == doctest::Approx(3.0 + 0.7).epsilon(1e-9));
}

TEST_CASE("generate_oval") {
  const auto w = generate_oval(10, 6, 0.8, 200);
  REQUIRE(w.size() == 200);
  const Track t = build_track(w, 0.05);
  CHECK(t.total_length() == doctest::Approx(2 * 4.0 + 2 * kPi * 3.0).epsilon(0.005));
  CHECK(t.orientation() == 1);
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(w[i].x == doctest::Approx(-w[i + 100].x).epsilon(1e-12));
    CHECK(w[i].y == doctest::Approx(-w[i + 100].y).epsilon(1e-12));
  }
  CHECK_THROWS_AS(generate_oval(10, 6, 0.8, 7), TrackError);
  CHECK_THROWS_AS(generate_oval(10, -6, 0.8, 100), TrackError);
  CHECK_THROWS_AS(generate_oval(4, 6, 0.8, 100), TrackError);
}

TEST_CASE("track csv") {
  const auto w = generate_oval(10, 6, 0.8, 32);
  std::stringstream ss;
  write_track_csv(ss, w);
  const auto back = read_track_csv(ss);
  REQUIRE(back.size() == w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(back[i].x == w[i].x);
    CHECK(back[i].y == w[i].y);
    CHECK(back[i].half_width == w[i].half_width);
  }

  std::istringstream bad_header("x,y,w\n1,2,3\n");
  CHECK_THROWS_AS(read_track_csv(bad_header), TrackError);
  std::istringstream bad_row("x_m,y_m,half_width_m\n1,2\n");
  CHECK_THROWS_AS(read_track_csv(bad_row), TrackError);
  std::istringstream bad_num("x_m,y_m,half_width_m\n1,2,abc\n");
  CHECK_THROWS_AS(read_track_csv(bad_num), TrackError);
}

TEST_CASE("mirrored waypoints give a mirrored track") {
  auto w = generate_oval(10, 6, 0.8, 120);
  for (auto& p : w) p.y += 0.37 * std::sin(p.x);
  auto m = w;
  for (auto& p : m) p.y = -p.y;
  const Track a = build_track(w, 0.05);
  const Track b = build_track(m, 0.05);
  CHECK(b.orientation() == -a.orientation());
  CHECK(b.total_length() == doctest::Approx(a.total_length()).epsilon(1e-12));
  for (double th = 0.0; th < a.total_length(); th += 0.5) {
    CHECK(b.at(th).x == doctest::Approx(a.at(th).x).epsilon(1e-12));
    CHECK(b.at(th).y == doctest::Approx(-a.at(th).y).epsilon(1e-12));
    CHECK(b.at(th).curvature == doctest::Approx(-a.at(th).curvature).epsilon(1e-9));
  }
}
