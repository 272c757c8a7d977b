#include <doctest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "tlr/config_error.hpp"
#include "tlr/mpcc/contouring.hpp"
#include "tlr/mpcc/controller.hpp"

using namespace tlr;

namespace {

const Track& oval() {
  static const Track t = build_track(generate_oval(10, 6, 0.8, 200), 0.05);
  return t;
}

const Track& mirrored_oval() {
  static const Track t = [] {
    auto w = generate_oval(10, 6, 0.8, 200);
    for (auto& p : w) p.y = -p.y;
    return build_track(w, 0.05);
  }();
  return t;
}

VehicleState state_near(const Track& t, double theta, double offset, double dphi, double vx) {
  const CenterlinePoint c = t.at(theta);
  const Eigen::Vector2d p = c.position() + offset * c.normal();
  return VehicleState{p.x(), p.y(), normalize_angle(c.heading + dphi), vx, 0.0, 0.0, 0};
}

// Reference horizon parked at theta with the duty cycle that cancels rolling
// resistance at rest.
HorizonSolution parked_reference(const Track& t, double theta, const MpccConfig& cfg, const VehicleParams& p) {
  const CenterlinePoint c = t.at(theta);
  HorizonSolution ref;
  AugmentedState x;
  x << c.x, c.y, c.heading, 0, 0, 0, theta;
  const double d = p.drivetrain.Cr0 / p.drivetrain.Cm1;
  ref.states.assign(static_cast<std::size_t>(cfg.N + 1), x);
  ref.inputs.assign(static_cast<std::size_t>(cfg.N), AugmentedInput(d, 0.0, 0.0));
  return ref;
}

}  // namespace

TEST_CASE("contouring errors") {
  const Track& t = oval();
  SUBCASE("on the centerline") {
    for (double th : {0.0, 3.0, 9.5, 20.0}) {
      const CenterlinePoint c = t.at(th);
      const ContouringErrors e = contouring_errors(t, th, c.x, c.y);
      CHECK(std::abs(e.contouring) < 1e-12);
      CHECK(std::abs(e.lag) < 1e-12);
    }
  }
  SUBCASE("normal offset is pure contouring error") {
    for (double th : {1.0, 7.0, 15.0}) {
      const CenterlinePoint c = t.at(th);
      const Eigen::Vector2d p = c.position() + 0.2 * c.normal();
      const ContouringErrors e = contouring_errors(t, th, p.x(), p.y());
      CHECK(e.contouring == doctest::Approx(-0.2).epsilon(1e-12));
      CHECK(std::abs(e.lag) < 1e-12);
    }
  }
  SUBCASE("gradients match central differences") {
    CHECK(oracle::contouring_gradient_worst(t, 11, 1000) <= 1e-5);
  }
}

TEST_CASE("discretize_linearize") {
  const VehicleParams p = default_vehicle_params();
  const double Ts = 0.025;
  AugmentedState x;
  x << 1.0, -2.0, 0.7, 2.5, 0.2, 0.9, 12.0;
  const AugmentedInput u(0.4, 0.12, 2.4);
  const Linearization lin = discretize_linearize(x, u, p, Ts);

  SUBCASE("progress row") {
    for (int j = 0; j < aug::kStates; ++j) CHECK(lin.A(aug::kTheta, j) == (j == aug::kTheta ? 1.0 : 0.0));
    for (int j = 0; j < aug::kInputs; ++j) CHECK(lin.B(aug::kTheta, j) == (j == aug::kVTheta ? Ts : 0.0));
    for (int i = 0; i < 6; ++i) {
      CHECK(lin.A(i, aug::kTheta) == 0.0);
      CHECK(lin.B(i, aug::kVTheta) == 0.0);
    }
  }
  SUBCASE("exact at the linearization point") {
    const AugmentedState f = discrete_map(x, u, p, Ts);
    CHECK((lin.A * x + lin.B * u + lin.c - f).lpNorm<Eigen::Infinity>() < 1e-12);
  }
  SUBCASE("directional derivatives at two step sizes") {
    CHECK(oracle::linearization_worst(p, Ts, 3, 1000) <= 1e-5);
  }
  SUBCASE("step size limits") {
    CHECK_THROWS_AS(discretize_linearize(x, u, p, 0.0), LinearizationError);
    CHECK_THROWS_AS(discretize_linearize(x, u, p, 0.051), LinearizationError);
    CHECK_NOTHROW(discretize_linearize(x, u, p, 0.050));
  }
}

TEST_CASE("assemble_qp") {
  const Track& t = oval();
  const VehicleParams p = default_vehicle_params();

  SUBCASE("dimensions") {
    MpccConfig cfg;
    cfg.N = 2;
    const HorizonSolution ref = parked_reference(t, 1.0, cfg, p);
    const QpProblem qp = assemble_qp(ref.states[0], ref, ref.inputs[0], t, cfg, p);
    CHECK(qp.num_variables() == 3 * 7 + 2 * 3 + 2 * 2);
    CHECK(qp.num_equalities() == 3 * 7);
    CHECK(qp.num_inequalities() == 2 * 2);
    CHECK_NOTHROW(qp.validate());

    HorizonSolution short_ref = ref;
    short_ref.inputs.pop_back();
    CHECK_THROWS_AS(assemble_qp(ref.states[0], short_ref, ref.inputs[0], t, cfg, p), QpError);
  }
  SUBCASE("parked reference is a KKT point without progress reward") {
    MpccConfig cfg;
    cfg.gamma = 0.0;
    const HorizonSolution ref = parked_reference(t, 1.0, cfg, p);
    const QpProblem qp = assemble_qp(ref.states[0], ref, ref.inputs[0], t, cfg, p);
    const Eigen::VectorXd z = stack_reference(ref);
    CHECK((qp.H * z + qp.g).lpNorm<Eigen::Infinity>() < 1e-9);
    CHECK((qp.A_eq * z - qp.b_eq).lpNorm<Eigen::Infinity>() < 1e-12);
    const QpResiduals r = kkt_residuals(qp, z, Eigen::VectorXd::Zero(qp.num_constraints()));
    CHECK(r.inequality <= 0.0);
    const QpSolution sol = solve_qp(qp);
    REQUIRE(sol.status == QpStatus::Optimal);
    CHECK((sol.z - z).lpNorm<Eigen::Infinity>() < 1e-5);
  }
  SUBCASE("border violation is absorbed by slack") {
    MpccConfig cfg;
    cfg.gamma = 0.0;
    HorizonSolution ref = parked_reference(t, 1.0, cfg, p);
    const CenterlinePoint c = t.at(1.0);
    for (auto& x : ref.states) {
      x[aug::kX] = c.x - 0.75 * c.normal().x();  // right of the centerline, past the margin
      x[aug::kY] = c.y - 0.75 * c.normal().y();
    }
    const QpProblem qp = assemble_qp(ref.states[0], ref, ref.inputs[0], t, cfg, p);
    const QpLayout L{cfg.N};
    CHECK(qp.lower[L.slack(1)] == 0.0);
    CHECK(qp.H.coeff(L.slack(1) + 1, L.slack(1) + 1) >= 2 * cfg.q_s);
    const QpSolution sol = solve_qp(qp);
    REQUIRE(sol.status == QpStatus::Optimal);
    CHECK(sol.z[L.slack(1) + 1] > 0.0);
    CHECK(sol.z[L.slack(1) + 1] == doctest::Approx(0.75 - (0.8 - cfg.border_margin)).epsilon(1e-3));
    CHECK(std::abs(sol.z[L.slack(1)]) < 1e-6);
  }
}

TEST_CASE("mpc_step") {
  const Track& t = oval();
  const VehicleParams p = default_vehicle_params();
  const MpccConfig cfg;

  SUBCASE("cold start at rest on the straight") {
    ControllerMemory mem;
    VehicleState s = state_near(t, 0.5, 0.0, 0.0, 0.0);
    s.timestamp = 123456;
    const MpcResult r = mpc_step(s, mem, t, cfg, p);
    REQUIRE_FALSE(r.failed);
    CHECK(std::abs(r.input.delta) <= 0.05);
    CHECK(r.input.d > 0.0);
    CHECK(r.input.source_timestamp == 123456);
    REQUIRE(mem.previous);
    CHECK(mem.previous->states.size() == static_cast<std::size_t>(cfg.N + 1));
    CHECK(mem.previous->inputs.size() == static_cast<std::size_t>(cfg.N));
  }
  SUBCASE("mirror symmetry") {
    for (double offset : {0.0, 0.3, -0.2}) {
      VehicleState s = state_near(t, 1.2, offset, 0.1, 2.0);
      s.vy = 0.05;
      s.omega = 0.3;
      VehicleState m = s;
      m.Y = -s.Y;
      m.phi = -s.phi;
      m.vy = -s.vy;
      m.omega = -s.omega;
      ControllerMemory ma, mb;
      const MpcResult a = mpc_step(s, ma, t, cfg, p);
      const MpcResult b = mpc_step(m, mb, mirrored_oval(), cfg, p);
      REQUIRE_FALSE(a.failed);
      REQUIRE_FALSE(b.failed);
      CHECK(std::abs(a.input.delta + b.input.delta) <= 1e-6);
      CHECK(std::abs(a.input.d - b.input.d) <= 1e-6);
    }
  }
  SUBCASE("pure function of state and memory") {
    ControllerMemory mem;
    const VehicleState s = state_near(t, 3.0, 0.1, 0.0, 2.0);
    mpc_step(s, mem, t, cfg, p);
    ControllerMemory copy = mem;
    VehicleState next = s;
    next.timestamp = 25'000'000;
    const MpcResult a = mpc_step(next, mem, t, cfg, p);
    const MpcResult b = mpc_step(next, copy, t, cfg, p);
    CHECK(a.input.d == b.input.d);
    CHECK(a.input.delta == b.input.delta);
    CHECK(a.solution.z == b.solution.z);
  }
  SUBCASE("accepted solves satisfy the KKT conditions") {
    ControllerMemory mem;
    VehicleState s = state_near(t, 9.0, -0.1, 0.05, 2.5);
    for (int k = 0; k < 5; ++k) {
      const MpcResult r = mpc_step(s, mem, t, cfg, p);
      REQUIRE_FALSE(r.failed);
      CHECK(r.solution.status == QpStatus::Optimal);
      const ControlInput u = r.input;
      for (int i = 0; i < 25; ++i) s = rk4_step(s, u, p, 0.001);
    }
    // Re-solve the last linearization and check its residuals.
    const HorizonSolution& prev = *mem.previous;
    const QpProblem qp = assemble_qp(prev.states[0], prev, prev.inputs[0], t, cfg, p);
    const QpSolution sol = solve_qp(qp);
    REQUIRE(sol.status == QpStatus::Optimal);
    const double g = qp.g.lpNorm<Eigen::Infinity>();
    CHECK(sol.residuals.equality <= cfg.tol);
    CHECK(sol.residuals.inequality <= cfg.tol);
    CHECK(sol.residuals.stationarity <= cfg.tol * (1 + g));
  }
  SUBCASE("warm and cold start reach the same objective") {
    ControllerMemory mem;
    VehicleState s = state_near(t, 5.0, 0.2, -0.05, 2.5);
    mpc_step(s, mem, t, cfg, p);
    const HorizonSolution& prev = *mem.previous;
    const QpProblem qp = assemble_qp(prev.states[0], prev, prev.inputs[0], t, cfg, p);
    const QpSolution cold = solve_qp(qp);
    const QpWarmStart ws{prev.z, prev.y};
    const QpSolution warm = solve_qp(qp, {}, &ws);
    REQUIRE(cold.status == QpStatus::Optimal);
    REQUIRE(warm.status == QpStatus::Optimal);
    CHECK(std::abs(cold.objective - warm.objective) <= 1e-6);
  }
  SUBCASE("solver failure holds the previous input") {
    ControllerMemory mem;
    const VehicleState s = state_near(t, 2.0, 0.0, 0.0, 2.0);
    const MpcResult first = mpc_step(s, mem, t, cfg, p);
    REQUIRE_FALSE(first.failed);
    MpccConfig capped = cfg;
    capped.max_iter = 1;
    capped.polish = false;
    VehicleState later = state_near(t, 2.05, 0.05, 0.0, 2.0);
    later.timestamp = 25'000'000;
    const MpcResult r = mpc_step(later, mem, t, capped, p);
    CHECK(r.failed);
    CHECK(r.failure.find("MaxIter") != std::string::npos);
    CHECK(r.input.d == first.input.d);
    CHECK(r.input.delta == first.input.delta);
    CHECK(r.input.source_timestamp == 25'000'000);
    CHECK_FALSE(mem.previous);
    CHECK(mem.failures == 1);
  }
  SUBCASE("state far off the track is a failure") {
    ControllerMemory mem;
    const MpcResult first = mpc_step(state_near(t, 2.0, 0.0, 0.0, 2.0), mem, t, cfg, p);
    REQUIRE_FALSE(first.failed);
    const MpcResult r = mpc_step(VehicleState{50, 50, 0, 2, 0, 0, 1}, mem, t, cfg, p);
    CHECK(r.failed);
    CHECK(r.input.delta == first.input.delta);
  }
}

TEST_CASE("mpcc config") {
  const MpccConfig c = parse_mpcc_config("N: 12\nTs: 0.02\nq_c: 0.5\n");
  CHECK(c.N == 12);
  CHECK(c.Ts == 0.02);
  CHECK(c.q_c == 0.5);
  CHECK(c.q_l == MpccConfig{}.q_l);
  CHECK_THROWS_AS(parse_mpcc_config("N: 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_mpcc_config("q_l: 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_mpcc_config("Ts: 0.06\n"), ConfigError);
  CHECK_THROWS_AS(parse_mpcc_config("horizon: 5\n"), ConfigError);
  CHECK_THROWS_AS(parse_mpcc_config("N: twelve\n"), ConfigError);
}
