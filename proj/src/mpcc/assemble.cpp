#include <limits>
#include <vector>

#include "tlr/mpcc/contouring.hpp"
#include "tlr/mpcc/controller.hpp"

namespace tlr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using Triplets = std::vector<Eigen::Triplet<double>>;

// Adds w * (a' v + b)^2 over the variables `idx`.
void add_squared_affine(Triplets& H, Eigen::VectorXd& g, const Eigen::Index (&idx)[3], const Eigen::Vector3d& a,
                        double b, double w) {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) H.emplace_back(idx[i], idx[j], 2.0 * w * a[i] * a[j]);
    g[idx[i]] += 2.0 * w * b * a[i];
  }
}

}  // namespace

Eigen::VectorXd stack_reference(const HorizonSolution& ref) {
  const QpLayout L{ref.horizon()};
  Eigen::VectorXd z = Eigen::VectorXd::Zero(L.size());
  for (int k = 0; k <= L.N; ++k) z.segment<aug::kStates>(L.state(k)) = ref.states[static_cast<std::size_t>(k)];
  for (int k = 0; k < L.N; ++k) z.segment<aug::kInputs>(L.input(k)) = ref.inputs[static_cast<std::size_t>(k)];
  for (int k = 1; k <= L.N && ref.slacks.size() == static_cast<std::size_t>(L.N); ++k) {
    z.segment<2>(L.slack(k)) = ref.slacks[static_cast<std::size_t>(k - 1)];
  }
  return z;
}

QpProblem assemble_qp(const AugmentedState& current, const HorizonSolution& ref,
                      const AugmentedInput& previous_input, const Track& track, const MpccConfig& cfg,
                      const VehicleParams& params) {
  const int N = cfg.N;
  if (ref.states.size() != static_cast<std::size_t>(N + 1) || ref.inputs.size() != static_cast<std::size_t>(N)) {
    throw QpError("assemble_qp: reference has " + std::to_string(ref.states.size()) + " states and " +
                  std::to_string(ref.inputs.size()) + " inputs, horizon is " + std::to_string(N));
  }
  const QpLayout L{N};
  const Eigen::Index n = L.size();

  QpProblem p;
  p.g = Eigen::VectorXd::Zero(n);
  Triplets H;

  for (int k = 1; k <= N; ++k) {
    const AugmentedState& x = ref.states[static_cast<std::size_t>(k)];
    const ContouringErrors e = contouring_errors(track, x[aug::kTheta], x[aug::kX], x[aug::kY]);
    const Eigen::Vector3d xi(x[aug::kX], x[aug::kY], x[aug::kTheta]);
    const Eigen::Index idx[3] = {L.state(k) + aug::kX, L.state(k) + aug::kY, L.state(k) + aug::kTheta};
    add_squared_affine(H, p.g, idx, e.contouring_gradient, e.contouring - e.contouring_gradient.dot(xi), cfg.q_c);
    add_squared_affine(H, p.g, idx, e.lag_gradient, e.lag - e.lag_gradient.dot(xi), cfg.q_l);
  }

  const double rates[3] = {cfg.r_d, cfg.r_delta, cfg.r_vtheta};
  for (int k = 0; k < N; ++k) {
    p.g[L.input(k) + aug::kVTheta] -= cfg.gamma * cfg.Ts;
    for (int i = 0; i < aug::kInputs; ++i) {
      const Eigen::Index a = L.input(k) + i;
      H.emplace_back(a, a, 2.0 * rates[i]);
      if (k == 0) {
        p.g[a] -= 2.0 * rates[i] * previous_input[i];
      } else {
        const Eigen::Index b = L.input(k - 1) + i;
        H.emplace_back(b, b, 2.0 * rates[i]);
        H.emplace_back(a, b, -2.0 * rates[i]);
        H.emplace_back(b, a, -2.0 * rates[i]);
      }
    }
  }
  for (int k = 1; k <= N; ++k) {
    H.emplace_back(L.slack(k), L.slack(k), 2.0 * cfg.q_s);
    H.emplace_back(L.slack(k) + 1, L.slack(k) + 1, 2.0 * cfg.q_s);
  }

  // Proximal term eps/2 |z - z_ref|^2 keeps H positive definite.
  const Eigen::VectorXd z_ref = stack_reference(ref);
  for (Eigen::Index j = 0; j < n; ++j) H.emplace_back(j, j, cfg.regularization);
  p.g -= cfg.regularization * z_ref;
  p.H.resize(n, n);
  p.H.setFromTriplets(H.begin(), H.end());

  Triplets Aeq;
  p.b_eq.resize(L.equalities());
  for (int i = 0; i < aug::kStates; ++i) Aeq.emplace_back(i, L.state(0) + i, 1.0);
  p.b_eq.head<aug::kStates>() = current;
  for (int k = 0; k < N; ++k) {
    const Linearization lin = discretize_linearize(ref.states[static_cast<std::size_t>(k)],
                                                   ref.inputs[static_cast<std::size_t>(k)], params, cfg.Ts);
    const Eigen::Index row = (k + 1) * aug::kStates;
    for (int i = 0; i < aug::kStates; ++i) {
      Aeq.emplace_back(row + i, L.state(k + 1) + i, 1.0);
      for (int j = 0; j < aug::kStates; ++j) {
        if (lin.A(i, j) != 0.0) Aeq.emplace_back(row + i, L.state(k) + j, -lin.A(i, j));
      }
      for (int j = 0; j < aug::kInputs; ++j) {
        if (lin.B(i, j) != 0.0) Aeq.emplace_back(row + i, L.input(k) + j, -lin.B(i, j));
      }
    }
    p.b_eq.segment<aug::kStates>(row) = lin.c;
  }
  p.A_eq.resize(L.equalities(), n);
  p.A_eq.setFromTriplets(Aeq.begin(), Aeq.end());

  Triplets Ain;
  p.in_lower = Eigen::VectorXd::Constant(L.inequalities(), -kInf);
  p.in_upper.resize(L.inequalities());
  for (int k = 1; k <= N; ++k) {
    const AugmentedState& x = ref.states[static_cast<std::size_t>(k)];
    const BorderHalfspaces b = border_halfspaces(track, x[aug::kTheta], cfg.border_margin);
    const Eigen::Index row = 2 * (k - 1);
    const Halfspace* sides[2] = {&b.left, &b.right};
    for (int side = 0; side < 2; ++side) {
      Ain.emplace_back(row + side, L.state(k) + aug::kX, sides[side]->normal.x());
      Ain.emplace_back(row + side, L.state(k) + aug::kY, sides[side]->normal.y());
      Ain.emplace_back(row + side, L.slack(k) + side, -1.0);
      p.in_upper[row + side] = sides[side]->offset;
    }
  }
  p.A_in.resize(L.inequalities(), n);
  p.A_in.setFromTriplets(Ain.begin(), Ain.end());

  p.lower = Eigen::VectorXd::Constant(n, -kInf);
  p.upper = Eigen::VectorXd::Constant(n, kInf);
  for (int k = 0; k < N; ++k) {
    p.lower[L.input(k) + aug::kDuty] = params.bounds.d_min;
    p.upper[L.input(k) + aug::kDuty] = params.bounds.d_max;
    p.lower[L.input(k) + aug::kSteer] = -params.bounds.delta_max;
    p.upper[L.input(k) + aug::kSteer] = params.bounds.delta_max;
    p.lower[L.input(k) + aug::kVTheta] = 0.0;
    p.upper[L.input(k) + aug::kVTheta] = cfg.v_theta_max;
  }
  for (int k = 1; k <= N; ++k) p.lower.segment<2>(L.slack(k)).setZero();
  return p;
}

}  // namespace tlr
