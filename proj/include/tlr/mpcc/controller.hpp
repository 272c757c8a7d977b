#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tlr/dynamics/vehicle.hpp"
#include "tlr/mpcc/config.hpp"
#include "tlr/mpcc/linearize.hpp"
#include "tlr/mpcc/qp.hpp"
#include "tlr/time.hpp"
#include "tlr/track/track.hpp"

namespace tlr {

struct HorizonSolution {
  std::vector<AugmentedState> states;  // N + 1
  std::vector<AugmentedInput> inputs;  // N
  std::vector<Eigen::Vector2d> slacks;  // N, (left, right) for stages 1..N
  QpStatus status = QpStatus::MaxIter;
  double objective = 0.0;
  int iterations = 0;
  Nanos solve_time_ns = 0;
  // Raw QP iterate kept for warm starting.
  Eigen::VectorXd z;
  Eigen::VectorXd y;

  int horizon() const { return static_cast<int>(inputs.size()); }
};

/// Index bookkeeping of the stacked decision vector
/// [x_0 .. x_N, u_0 .. u_{N-1}, s_1 .. s_N].
struct QpLayout {
  int N = 0;

  Eigen::Index state(int k) const { return k * aug::kStates; }
  Eigen::Index input(int k) const { return (N + 1) * aug::kStates + k * aug::kInputs; }
  Eigen::Index slack(int k) const { return (N + 1) * aug::kStates + N * aug::kInputs + (k - 1) * 2; }
  Eigen::Index size() const { return (N + 1) * aug::kStates + N * aug::kInputs + N * 2; }
  Eigen::Index equalities() const { return (N + 1) * aug::kStates; }
  Eigen::Index inequalities() const { return 2 * N; }
};

/// Builds the QP linearized around `reference` (states, inputs of length N+1
/// and N). Stage 0 is pinned to `current`. `previous_input` is the last
/// applied (d, delta, v_theta) and enters the first rate penalty.
QpProblem assemble_qp(const AugmentedState& current, const HorizonSolution& reference,
                      const AugmentedInput& previous_input, const Track& track, const MpccConfig& config,
                      const VehicleParams& params);

/// Decision vector stacking the reference trajectory, slacks at zero.
Eigen::VectorXd stack_reference(const HorizonSolution& reference);

/// Per-worker controller state carried between calls.
struct ControllerMemory {
  std::optional<HorizonSolution> previous;
  ControlInput last_input{};
  double last_v_theta = 0.0;
  std::uint64_t solves = 0;
  std::uint64_t failures = 0;
};

struct MpcResult {
  ControlInput input;
  HorizonSolution solution;
  bool failed = false;
  std::string failure;  // empty unless failed
};

/// One controller invocation: project progress, linearize around the
/// shifted previous horizon (or a zero-input rollout on cold start), solve,
/// and return the first input clamped to the bounds. On solver or
/// projection failure the previous input is held, `failed` is set, and the
/// memory falls back to a cold start.
MpcResult mpc_step(const VehicleState& state, ControllerMemory& memory, const Track& track,
                   const MpccConfig& config, const VehicleParams& params);

}  // namespace tlr
