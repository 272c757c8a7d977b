#include <algorithm>
#include <chrono>

#include "tlr/mpcc/controller.hpp"

namespace tlr {

namespace {

// Moves `count` consecutive blocks of size `block` starting at `offset` one
// block towards the front; the last block keeps its value.
void shift_blocks(Eigen::VectorXd& v, Eigen::Index offset, Eigen::Index block, Eigen::Index count) {
  for (Eigen::Index k = 0; k + 1 < count; ++k) {
    v.segment(offset + k * block, block) = v.segment(offset + (k + 1) * block, block);
  }
}

// Multipliers of the previous solve, re-indexed one stage forward.
Eigen::VectorXd shifted_duals(const HorizonSolution& prev) {
  const QpLayout L{prev.horizon()};
  Eigen::VectorXd y = prev.y;
  if (y.size() != L.equalities() + L.inequalities() + L.size()) return {};
  shift_blocks(y, aug::kStates, aug::kStates, L.N);
  shift_blocks(y, L.equalities(), 2, L.N);
  const Eigen::Index bounds = L.equalities() + L.inequalities();
  shift_blocks(y, bounds + L.state(0), aug::kStates, L.N + 1);
  shift_blocks(y, bounds + L.input(0), aug::kInputs, L.N);
  shift_blocks(y, bounds + L.slack(1), 2, L.N);
  return y;
}

void rollout(HorizonSolution& ref, const AugmentedState& x0, const VehicleParams& params, double Ts) {
  ref.states.resize(ref.inputs.size() + 1);
  ref.states[0] = x0;
  for (std::size_t k = 0; k < ref.inputs.size(); ++k) {
    ref.states[k + 1] = discrete_map(ref.states[k], ref.inputs[k], params, Ts);
  }
}

void unpack(HorizonSolution& out, const QpSolution& sol, int N) {
  const QpLayout L{N};
  out.states.resize(static_cast<std::size_t>(N + 1));
  out.inputs.resize(static_cast<std::size_t>(N));
  out.slacks.resize(static_cast<std::size_t>(N));
  for (int k = 0; k <= N; ++k) out.states[static_cast<std::size_t>(k)] = sol.z.segment<aug::kStates>(L.state(k));
  for (int k = 0; k < N; ++k) out.inputs[static_cast<std::size_t>(k)] = sol.z.segment<aug::kInputs>(L.input(k));
  for (int k = 1; k <= N; ++k) out.slacks[static_cast<std::size_t>(k - 1)] = sol.z.segment<2>(L.slack(k));
  out.status = sol.status;
  out.objective = sol.objective;
  out.iterations += sol.iterations;
  out.z = sol.z;
  out.y = sol.y;
}

}  // namespace

MpcResult mpc_step(const VehicleState& state, ControllerMemory& memory, const Track& track,
                   const MpccConfig& cfg, const VehicleParams& params) {
  const auto start = std::chrono::steady_clock::now();
  const int N = cfg.N;
  MpcResult result;
  HorizonSolution& ref = result.solution;
  ++memory.solves;

  try {
    const bool warm = memory.previous && memory.previous->horizon() == N;
    AugmentedState x0 = augment(state, 0.0);
    QpWarmStart ws;
    if (warm) {
      const HorizonSolution& prev = *memory.previous;
      const AugmentedState& next = prev.states[1];
      x0[aug::kTheta] = project_progress(track, x0.head<2>(), next[aug::kTheta]);
      x0[aug::kPhi] = next[aug::kPhi] + normalize_angle(state.phi - next[aug::kPhi]);
      ref.inputs.assign(prev.inputs.begin() + 1, prev.inputs.end());
      ref.inputs.push_back(prev.inputs.back());
      ref.slacks.assign(prev.slacks.begin() + 1, prev.slacks.end());
      ref.slacks.push_back(prev.slacks.back());
      ws.y = shifted_duals(prev);
    } else {
      x0[aug::kTheta] = project_progress_global(track, x0.head<2>());
      ref.inputs.assign(static_cast<std::size_t>(N), AugmentedInput(0.0, 0.0, std::max(state.vx, 0.0)));
    }
    rollout(ref, x0, params, cfg.Ts);

    QpSettings settings;
    settings.tol = cfg.tol;
    settings.max_iter = cfg.max_iter;
    settings.polish = cfg.polish;
    const AugmentedInput previous_input(memory.last_input.d, memory.last_input.delta, memory.last_v_theta);
    const int passes = warm ? cfg.relinearizations : cfg.cold_start_relinearizations;
    for (int pass = 0; pass < passes; ++pass) {
      ws.z = stack_reference(ref);
      const QpProblem qp = assemble_qp(x0, ref, previous_input, track, cfg, params);
      const QpSolution sol = solve_qp(qp, settings, &ws);
      unpack(ref, sol, N);
      if (sol.status != QpStatus::Optimal) {
        result.failed = true;
        result.failure = std::string("QP ") + to_string(sol.status);
        break;
      }
      ws.y = sol.y;
    }
    if (!result.failed && !ref.inputs.front().allFinite()) {
      result.failed = true;
      result.failure = "non-finite first input";
    }
  } catch (const std::runtime_error& e) {
    result.failed = true;
    result.failure = e.what();
  }
  ref.solve_time_ns =
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count();

  if (result.failed) {
    ++memory.failures;
    memory.previous.reset();
    result.input = memory.last_input;
    result.input.source_timestamp = state.timestamp;
    return result;
  }

  const AugmentedInput& u0 = ref.inputs.front();
  result.input.d = std::clamp(u0[aug::kDuty], params.bounds.d_min, params.bounds.d_max);
  result.input.delta = std::clamp(u0[aug::kSteer], -params.bounds.delta_max, params.bounds.delta_max);
  result.input.source_timestamp = state.timestamp;
  memory.last_input = result.input;
  memory.last_v_theta = std::clamp(u0[aug::kVTheta], 0.0, cfg.v_theta_max);
  memory.previous = ref;
  return result;
}

}  // namespace tlr
