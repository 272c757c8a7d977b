#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/SparseCholesky>

#include "tlr/mpcc/qp.hpp"

namespace tlr {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kRhoEqualityFactor = 1e3;
constexpr double kScaleMin = 1e-4;
constexpr double kScaleMax = 1e4;
constexpr double kPolishDelta = 1e-9;
constexpr double kInfeasibilityTol = 1e-5;

double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

SpMat stack_constraints(const QpProblem& p) {
  const Eigen::Index n = p.num_variables();
  const Eigen::Index me = p.num_equalities(), mi = p.num_inequalities();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(p.A_eq.nonZeros() + p.A_in.nonZeros() + n));
  for (int k = 0; k < p.A_eq.outerSize(); ++k) {
    for (SpMat::InnerIterator it(p.A_eq, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  }
  for (int k = 0; k < p.A_in.outerSize(); ++k) {
    for (SpMat::InnerIterator it(p.A_in, k); it; ++it) trip.emplace_back(me + it.row(), it.col(), it.value());
  }
  for (Eigen::Index j = 0; j < n; ++j) trip.emplace_back(me + mi + j, j, 1.0);
  SpMat C(me + mi + n, n);
  C.setFromTriplets(trip.begin(), trip.end());
  C.makeCompressed();
  return C;
}

// Problem data after Ruiz equilibration:
//   P = c D H D, q = c D g, C = E A D, l = E lower, u = E upper.
struct ScaledProblem {
  SpMat P;
  Vec q;
  SpMat C;
  Vec l;
  Vec u;
  Vec D;
  Vec E;
  double c = 1.0;
};

Vec column_max(const SpMat& M) {
  Vec out = Vec::Zero(M.cols());
  for (int k = 0; k < M.outerSize(); ++k) {
    for (SpMat::InnerIterator it(M, k); it; ++it) out[k] = std::max(out[k], std::abs(it.value()));
  }
  return out;
}

Vec row_max(const SpMat& M) {
  Vec out = Vec::Zero(M.rows());
  for (int k = 0; k < M.outerSize(); ++k) {
    for (SpMat::InnerIterator it(M, k); it; ++it) out[it.row()] = std::max(out[it.row()], std::abs(it.value()));
  }
  return out;
}

double scale_factor(double norm) {
  if (norm < kScaleMin) return 1.0;
  return std::clamp(1.0 / std::sqrt(norm), kScaleMin, kScaleMax);
}

ScaledProblem scale_problem(const QpProblem& p, const SpMat& C, const QpSettings& settings) {
  ScaledProblem s;
  s.P = p.H;
  s.q = p.g;
  s.C = C;
  s.D = Vec::Ones(p.num_variables());
  s.E = Vec::Ones(C.rows());
  const int iters = settings.scaling ? settings.scaling_iterations : 0;
  for (int it = 0; it < iters; ++it) {
    const Vec pc = column_max(s.P);
    const Vec cc = column_max(s.C);
    const Vec cr = row_max(s.C);
    Vec dx(pc.size()), dc(cr.size());
    for (Eigen::Index j = 0; j < pc.size(); ++j) dx[j] = scale_factor(std::max(pc[j], cc[j]));
    for (Eigen::Index i = 0; i < cr.size(); ++i) dc[i] = scale_factor(cr[i]);
    s.P = dx.asDiagonal() * s.P * dx.asDiagonal();
    s.q = dx.cwiseProduct(s.q);
    s.C = dc.asDiagonal() * s.C * dx.asDiagonal();
    s.D = s.D.cwiseProduct(dx);
    s.E = s.E.cwiseProduct(dc);

    const Vec pcol = column_max(s.P);
    const double mean_col = pcol.size() ? pcol.mean() : 0.0;
    double gamma = std::max(mean_col, inf_norm(s.q));
    gamma = gamma < kScaleMin ? 1.0 : std::clamp(1.0 / gamma, kScaleMin, kScaleMax);
    s.P *= gamma;
    s.q *= gamma;
    s.c *= gamma;
  }
  const Eigen::Index me = p.num_equalities(), mi = p.num_inequalities();
  s.l.resize(C.rows());
  s.u.resize(C.rows());
  s.l << p.b_eq, p.in_lower, p.lower;
  s.u << p.b_eq, p.in_upper, p.upper;
  (void)me;
  (void)mi;
  s.l = s.l.cwiseProduct(s.E);
  s.u = s.u.cwiseProduct(s.E);
  s.P.makeCompressed();
  s.C.makeCompressed();
  return s;
}

Vec row_penalties(const ScaledProblem& s, double rho) {
  Vec r(s.l.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (s.l[i] == -kInf && s.u[i] == kInf) {
      r[i] = kRhoMin;
    } else if (s.l[i] == s.u[i]) {
      r[i] = kRhoEqualityFactor * rho;
    } else {
      r[i] = rho;
    }
  }
  return r;
}

class AdmmSystem {
 public:
  AdmmSystem(const ScaledProblem& s, double sigma) : s_(s), sigma_(sigma) {
    identity_.resize(s.P.rows(), s.P.cols());
    identity_.setIdentity();
  }

  bool factor(const Vec& rho) {
    const SpMat ct_rho = s_.C.transpose() * rho.asDiagonal();
    SpMat K = s_.P + sigma_ * identity_ + SpMat(ct_rho * s_.C);
    K.makeCompressed();
    llt_.compute(K);
    return llt_.info() == Eigen::Success;
  }

  Vec solve(const Vec& rhs) const { return llt_.solve(rhs); }

 private:
  const ScaledProblem& s_;
  double sigma_;
  SpMat identity_;
  Eigen::SimplicialLLT<SpMat> llt_;
};

// Unscaled primal/dual pair from a scaled iterate.
std::pair<Vec, Vec> unscale(const ScaledProblem& s, const Vec& x, const Vec& y) {
  return {s.D.cwiseProduct(x), s.E.cwiseProduct(y) / s.c};
}

bool acceptable(const QpResiduals& r, double tol, double g_norm) {
  const double dual_tol = tol * (1.0 + g_norm);
  return r.equality <= tol && r.inequality <= tol && r.stationarity <= dual_tol && r.dual_sign <= dual_tol &&
         r.complementarity <= dual_tol;
}

// Solves the equality-constrained QP on the active set guessed from (z, y).
std::optional<std::pair<Vec, Vec>> polish(const ScaledProblem& s, const Vec& z, const Vec& y) {
  const Eigen::Index n = s.P.rows(), m = s.C.rows();
  std::vector<Eigen::Index> active_row(static_cast<std::size_t>(m), -1);
  Vec target(m);
  Eigen::Index na = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (s.l[i] == s.u[i]) {
      target[na] = s.l[i];
    } else if (s.l[i] > -kInf && z[i] - s.l[i] < -y[i]) {
      target[na] = s.l[i];
    } else if (s.u[i] < kInf && s.u[i] - z[i] < y[i]) {
      target[na] = s.u[i];
    } else {
      continue;
    }
    active_row[static_cast<std::size_t>(i)] = na++;
  }

  std::vector<Eigen::Triplet<double>> exact, reg;
  for (int k = 0; k < s.P.outerSize(); ++k) {
    for (SpMat::InnerIterator it(s.P, k); it; ++it) exact.emplace_back(it.row(), it.col(), it.value());
  }
  for (int k = 0; k < s.C.outerSize(); ++k) {
    for (SpMat::InnerIterator it(s.C, k); it; ++it) {
      const Eigen::Index a = active_row[static_cast<std::size_t>(it.row())];
      if (a < 0) continue;
      exact.emplace_back(n + a, it.col(), it.value());
      exact.emplace_back(it.col(), n + a, it.value());
    }
  }
  reg = exact;
  for (Eigen::Index j = 0; j < n; ++j) reg.emplace_back(j, j, kPolishDelta);
  for (Eigen::Index a = 0; a < na; ++a) reg.emplace_back(n + a, n + a, -kPolishDelta);

  SpMat K(n + na, n + na), Kreg(n + na, n + na);
  K.setFromTriplets(exact.begin(), exact.end());
  Kreg.setFromTriplets(reg.begin(), reg.end());
  Eigen::SimplicialLDLT<SpMat> ldlt(Kreg);
  if (ldlt.info() != Eigen::Success) return std::nullopt;

  Vec rhs(n + na);
  rhs << -s.q, target.head(na);
  Vec sol = ldlt.solve(rhs);
  for (int it = 0; it < 5; ++it) {
    const Vec r = rhs - K * sol;
    if (inf_norm(r) < 1e-14 * (1.0 + inf_norm(rhs))) break;
    sol += ldlt.solve(r);
  }
  if (!sol.allFinite()) return std::nullopt;

  Vec y_full = Vec::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index a = active_row[static_cast<std::size_t>(i)];
    if (a >= 0) y_full[i] = sol[n + a];
  }
  return std::make_pair(Vec(sol.head(n)), y_full);
}

bool primal_infeasible(const QpProblem& p, const SpMat& C, const ScaledProblem& s, const Vec& dy_scaled) {
  const Vec dy = s.E.cwiseProduct(dy_scaled) / s.c;
  const double norm = inf_norm(dy);
  if (norm < 1e-10) return false;
  if (inf_norm(C.transpose() * dy) > kInfeasibilityTol * norm) return false;
  Vec lo(C.rows()), hi(C.rows());
  lo << p.b_eq, p.in_lower, p.lower;
  hi << p.b_eq, p.in_upper, p.upper;
  double support = 0.0;
  for (Eigen::Index i = 0; i < dy.size(); ++i) {
    const double v = dy[i];
    if (std::abs(v) <= kInfeasibilityTol * norm) continue;
    if (v > 0.0) {
      if (hi[i] == kInf) return false;
      support += hi[i] * v;
    } else {
      if (lo[i] == -kInf) return false;
      support += lo[i] * v;
    }
  }
  return support < -kInfeasibilityTol * norm;
}

}  // namespace

const char* to_string(QpStatus status) {
  switch (status) {
    case QpStatus::Optimal:
      return "Optimal";
    case QpStatus::MaxIter:
      return "MaxIter";
    case QpStatus::Infeasible:
      return "Infeasible";
  }
  return "?";
}

void QpProblem::validate() const {
  const Eigen::Index n = g.size();
  if (H.rows() != n || H.cols() != n) throw QpError("QP: H must be n x n");
  if (A_eq.cols() != n || A_eq.rows() != b_eq.size()) throw QpError("QP: A_eq/b_eq dimension mismatch");
  if (A_in.cols() != n || A_in.rows() != in_lower.size() || in_upper.size() != in_lower.size()) {
    throw QpError("QP: A_in/bounds dimension mismatch");
  }
  if (lower.size() != n || upper.size() != n) throw QpError("QP: variable bound dimension mismatch");
  if (!g.allFinite() || !b_eq.allFinite()) throw QpError("QP: non-finite cost or equality data");
  for (Eigen::Index i = 0; i < in_lower.size(); ++i) {
    if (std::isnan(in_lower[i]) || std::isnan(in_upper[i]) || in_lower[i] > in_upper[i]) {
      throw QpError("QP: inequality bounds crossed at row " + std::to_string(i));
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j]) {
      throw QpError("QP: variable bounds crossed at index " + std::to_string(j));
    }
  }
}

double QpProblem::objective(const Eigen::VectorXd& z) const { return 0.5 * z.dot(H * z) + g.dot(z); }

QpResiduals kkt_residuals(const QpProblem& p, const Eigen::VectorXd& z, const Eigen::VectorXd& y) {
  const Eigen::Index me = p.num_equalities(), mi = p.num_inequalities(), n = p.num_variables();
  QpResiduals r;
  if (me) r.equality = inf_norm(p.A_eq * z - p.b_eq);

  Vec grad = p.H * z + p.g;
  if (me) grad += p.A_eq.transpose() * y.head(me);
  if (mi) grad += p.A_in.transpose() * y.segment(me, mi);
  grad += y.tail(n);
  r.stationarity = inf_norm(grad);

  auto check_row = [&](double value, double lo, double hi, double mult) {
    r.inequality = std::max({r.inequality, lo - value, value - hi});
    if (mult > 0.0) {
      if (hi < kInf) {
        r.complementarity = std::max(r.complementarity, mult * std::abs(hi - value));
      } else {
        r.dual_sign = std::max(r.dual_sign, mult);
      }
    } else if (mult < 0.0) {
      if (lo > -kInf) {
        r.complementarity = std::max(r.complementarity, -mult * std::abs(value - lo));
      } else {
        r.dual_sign = std::max(r.dual_sign, -mult);
      }
    }
  };
  if (mi) {
    const Vec az = p.A_in * z;
    for (Eigen::Index i = 0; i < mi; ++i) check_row(az[i], p.in_lower[i], p.in_upper[i], y[me + i]);
  }
  for (Eigen::Index j = 0; j < n; ++j) check_row(z[j], p.lower[j], p.upper[j], y[me + mi + j]);
  return r;
}

QpSolution solve_qp(const QpProblem& p, const QpSettings& settings, const QpWarmStart* warm) {
  p.validate();
  const Eigen::Index n = p.num_variables();
  const SpMat C = stack_constraints(p);
  const Eigen::Index m = C.rows();
  const ScaledProblem s = scale_problem(p, C, settings);
  const double g_norm = inf_norm(p.g);
  const double dual_tol = settings.tol * (1.0 + g_norm);

  double rho_scalar = std::clamp(settings.rho, kRhoMin, kRhoMax);
  Vec rho = row_penalties(s, rho_scalar);
  AdmmSystem system(s, settings.sigma);
  if (!system.factor(rho)) throw QpError("QP: ADMM system factorization failed (H not PSD?)");

  Vec x = Vec::Zero(n), z = Vec::Zero(m), y = Vec::Zero(m);
  if (warm && warm->z.size() == n) {
    x = warm->z.cwiseQuotient(s.D);
    z = (s.C * x).cwiseMax(s.l).cwiseMin(s.u);
    if (warm->y.size() == m) y = s.c * warm->y.cwiseQuotient(s.E);
  }

  QpSolution out;
  auto finish = [&](const Vec& xs, const Vec& ys, QpStatus status, int iters, bool polished) {
    auto [zu, yu] = unscale(s, xs, ys);
    out.z = std::move(zu);
    out.y = std::move(yu);
    out.status = status;
    out.iterations = iters;
    out.polished = polished;
    out.objective = p.objective(out.z);
    out.residuals = kkt_residuals(p, out.z, out.y);
    return out;
  };
  auto try_polish = [&]() -> std::optional<std::pair<Vec, Vec>> {
    if (!settings.polish) return std::nullopt;
    auto pol = polish(s, z, y);
    if (!pol) return std::nullopt;
    const auto [zu, yu] = unscale(s, pol->first, pol->second);
    if (!acceptable(kkt_residuals(p, zu, yu), settings.tol, g_norm)) return std::nullopt;
    return pol;
  };

  const double alpha = settings.alpha;
  const int check_every = std::max(1, settings.check_interval);
  for (int iter = 1; iter <= settings.max_iter; ++iter) {
    const Vec rhs = settings.sigma * x - s.q + s.C.transpose() * (rho.cwiseProduct(z) - y);
    const Vec x_tilde = system.solve(rhs);
    const Vec z_tilde = s.C * x_tilde;
    const Vec x_next = alpha * x_tilde + (1.0 - alpha) * x;
    const Vec z_relaxed = alpha * z_tilde + (1.0 - alpha) * z;
    const Vec z_next = (z_relaxed + y.cwiseQuotient(rho)).cwiseMax(s.l).cwiseMin(s.u);
    const Vec dy = rho.cwiseProduct(z_relaxed - z_next);
    x = x_next;
    z = z_next;
    y += dy;

    if (iter % check_every != 0 && iter != settings.max_iter) continue;
    if (!x.allFinite() || !y.allFinite()) break;

    const Vec cx = s.C * x;
    const Vec px = s.P * x;
    const Vec cty = s.C.transpose() * y;
    const double prim = inf_norm((cx - z).cwiseQuotient(s.E));
    const double dual = inf_norm((px + s.q + cty).cwiseQuotient(s.D)) / s.c;
    if (prim <= settings.tol && dual <= dual_tol) {
      if (auto pol = try_polish()) return finish(pol->first, pol->second, QpStatus::Optimal, iter, true);
      return finish(x, y, QpStatus::Optimal, iter, false);
    }
    if (auto pol = try_polish()) return finish(pol->first, pol->second, QpStatus::Optimal, iter, true);
    if (primal_infeasible(p, C, s, dy)) return finish(x, y, QpStatus::Infeasible, iter, false);

    if (settings.adaptive_rho) {
      const double prim_norm = std::max({inf_norm(cx), inf_norm(z), 1e-12});
      const double dual_norm = std::max({inf_norm(px), inf_norm(cty), inf_norm(s.q), 1e-12});
      const double prim_scaled = inf_norm(cx - z) / prim_norm;
      const double dual_scaled = inf_norm(px + s.q + cty) / dual_norm;
      if (prim_scaled > 0.0 && dual_scaled > 0.0) {
        const double proposal = std::clamp(rho_scalar * std::sqrt(prim_scaled / dual_scaled), kRhoMin, kRhoMax);
        if (proposal > 5.0 * rho_scalar || proposal < 0.2 * rho_scalar) {
          rho_scalar = proposal;
          rho = row_penalties(s, rho_scalar);
          if (!system.factor(rho)) throw QpError("QP: ADMM system refactorization failed");
        }
      }
    }
  }
  return finish(x, y, QpStatus::MaxIter, settings.max_iter, false);
}

}  // namespace tlr
