#pragma once

#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace tlr {

class QpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class QpStatus { Optimal, MaxIter, Infeasible };

const char* to_string(QpStatus status);

/// Convex QP
///
///   minimize    1/2 z' H z + g' z
///   subject to  A_eq z = b_eq
///               in_lower <= A_in z <= in_upper
///               lower <= z <= upper
///
/// H is stored as a full symmetric matrix. Infinite bounds are allowed.
struct QpProblem {
  Eigen::SparseMatrix<double> H;
  Eigen::VectorXd g;
  Eigen::SparseMatrix<double> A_eq;
  Eigen::VectorXd b_eq;
  Eigen::SparseMatrix<double> A_in;
  Eigen::VectorXd in_lower;
  Eigen::VectorXd in_upper;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index num_variables() const { return g.size(); }
  Eigen::Index num_equalities() const { return b_eq.size(); }
  Eigen::Index num_inequalities() const { return in_lower.size(); }
  /// Rows of the stacked constraint matrix [A_eq; A_in; I].
  Eigen::Index num_constraints() const { return num_equalities() + num_inequalities() + num_variables(); }

  /// Throws QpError on inconsistent dimensions, NaNs or crossed bounds.
  void validate() const;
  double objective(const Eigen::VectorXd& z) const;
};

/// Unscaled optimality measures of a primal/dual pair. Multipliers are
/// stacked as [equalities; inequalities; variable bounds] with the sign
/// convention H z + g + C' y = 0, y >= 0 on active upper bounds.
struct QpResiduals {
  double equality = 0.0;       // max |A_eq z - b_eq|
  double inequality = 0.0;     // max violation of inequality rows and bounds
  double stationarity = 0.0;   // max |H z + g + C' y|
  double complementarity = 0.0;
  double dual_sign = 0.0;      // worst multiplier of the wrong sign
};

QpResiduals kkt_residuals(const QpProblem& problem, const Eigen::VectorXd& z, const Eigen::VectorXd& y);

struct QpSettings {
  double tol = 1e-6;
  int max_iter = 4000;
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;
  bool scaling = true;
  int scaling_iterations = 10;
  bool adaptive_rho = true;
  int check_interval = 25;
  bool polish = true;
};

struct QpWarmStart {
  Eigen::VectorXd z;
  Eigen::VectorXd y;  // optional; empty means zero multipliers
};

struct QpSolution {
  Eigen::VectorXd z;
  Eigen::VectorXd y;
  QpStatus status = QpStatus::MaxIter;
  double objective = 0.0;
  int iterations = 0;
  bool polished = false;
  QpResiduals residuals;
};

/// Operator-splitting (ADMM) solver with Ruiz equilibration, adaptive
/// penalty, and an active-set polish that is attempted at every residual
/// check. Returns Optimal once the primal residuals are <= tol and the
/// stationarity residual is <= tol (1 + |g|_inf). On MaxIter the last
/// iterate is returned. Deterministic for identical inputs.
QpSolution solve_qp(const QpProblem& problem, const QpSettings& settings = {},
                    const QpWarmStart* warm_start = nullptr);

}  // namespace tlr
