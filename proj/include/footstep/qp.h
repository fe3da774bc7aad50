#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace footstep::opt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// minimize 0.5 x'Px + q'x + constant
/// subject to A_eq x = b_eq, lower <= A_in x <= upper, lb <= x <= ub.
///
/// Empty `lb`/`ub` mean unbounded variables. Infinite entries in
/// `lower`/`upper`/`lb`/`ub` disable that side.
struct QuadraticProgram {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd gradient;
  double constant{0.0};
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd A_in;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd lb;
  Eigen::VectorXd ub;

  /// An unconstrained problem with n variables and zero cost.
  static QuadraticProgram Zero(int n);

  int num_variables() const { return static_cast<int>(gradient.size()); }
  int num_equalities() const { return static_cast<int>(A_eq.rows()); }
  int num_inequalities() const { return static_cast<int>(A_in.rows()); }

  /// Appends a row `lo <= a'x <= hi`.
  void AddInequality(const Eigen::RowVectorXd& a, double lo, double hi);
  /// Appends a row `a'x = b`.
  void AddEquality(const Eigen::RowVectorXd& a, double b);

  /// Throws ProblemConstructionError on inconsistent dimensions, an
  /// asymmetric Hessian, or a Hessian that is not positive semidefinite.
  void Validate() const;
  double Objective(const Eigen::VectorXd& x) const;
};

enum class QpStatus { kOptimal, kInfeasible, kMaxIterations, kDegenerate };

const char* ToString(QpStatus status);

struct KktResiduals {
  double primal{kInf};
  double dual{kInf};
  double complementarity{kInf};
};

/// Dual sign convention: for two-sided rows the multiplier is positive when
/// the upper side is active and negative when the lower side is active, so
/// that P x + q + A_eq' y_eq + A_in' y_in + y_bound = 0 at optimality.
struct QpSolution {
  QpStatus status{QpStatus::kInfeasible};
  Eigen::VectorXd primal;
  Eigen::VectorXd eq_dual;
  Eigen::VectorXd ineq_dual;
  Eigen::VectorXd bound_dual;
  double objective{kInf};
  int iterations{0};
  KktResiduals kkt;
  /// Largest constraint violation left when the solver stopped.
  double infeasibility{0.0};
  /// Active constraints encoded as: ineq row i -> 2i (upper) / 2i+1 (lower);
  /// bound j -> 2m+2j (upper) / 2m+2j+1 (lower), m = num_inequalities.
  std::vector<int> active_set;

  bool optimal() const { return status == QpStatus::kOptimal; }
};

struct QpWarmStart {
  Eigen::VectorXd primal;
  std::vector<int> active_set;
};

struct QpSettings {
  double tolerance{1e-6};
  int max_iterations{4000};
};

QpSolution SolveQp(const QuadraticProgram& qp,
                   const QpWarmStart* warm_start = nullptr,
                   const QpSettings& settings = {});

/// Scaled infinity-norm KKT residuals of a candidate primal/dual pair.
KktResiduals ComputeKktResiduals(const QuadraticProgram& qp,
                                 const QpSolution& sol);

}  // namespace footstep::opt
