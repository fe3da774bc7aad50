#include "footstep/qp.h"

#include <algorithm>
#include <cmath>

#include "footstep/errors.h"

namespace footstep::opt {

using Eigen::MatrixXd;
using Eigen::VectorXd;

QuadraticProgram QuadraticProgram::Zero(int n) {
  QuadraticProgram qp;
  qp.hessian = MatrixXd::Zero(n, n);
  qp.gradient = VectorXd::Zero(n);
  qp.A_eq.resize(0, n);
  qp.b_eq.resize(0);
  qp.A_in.resize(0, n);
  qp.lower.resize(0);
  qp.upper.resize(0);
  return qp;
}

void QuadraticProgram::AddInequality(const Eigen::RowVectorXd& a, double lo,
                                     double hi) {
  const Eigen::Index m = A_in.rows();
  A_in.conservativeResize(m + 1, num_variables());
  A_in.row(m) = a;
  lower.conservativeResize(m + 1);
  upper.conservativeResize(m + 1);
  lower(m) = lo;
  upper(m) = hi;
}

void QuadraticProgram::AddEquality(const Eigen::RowVectorXd& a, double b) {
  const Eigen::Index m = A_eq.rows();
  A_eq.conservativeResize(m + 1, num_variables());
  A_eq.row(m) = a;
  b_eq.conservativeResize(m + 1);
  b_eq(m) = b;
}

void QuadraticProgram::Validate() const {
  const int n = num_variables();
  auto fail = [](const std::string& what) {
    throw ProblemConstructionError("QuadraticProgram: " + what);
  };
  if (hessian.rows() != n || hessian.cols() != n) fail("hessian size");
  if (A_eq.cols() != n || A_eq.rows() != b_eq.size()) fail("equality size");
  if (A_in.cols() != n || A_in.rows() != lower.size() ||
      A_in.rows() != upper.size())
    fail("inequality size");
  if ((lb.size() != 0 && lb.size() != n) || (ub.size() != 0 && ub.size() != n))
    fail("bound size");
  if (!hessian.allFinite() || !gradient.allFinite() || !A_eq.allFinite() ||
      !b_eq.allFinite() || !A_in.allFinite())
    fail("non-finite data");
  const double scale = 1.0 + hessian.cwiseAbs().maxCoeff();
  if ((hessian - hessian.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    fail("hessian is not symmetric");
  if (n > 0) {
    // A PSD matrix shifted by a small multiple of I admits a Cholesky factor.
    Eigen::LLT<MatrixXd> llt(hessian +
                             1e-9 * scale * MatrixXd::Identity(n, n));
    if (llt.info() != Eigen::Success)
      fail("hessian is not positive semidefinite");
  }
  for (Eigen::Index i = 0; i < lower.size(); ++i)
    if (lower(i) > upper(i)) fail("inequality lower > upper");
  if (lb.size() && ub.size())
    for (int i = 0; i < n; ++i)
      if (lb(i) > ub(i)) fail("bound lb > ub");
}

double QuadraticProgram::Objective(const VectorXd& x) const {
  return 0.5 * x.dot(hessian * x) + gradient.dot(x) + constant;
}

const char* ToString(QpStatus status) {
  switch (status) {
    case QpStatus::kOptimal: return "optimal";
    case QpStatus::kInfeasible: return "infeasible";
    case QpStatus::kMaxIterations: return "max_iterations";
    case QpStatus::kDegenerate: return "degenerate";
  }
  return "unknown";
}

namespace {

// Goldfarb-Idnani dual active-set method for
//   min 0.5 x'Gx + a'x  s.t.  N' x >= b,  G positive definite.
enum class DualStatus { kOptimal, kInfeasible, kMaxIterations, kDegenerate };

struct DualResult {
  DualStatus status{DualStatus::kOptimal};
  VectorXd x;
  VectorXd multipliers;
  std::vector<int> active;
  int iterations{0};
  double violation{0.0};
};

class DualActiveSet {
 public:
  DualActiveSet(const Eigen::LLT<MatrixXd>& llt, const VectorXd& a,
                const MatrixXd& N, const VectorXd& b)
      : n_(static_cast<int>(a.size())), N_(N), b_(b) {
    const MatrixXd L = llt.matrixL();
    J_ = L.transpose().triangularView<Eigen::Upper>().solve(
        MatrixXd::Identity(n_, n_));
    x_ = -llt.solve(a);
    R_ = MatrixXd::Zero(n_, n_);
    u_ = VectorXd::Zero(n_);
    active_.assign(n_, -1);
  }

  DualResult Run(const std::vector<char>& priority, int max_iterations,
                 double feasibility_tol) {
    const int m = static_cast<int>(N_.cols());
    std::vector<char> inactive(m, 1);
    DualResult res;
    VectorXd s(m), d(n_), z(n_), r(n_);
    int it = 0;
    auto finish = [&](DualStatus st) {
      res.status = st;
      res.x = x_;
      res.iterations = it;
      res.multipliers = VectorXd::Zero(m);
      res.active.assign(active_.begin(), active_.begin() + iq_);
      for (int k = 0; k < iq_; ++k) res.multipliers(active_[k]) = u_(k);
      return res;
    };

    for (;;) {
      if (++it > max_iterations) return finish(DualStatus::kMaxIterations);
      s.noalias() = N_.transpose() * x_;
      s -= b_;
      int p = -1;
      double worst = -feasibility_tol;
      for (int pass = priority.empty() ? 1 : 0; pass < 2 && p < 0; ++pass) {
        for (int i = 0; i < m; ++i) {
          if (!inactive[i]) continue;
          if (pass == 0 && !priority[i]) continue;
          if (s(i) < worst) {
            worst = s(i);
            p = i;
          }
        }
      }
      if (p < 0) return finish(DualStatus::kOptimal);

      const auto np = N_.col(p);
      double s_p = s(p);
      double u_plus = 0.0;
      for (;;) {
        if (++it > max_iterations) return finish(DualStatus::kMaxIterations);
        d.noalias() = J_.transpose() * np;
        z.noalias() = J_.rightCols(n_ - iq_) * d.tail(n_ - iq_);
        if (iq_ > 0) {
          r.head(iq_) = R_.topLeftCorner(iq_, iq_)
                            .triangularView<Eigen::Upper>()
                            .solve(d.head(iq_));
        }
        double t1 = kInf;
        int l = -1;
        for (int k = 0; k < iq_; ++k) {
          if (r(k) > 0.0) {
            const double ratio = u_(k) / r(k);
            if (ratio < t1) {
              t1 = ratio;
              l = k;
            }
          }
        }
        const double ztn = z.dot(np);
        double t2 = kInf;
        if (ztn > 1e-13 * d.squaredNorm()) t2 = -s_p / ztn;
        if (t1 == kInf && t2 == kInf) {
          res.violation = -s_p;
          return finish(DualStatus::kInfeasible);
        }
        if (t2 == kInf) {
          u_.head(iq_) -= t1 * r.head(iq_);
          u_plus += t1;
          DeleteConstraint(l, inactive);
          continue;
        }
        const double t = std::min(t1, t2);
        x_ += t * z;
        u_.head(iq_) -= t * r.head(iq_);
        u_plus += t;
        if (t2 <= t1) {
          if (!AddConstraint(d)) return finish(DualStatus::kDegenerate);
          active_[iq_ - 1] = p;
          u_(iq_ - 1) = u_plus;
          inactive[p] = 0;
          break;
        }
        DeleteConstraint(l, inactive);
        s_p = np.dot(x_) - b_(p);
      }
    }
  }

 private:
  // Appends the constraint whose transformed normal is d = J' n_p.
  bool AddConstraint(VectorXd& d) {
    for (int j = n_ - 1; j >= iq_ + 1; --j) {
      double cc = d(j - 1), ss = d(j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      d(j) = 0.0;
      ss /= h;
      cc /= h;
      if (cc < 0.0) {
        cc = -cc;
        ss = -ss;
        d(j - 1) = -h;
      } else {
        d(j - 1) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (int k = 0; k < n_; ++k) {
        const double t1 = J_(k, j - 1), t2 = J_(k, j);
        J_(k, j - 1) = t1 * cc + t2 * ss;
        J_(k, j) = xny * (t1 + J_(k, j - 1)) - t2;
      }
    }
    ++iq_;
    R_.col(iq_ - 1).head(iq_) = d.head(iq_);
    if (std::abs(d(iq_ - 1)) <= 1e-14 * r_norm_) return false;
    r_norm_ = std::max(r_norm_, std::abs(d(iq_ - 1)));
    return true;
  }

  void DeleteConstraint(int qq, std::vector<char>& inactive) {
    inactive[active_[qq]] = 1;
    for (int i = qq; i < iq_ - 1; ++i) {
      active_[i] = active_[i + 1];
      u_(i) = u_(i + 1);
      R_.col(i) = R_.col(i + 1);
    }
    active_[iq_ - 1] = -1;
    u_(iq_ - 1) = 0.0;
    R_.col(iq_ - 1).setZero();
    --iq_;
    for (int j = qq; j < iq_; ++j) {
      double cc = R_(j, j), ss = R_(j + 1, j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      cc /= h;
      ss /= h;
      R_(j + 1, j) = 0.0;
      if (cc < 0.0) {
        R_(j, j) = -h;
        cc = -cc;
        ss = -ss;
      } else {
        R_(j, j) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (int k = j + 1; k < iq_; ++k) {
        const double t1 = R_(j, k), t2 = R_(j + 1, k);
        R_(j, k) = t1 * cc + t2 * ss;
        R_(j + 1, k) = xny * (t1 + R_(j, k)) - t2;
      }
      for (int k = 0; k < n_; ++k) {
        const double t1 = J_(k, j), t2 = J_(k, j + 1);
        J_(k, j) = t1 * cc + t2 * ss;
        J_(k, j + 1) = xny * (J_(k, j) + t1) - t2;
      }
    }
  }

  int n_;
  const MatrixXd& N_;
  const VectorXd& b_;
  MatrixXd J_;
  MatrixXd R_;
  VectorXd x_;
  VectorXd u_;
  std::vector<int> active_;
  int iq_{0};
  double r_norm_{1.0};
};

// One row of the reduced inequality system  n' y >= beta, remembering which
// side of which original constraint it came from.
struct ReducedRow {
  int id;       // encoded as in QpSolution::active_set
  double scale; // norm of the reduced row before normalization
};

}  // namespace

QpSolution SolveQp(const QuadraticProgram& qp, const QpWarmStart* warm_start,
                   const QpSettings& settings) {
  qp.Validate();
  const int n = qp.num_variables();
  const int m_in = qp.num_inequalities();
  QpSolution sol;
  sol.eq_dual = VectorXd::Zero(qp.num_equalities());
  sol.ineq_dual = VectorXd::Zero(m_in);
  sol.bound_dual = VectorXd::Zero(n);

  // Null-space parametrization x = x_p + Z y of the equality constraints.
  VectorXd x_p = VectorXd::Zero(n);
  MatrixXd Z = MatrixXd::Identity(n, n);
  Eigen::ColPivHouseholderQR<MatrixXd> eq_qr;
  if (qp.num_equalities() > 0) {
    eq_qr.compute(qp.A_eq.transpose());
    const double scale = 1.0 + qp.A_eq.cwiseAbs().maxCoeff();
    eq_qr.setThreshold(1e-12 * scale);
    const int rank = static_cast<int>(eq_qr.rank());
    const MatrixXd Q = eq_qr.householderQ();
    Z = Q.rightCols(n - rank);
    // Minimum-norm particular solution through the range basis.
    const MatrixXd Y = Q.leftCols(rank);
    const MatrixXd AY = qp.A_eq * Y;
    x_p = Y * AY.colPivHouseholderQr().solve(qp.b_eq);
    const double eq_res = (qp.A_eq * x_p - qp.b_eq).cwiseAbs().maxCoeff();
    if (eq_res > settings.tolerance * (1.0 + qp.b_eq.cwiseAbs().maxCoeff())) {
      sol.status = QpStatus::kInfeasible;
      sol.infeasibility = eq_res;
      sol.primal = x_p;
      return sol;
    }
  }
  const int nr = static_cast<int>(Z.cols());

  // Collect one-sided reduced constraints.
  std::vector<ReducedRow> rows;
  std::vector<VectorXd> normals;
  std::vector<double> rhs;
  double const_violation = 0.0;
  auto add_side = [&](const Eigen::RowVectorXd& a_full, double bound, bool upper,
                      int id) {
    if (!std::isfinite(bound)) return;
    const double ax = a_full.dot(x_p);
    VectorXd c = (a_full * Z).transpose();
    double beta = upper ? ax - bound : bound - ax;  // c'y >= beta (lower)
    if (upper) c = -c;
    const double nrm = c.norm();
    const double row_scale = 1.0 + a_full.cwiseAbs().maxCoeff();
    if (nrm <= 1e-12 * row_scale) {
      if (beta > settings.tolerance * (1.0 + std::abs(bound)))
        const_violation = std::max(const_violation, beta);
      return;
    }
    rows.push_back({id, nrm});
    normals.push_back(c / nrm);
    rhs.push_back(beta / nrm);
  };
  for (int i = 0; i < m_in; ++i) {
    add_side(qp.A_in.row(i), qp.upper(i), true, 2 * i);
    add_side(qp.A_in.row(i), qp.lower(i), false, 2 * i + 1);
  }
  for (int j = 0; j < n; ++j) {
    const Eigen::RowVectorXd e = Eigen::RowVectorXd::Unit(n, j);
    if (qp.ub.size()) add_side(e, qp.ub(j), true, 2 * m_in + 2 * j);
    if (qp.lb.size()) add_side(e, qp.lb(j), false, 2 * m_in + 2 * j + 1);
  }
  if (const_violation > 0.0) {
    sol.status = QpStatus::kInfeasible;
    sol.infeasibility = const_violation;
    sol.primal = x_p;
    return sol;
  }
  const int mr = static_cast<int>(rows.size());
  MatrixXd N(nr, mr);
  VectorXd beta(mr);
  for (int k = 0; k < mr; ++k) {
    N.col(k) = normals[k];
    beta(k) = rhs[k];
  }

  std::vector<char> priority;
  if (warm_start && !warm_start->active_set.empty()) {
    priority.assign(mr, 0);
    for (int k = 0; k < mr; ++k)
      priority[k] = std::find(warm_start->active_set.begin(),
                              warm_start->active_set.end(),
                              rows[k].id) != warm_start->active_set.end();
  }

  const MatrixXd Hr = Z.transpose() * qp.hessian * Z;
  const VectorXd gr = Z.transpose() * (qp.hessian * x_p + qp.gradient);

  DualResult dual;
  if (nr == 0) {
    dual.status = DualStatus::kOptimal;
    dual.x = VectorXd::Zero(0);
    dual.multipliers = VectorXd::Zero(mr);
  } else {
    const double diag_scale =
        std::max(1.0, Hr.diagonal().cwiseAbs().maxCoeff());
    Eigen::LLT<MatrixXd> llt(Hr);
    bool definite = llt.info() == Eigen::Success;
    if (definite) {
      const VectorXd piv = MatrixXd(llt.matrixL()).diagonal();
      definite = piv.cwiseAbs2().minCoeff() > 1e-10 * diag_scale;
    }
    if (definite) {
      DualActiveSet solver(llt, gr, N, beta);
      dual = solver.Run(priority, settings.max_iterations, 1e-10);
    } else {
      // Proximal point iterations on a strongly convex surrogate.
      const double rho = 1e-3 * diag_scale;
      const MatrixXd Hp = Hr + rho * MatrixXd::Identity(nr, nr);
      Eigen::LLT<MatrixXd> llt_p(Hp);
      VectorXd y = VectorXd::Zero(nr);
      std::vector<char> prio = priority;
      int total = 0;
      bool converged = false;
      for (int outer = 0; outer < 500; ++outer) {
        DualActiveSet solver(llt_p, gr - rho * y, N, beta);
        dual = solver.Run(prio, settings.max_iterations - total, 1e-10);
        total += dual.iterations;
        if (dual.status != DualStatus::kOptimal) break;
        const double step = (dual.x - y).cwiseAbs().maxCoeff();
        y = dual.x;
        prio.assign(mr, 0);
        for (int k : dual.active) prio[k] = 1;
        if (step <= 1e-11 * (1.0 + y.cwiseAbs().maxCoeff())) {
          converged = true;
          break;
        }
      }
      dual.iterations = total;
      if (dual.status == DualStatus::kOptimal && !converged)
        dual.status = DualStatus::kMaxIterations;
    }
  }

  sol.iterations = dual.iterations;
  sol.primal = x_p + Z * dual.x;
  switch (dual.status) {
    case DualStatus::kInfeasible:
      sol.status = QpStatus::kInfeasible;
      sol.infeasibility = dual.violation;
      return sol;
    case DualStatus::kMaxIterations:
      sol.status = QpStatus::kMaxIterations;
      return sol;
    case DualStatus::kDegenerate:
      sol.status = QpStatus::kDegenerate;
      return sol;
    case DualStatus::kOptimal:
      break;
  }

  for (int k = 0; k < mr; ++k) {
    const double mu = dual.multipliers(k) / rows[k].scale;
    if (mu == 0.0) continue;
    const int id = rows[k].id;
    const bool upper = (id % 2) == 0;
    const double signed_mu = upper ? mu : -mu;
    if (id < 2 * m_in) {
      sol.ineq_dual(id / 2) += signed_mu;
    } else {
      sol.bound_dual((id - 2 * m_in) / 2) += signed_mu;
    }
    sol.active_set.push_back(id);
  }
  if (qp.num_equalities() > 0) {
    VectorXd resid = qp.hessian * sol.primal + qp.gradient +
                     qp.A_in.transpose() * sol.ineq_dual + sol.bound_dual;
    sol.eq_dual = eq_qr.solve(-resid);
  }
  sol.objective = qp.Objective(sol.primal);
  sol.kkt = ComputeKktResiduals(qp, sol);
  const double tol = settings.tolerance;
  sol.status = (sol.kkt.primal <= tol && sol.kkt.dual <= tol &&
                sol.kkt.complementarity <= tol)
                   ? QpStatus::kOptimal
                   : QpStatus::kDegenerate;
  return sol;
}

KktResiduals ComputeKktResiduals(const QuadraticProgram& qp,
                                 const QpSolution& sol) {
  const VectorXd& x = sol.primal;
  const int n = qp.num_variables();
  KktResiduals k{0.0, 0.0, 0.0};

  for (int i = 0; i < qp.num_equalities(); ++i) {
    const double r = std::abs(qp.A_eq.row(i).dot(x) - qp.b_eq(i));
    k.primal = std::max(k.primal, r / (1.0 + std::abs(qp.b_eq(i))));
  }
  auto side_check = [&](double ax, double lo, double hi, double y) {
    if (std::isfinite(hi))
      k.primal = std::max(k.primal, std::max(ax - hi, 0.0) / (1.0 + std::abs(hi)));
    if (std::isfinite(lo))
      k.primal = std::max(k.primal, std::max(lo - ax, 0.0) / (1.0 + std::abs(lo)));
    double comp = 0.0;
    if (y > 0.0) {
      comp = std::isfinite(hi) ? y * std::abs(hi - ax) : y;
    } else if (y < 0.0) {
      comp = std::isfinite(lo) ? -y * std::abs(ax - lo) : -y;
    }
    k.complementarity =
        std::max(k.complementarity, comp / (1.0 + std::abs(y)));
  };
  for (int i = 0; i < qp.num_inequalities(); ++i) {
    const double y = sol.ineq_dual.size() ? sol.ineq_dual(i) : 0.0;
    side_check(qp.A_in.row(i).dot(x), qp.lower(i), qp.upper(i), y);
  }
  for (int j = 0; j < n; ++j) {
    const double lo = qp.lb.size() ? qp.lb(j) : -kInf;
    const double hi = qp.ub.size() ? qp.ub(j) : kInf;
    const double y = sol.bound_dual.size() ? sol.bound_dual(j) : 0.0;
    side_check(x(j), lo, hi, y);
  }

  if (n == 0) return k;
  const VectorXd Px = qp.hessian * x;
  VectorXd grad = Px + qp.gradient;
  if (sol.eq_dual.size()) grad += qp.A_eq.transpose() * sol.eq_dual;
  if (sol.ineq_dual.size()) grad += qp.A_in.transpose() * sol.ineq_dual;
  if (sol.bound_dual.size()) grad += sol.bound_dual;
  const double scale =
      1.0 + std::max(Px.cwiseAbs().maxCoeff(), qp.gradient.cwiseAbs().maxCoeff());
  k.dual = grad.cwiseAbs().maxCoeff() / scale;
  return k;
}

}  // namespace footstep::opt
