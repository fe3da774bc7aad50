#include "footstep/mpfc.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "footstep/errors.h"

namespace footstep::control {

using Eigen::Matrix4d;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::Vector3d;
using Eigen::Vector4d;
using Eigen::VectorXd;
using opt::kInf;
using opt::QuadraticProgram;

void MpfcConfig::Validate() const {
  alip.Validate();
  auto psd = [](const auto& M) {
    const Eigen::MatrixXd dense = M;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    return (M - M.transpose()).cwiseAbs().maxCoeff() < 1e-12 &&
           es.eigenvalues().minCoeff() >= -1e-12;
  };
  if (N < 1) throw ParameterError("MPFC horizon N must be at least 1");
  if (!(t_min > 0) || !(t_min <= t_max))
    throw ParameterError("MPFC requires 0 < t_min <= t_max");
  if (!psd(Q) || !psd(Q_N) || !psd(R))
    throw ParameterError("MPFC weights must be symmetric PSD");
  if (w_T < 0 || w_u <= 0 || u_max < 0 || com_limit <= 0 || com_penalty <= 0 ||
      big_m <= 0 || trust_region_rate < 0 || foothold_radius <= 0 ||
      max_footholds < 1 || crossover_margin < 0 || step_width < 0)
    throw ParameterError("MPFC scalar parameters out of range");
}

std::vector<FootholdPolygon> FilterFootholds(
    const std::vector<FootholdPolygon>& polygons, const Vector2d& stance_xy,
    const MpfcConfig& cfg) {
  std::vector<std::pair<double, int>> keyed;
  for (int i = 0; i < static_cast<int>(polygons.size()); ++i) {
    const double d = polygons[i].Distance(stance_xy);
    if (d <= cfg.foothold_radius) keyed.emplace_back(d, i);
  }
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  if (static_cast<int>(keyed.size()) > cfg.max_footholds)
    keyed.resize(cfg.max_footholds);
  if (keyed.empty())
    throw NoFootholdError("no foothold within the filter radius");
  std::vector<FootholdPolygon> out;
  out.reserve(keyed.size());
  for (const auto& [d, i] : keyed) out.push_back(polygons[i]);
  return out;
}

double NominalRemainingTime(const MpfcConfig& cfg, double elapsed) {
  return std::max(cfg.alip.T_ss + cfg.alip.T_ds - elapsed, 0.0);
}

namespace {

Stance StanceAt(Stance s0, int n) {
  return (n % 2 == 0) ? s0 : alip::Opposite(s0);
}

Vector3d NominalStep(const MpfcConfig& cfg, Stance stance_n) {
  const double Ts2s = cfg.alip.stride_duration();
  return Vector3d(cfg.v_des.x() * Ts2s,
                  cfg.v_des.y() * Ts2s + alip::StanceSign(stance_n) * cfg.step_width,
                  0.0);
}

// Adds (S z - r)' W (S z - r) to the QP cost.
void AddQuadraticTerm(QuadraticProgram& qp, const MatrixXd& S,
                      const VectorXd& r, const MatrixXd& W) {
  const MatrixXd WS = W * S;
  qp.hessian.noalias() += 2.0 * S.transpose() * WS;
  qp.gradient.noalias() -= 2.0 * WS.transpose() * r;
  qp.constant += r.dot(W * r);
}

MatrixXd Selector(int n_vars, int start, int size) {
  MatrixXd S = MatrixXd::Zero(size, n_vars);
  S.middleCols(start, size).setIdentity();
  return S;
}

void AddBoxRows(QuadraticProgram& qp, int index, const Eigen::AlignedBox2d& box) {
  const int n = qp.num_variables();
  for (int d = 0; d < 2; ++d)
    qp.AddInequality(Eigen::RowVectorXd::Unit(n, index + d), box.min()(d),
                     box.max()(d));
}

QuadraticProgram BuildBase(const MpfcProblem& pr) {
  const MpfcConfig& cfg = pr.cfg;
  const int N = cfg.N;
  const int n = 4 * (N + 1) + 3 * N + 2 + 2 * (N + 1);
  QuadraticProgram qp = QuadraticProgram::Zero(n);
  const Matrix4d& A = pr.s2s.A_s2s;
  const Eigen::Matrix<double, 4, 3>& B = pr.s2s.B_s2s;

  // Costs.
  for (int k = 1; k <= N; ++k) {
    const bool terminal = (k == N);
    const Matrix4d& P = pr.subspace.Pi(k);
    const Matrix4d W = P.transpose() * (terminal ? cfg.Q_N : cfg.Q) * P;
    AddQuadraticTerm(qp, Selector(n, pr.x_index(k), 4), pr.subspace.d(k), W);
    if (!terminal) {
      MatrixXd S = MatrixXd::Zero(3, n);
      S.middleCols(pr.p_index(k + 1), 3).setIdentity();
      S.middleCols(pr.p_index(k), 3) -= Eigen::Matrix3d::Identity();
      AddQuadraticTerm(qp, S, NominalStep(cfg, StanceAt(pr.stance, k)), cfg.R);
    }
  }
  qp.hessian(pr.T_index(), pr.T_index()) += 2.0 * cfg.w_T;
  qp.gradient(pr.T_index()) -= 2.0 * cfg.w_T * pr.T_star;
  qp.constant += cfg.w_T * pr.T_star * pr.T_star;
  qp.hessian(pr.u_index(), pr.u_index()) += 2.0 * cfg.w_u;
  for (int k = 0; k <= N; ++k)
    for (int d = 0; d < 2; ++d)
      qp.hessian(pr.slack_index(k) + d, pr.slack_index(k) + d) +=
          2.0 * cfg.com_penalty;

  // Linearized initial state.
  {
    MatrixXd Aeq = MatrixXd::Zero(4, n);
    Aeq.middleCols(pr.x_index(0), 4).setIdentity();
    Aeq.col(pr.T_index()) = -pr.lin.v1;
    Aeq.col(pr.u_index()) = -pr.lin.B0;
    const Vector4d rhs = pr.lin.A0 * pr.x_c - pr.lin.v1 * pr.T_star;
    for (int r = 0; r < 4; ++r) qp.AddEquality(Aeq.row(r), rhs(r));
  }
  // Step-to-step dynamics.
  for (int k = 0; k < N; ++k) {
    MatrixXd Aeq = MatrixXd::Zero(4, n);
    Aeq.middleCols(pr.x_index(k + 1), 4).setIdentity();
    Aeq.middleCols(pr.x_index(k), 4) = -A;
    Aeq.middleCols(pr.p_index(k + 1), 3) = -B;
    Vector4d rhs = Vector4d::Zero();
    if (k == 0) {
      rhs = -B * pr.p0;
    } else {
      Aeq.middleCols(pr.p_index(k), 3) += B;
    }
    for (int r = 0; r < 4; ++r) qp.AddEquality(Aeq.row(r), rhs(r));
  }
  // Crossover.
  for (int k = 0; k < N; ++k) {
    const double sigma = alip::StanceSign(StanceAt(pr.stance, k));
    Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(n);
    a(pr.p_index(k + 1) + 1) = sigma;
    double lo = cfg.crossover_margin;
    if (k == 0) {
      lo += sigma * pr.p0.y();
    } else {
      a(pr.p_index(k) + 1) = -sigma;
    }
    qp.AddInequality(a, lo, kInf);
  }
  // Soft CoM limits.
  for (int k = 0; k <= N; ++k) {
    for (int d = 0; d < 2; ++d) {
      Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(n);
      a(pr.x_index(k) + d) = 1.0;
      a(pr.slack_index(k) + d) = -1.0;
      qp.AddInequality(a, -kInf, cfg.com_limit);
      a(pr.slack_index(k) + d) = 1.0;
      qp.AddInequality(a, -cfg.com_limit, kInf);
    }
  }
  if (pr.trust_region) AddBoxRows(qp, pr.p_index(1), *pr.trust_region);

  qp.lb = VectorXd::Constant(n, -kInf);
  qp.ub = VectorXd::Constant(n, kInf);
  qp.lb(pr.u_index()) = -cfg.u_max;
  qp.ub(pr.u_index()) = cfg.u_max;
  qp.lb(pr.T_index()) = pr.T_lower;
  qp.ub(pr.T_index()) = pr.T_upper;
  qp.lb.segment(pr.slack_index(0), 2 * (N + 1)).setZero();
  return qp;
}

}  // namespace

MpfcProblem MakeMpfcProblem(const Vector4d& x_c, Stance stance,
                            const Vector3d& p0, double elapsed,
                            const MpfcSolution* prev,
                            std::vector<FootholdPolygon> footholds,
                            const MpfcConfig& cfg) {
  cfg.Validate();
  if (footholds.empty()) throw NoFootholdError("MPFC needs at least one foothold");
  MpfcProblem pr;
  pr.cfg = cfg;
  pr.x_c = x_c;
  pr.stance = stance;
  pr.p0 = p0;
  pr.elapsed = elapsed;
  pr.T_star = NominalRemainingTime(cfg, elapsed);
  if (cfg.optimize_timing) {
    pr.T_lower = std::max(cfg.t_min + cfg.alip.T_ds - elapsed, 0.0);
    pr.T_upper = std::max(cfg.t_max + cfg.alip.T_ds - elapsed, pr.T_lower);
  } else {
    pr.T_lower = pr.T_upper = pr.T_star;
  }
  pr.lin = alip::ComputeTimingLinearization(cfg.alip, x_c, pr.T_star);
  pr.s2s = alip::ComputeS2SMatrices(cfg.alip, cfg.reset_mode);
  pr.subspace = alip::ComputeVelocitySubspace(cfg.alip, cfg.reset_mode,
                                              cfg.v_des, stance);
  pr.footholds = std::move(footholds);
  for (const auto& f : pr.footholds) pr.relaxed_box.extend(f.BoundingBox());
  if (prev && prev->optimal() && prev->stance == stance && prev->p.size() > 1 &&
      pr.T_star <= cfg.t_min) {
    const Vector2d center = prev->p[1].head<2>();
    const Vector2d r = Vector2d::Constant(pr.T_star * cfg.trust_region_rate);
    pr.trust_region = Eigen::AlignedBox2d(center - r, center + r);
  }
  pr.base = BuildBase(pr);
  return pr;
}

QuadraticProgram BuildMpfcQp(const MpfcProblem& pr,
                             const std::vector<int>& assignment) {
  const int N = pr.cfg.N;
  if (static_cast<int>(assignment.size()) > N)
    throw ProblemConstructionError("assignment longer than the horizon");
  QuadraticProgram qp = pr.base;
  const int n = qp.num_variables();
  for (int k = 1; k <= N; ++k) {
    const int pi = pr.p_index(k);
    if (k <= static_cast<int>(assignment.size())) {
      const int idx = assignment[k - 1];
      if (idx < 0 || idx >= static_cast<int>(pr.footholds.size()))
        throw ProblemConstructionError("assignment index out of range");
      const FootholdPolygon& f = pr.footholds[idx];
      for (int r = 0; r < f.num_edges(); ++r) {
        Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(n);
        a.segment<2>(pi) = f.F.row(r);
        qp.AddInequality(a, -kInf, f.c(r));
      }
      Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(n);
      a.segment<3>(pi) = f.f.transpose();
      qp.AddEquality(a, f.b);
    } else {
      AddBoxRows(qp, pi, pr.relaxed_box);
      qp.AddEquality(Eigen::RowVectorXd::Unit(n, pi + 2), pr.p0.z());
    }
  }
  return qp;
}

double EvaluateMpfcCost(const MpfcProblem& pr, const VectorXd& z) {
  const MpfcConfig& cfg = pr.cfg;
  double J = 0.0;
  for (int k = 1; k <= cfg.N; ++k) {
    const Vector4d e = pr.subspace.Pi(k) * (z.segment<4>(pr.x_index(k)) - pr.subspace.d(k));
    J += e.dot((k == cfg.N ? cfg.Q_N : cfg.Q) * e);
    if (k < cfg.N) {
      const Vector3d dp = z.segment<3>(pr.p_index(k + 1)) - z.segment<3>(pr.p_index(k)) -
                          NominalStep(cfg, StanceAt(pr.stance, k));
      J += dp.dot(cfg.R * dp);
    }
  }
  const double T = z(pr.T_index()), u = z(pr.u_index());
  J += cfg.w_T * (T - pr.T_star) * (T - pr.T_star) + cfg.w_u * u * u;
  J += cfg.com_penalty * z.segment(pr.slack_index(0), 2 * (cfg.N + 1)).squaredNorm();
  return J;
}

namespace {

std::vector<int> CandidateOrder(const MpfcProblem& pr, const MpfcSolution* prev,
                                int k) {
  Vector2d ref;
  bool have_ref = false;
  if (prev && prev->optimal()) {
    const int shift = (prev->stance == pr.stance) ? 0 : 1;
    const size_t j = static_cast<size_t>(k + shift);
    if (j < prev->p.size()) {
      ref = prev->p[j].head<2>();
      have_ref = true;
    }
  }
  if (!have_ref) {
    Vector3d p = pr.p0;
    for (int i = 0; i < k; ++i) p += NominalStep(pr.cfg, StanceAt(pr.stance, i));
    ref = p.head<2>();
  }
  std::vector<std::pair<double, int>> keyed;
  for (int i = 0; i < static_cast<int>(pr.footholds.size()); ++i)
    keyed.emplace_back(pr.footholds[i].Distance(ref), i);
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<int> order;
  for (const auto& kv : keyed) order.push_back(kv.second);
  return order;
}

std::optional<std::vector<int>> AssignmentHint(
    const MpfcProblem& pr, const MpfcSolution* prev,
    const std::vector<std::vector<int>>& candidates) {
  if (!prev || !prev->optimal()) return std::nullopt;
  const int shift = (prev->stance == pr.stance) ? 0 : 1;
  std::vector<int> hint;
  for (int k = 1; k <= pr.cfg.N; ++k) {
    const size_t j = static_cast<size_t>(k - 1 + shift);
    int idx = candidates[k - 1].front();
    if (j < prev->assignment.size()) {
      for (int i = 0; i < static_cast<int>(pr.footholds.size()); ++i)
        if (pr.footholds[i].id == prev->assignment[j]) idx = i;
    }
    hint.push_back(idx);
  }
  return hint;
}

}  // namespace

MpfcSolution SolveMpfc(const Vector4d& x_c, Stance stance, const Vector3d& p0,
                       double elapsed, const MpfcSolution* prev,
                       const std::vector<FootholdPolygon>& footholds,
                       const MpfcConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  MpfcSolution sol;
  sol.stance = stance;
  sol.elapsed = elapsed;
  const MpfcProblem pr =
      MakeMpfcProblem(x_c, stance, p0, elapsed, prev,
                      FilterFootholds(footholds, p0.head<2>(), cfg), cfg);
  std::vector<std::vector<int>> candidates;
  for (int k = 1; k <= cfg.N; ++k) candidates.push_back(CandidateOrder(pr, prev, k));
  opt::MiqpSettings settings;
  settings.use_relaxation_bounds = cfg.use_relaxation_bounds;
  const opt::MiqpResult res = opt::SolveAssignmentMiqp(
      [&pr](const std::vector<int>& a) { return BuildMpfcQp(pr, a); },
      candidates, AssignmentHint(pr, prev, candidates), settings);
  sol.stats = res.stats;
  if (res.status == opt::MiqpStatus::kOptimal) {
    const VectorXd& z = res.solution.primal;
    sol.status = MpfcStatus::kOptimal;
    sol.objective = res.solution.objective;
    sol.u = z(pr.u_index());
    sol.T = z(pr.T_index());
    sol.p.push_back(p0);
    for (int k = 0; k <= cfg.N; ++k) sol.x.push_back(z.segment<4>(pr.x_index(k)));
    for (int k = 1; k <= cfg.N; ++k) {
      sol.p.push_back(z.segment<3>(pr.p_index(k)));
      sol.assignment.push_back(pr.footholds[res.assignment[k - 1]].id);
    }
  } else {
    sol.status = MpfcStatus::kInfeasible;
    sol.diagnostics = "all " + std::to_string(res.stats.leaf_count) +
                      " foothold assignments infeasible (" +
                      std::to_string(pr.footholds.size()) + " footholds, T in [" +
                      std::to_string(pr.T_lower) + ", " + std::to_string(pr.T_upper) +
                      "])";
  }
  sol.solve_time_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  return sol;
}

double BigMViolation(const MpfcSolution& sol,
                     const std::vector<FootholdPolygon>& footholds, double M) {
  double worst = 0.0;
  for (size_t k = 0; k < sol.assignment.size(); ++k) {
    const Vector3d& p = sol.p[k + 1];
    for (const auto& f : footholds) {
      const double relax = (f.id == sol.assignment[k]) ? 0.0 : M;
      worst = std::max(worst, ((f.F * p.head<2>() - f.c).array() - relax).maxCoeff());
      worst = std::max(worst, std::abs(f.f.dot(p) - f.b) - relax);
    }
  }
  return std::max(worst, 0.0);
}

FootstepCommand ExtractControls(const MpfcSolution& sol, double elapsed,
                                double T_ds, const FootstepCommand* previous) {
  FootstepCommand cmd;
  cmd.ankle_torque = sol.u;
  cmd.remaining_time = sol.T;
  if (elapsed < T_ds && previous) {
    cmd.next_footstep = previous->next_footstep;
  } else {
    cmd.next_footstep = sol.p.size() > 1 ? sol.p[1] : Vector3d::Zero();
  }
  return cmd;
}

MpfcController::MpfcController(MpfcConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.Validate();
}

void MpfcController::Reset() {
  last_.reset();
  consecutive_failures_ = 0;
}

const MpfcSolution& MpfcController::Solve(
    const Vector4d& x_c, Stance stance, const Vector3d& p0, double elapsed,
    const std::vector<FootholdPolygon>& footholds) {
  const auto start = std::chrono::steady_clock::now();
  MpfcSolution sol;
  try {
    sol = SolveMpfc(x_c, stance, p0, elapsed, last(), footholds, cfg_);
  } catch (const NoFootholdError& e) {
    sol.status = MpfcStatus::kInfeasible;
    sol.stance = stance;
    sol.elapsed = elapsed;
    sol.diagnostics = e.what();
  }
  if (sol.optimal()) {
    consecutive_failures_ = 0;
    last_ = sol;
    return *last_;
  }
  ++consecutive_failures_;
  // Fall back to the previous plan's footstep with clamped timing.
  const double T_star = NominalRemainingTime(cfg_, elapsed);
  const double lo = cfg_.optimize_timing
                        ? std::max(cfg_.t_min + cfg_.alip.T_ds - elapsed, 0.0)
                        : T_star;
  const double hi = cfg_.optimize_timing
                        ? std::max(cfg_.t_max + cfg_.alip.T_ds - elapsed, lo)
                        : T_star;
  MpfcSolution fb = sol;
  fb.p = {p0};
  fb.u = 0.0;
  Vector3d step = p0 + NominalStep(cfg_, stance);
  double T = T_star;
  if (last_) {
    const int shift = (last_->stance == stance) ? 0 : 1;
    if (static_cast<size_t>(1 + shift) < last_->p.size()) step = last_->p[1 + shift];
    if (shift == 0) T = last_->T - (elapsed - last_->elapsed);
  }
  fb.p.push_back(step);
  fb.T = std::clamp(T, lo, hi);
  fb.solve_time_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  fallback_ = fb;
  return fallback_;
}

std::string ToJsonLine(const MpfcSolution& sol, double timestamp) {
  nlohmann::json j;
  j["t"] = timestamp;
  j["status"] = sol.optimal() ? "optimal" : "infeasible";
  j["stance"] = alip::ToString(sol.stance);
  j["objective"] = sol.optimal() ? nlohmann::json(sol.objective) : nlohmann::json();
  j["assignment"] = sol.assignment;
  j["T"] = sol.T;
  j["u"] = sol.u;
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& p : sol.p) steps.push_back({p.x(), p.y(), p.z()});
  j["footsteps"] = steps;
  j["solve_ms"] = sol.solve_time_ms;
  j["qp_solves"] = sol.stats.qp_solves;
  if (!sol.diagnostics.empty()) j["diagnostics"] = sol.diagnostics;
  return j.dump();
}

}  // namespace footstep::control
