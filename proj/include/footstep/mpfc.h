#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "footstep/alip.h"
#include "footstep/foothold.h"
#include "footstep/miqp.h"
#include "footstep/qp.h"

namespace footstep::control {

using alip::Stance;

/// Weights and limits of the footstep MPC. State-weight diagonals follow the
/// state ordering (x_com, y_com, L_x, L_y).
struct MpfcConfig {
  alip::AlipParams<double> alip;
  alip::ResetMode reset_mode{alip::ResetMode::kLinearRamp};
  int N{2};
  double t_min{0.27};
  double t_max{0.33};
  Eigen::Vector2d v_des{0.375, 0.0};
  double step_width{0.15};
  Eigen::Matrix4d Q{Eigen::Vector4d(10, 10, 5, 5).asDiagonal()};
  Eigen::Matrix4d Q_N{Eigen::Vector4d(1000, 1000, 20, 20).asDiagonal()};
  Eigen::Matrix3d R{Eigen::Vector3d(25, 25, 0).asDiagonal()};
  double w_T{100.0};
  double w_u{0.01};
  double u_max{22.0};
  double com_limit{0.35};
  double com_penalty{1000.0};
  double big_m{10.0};
  double trust_region_rate{1.0};
  double foothold_radius{1.5};
  int max_footholds{10};
  double crossover_margin{0.04};
  bool optimize_timing{true};
  bool use_relaxation_bounds{true};

  void Validate() const;
};

enum class MpfcStatus { kOptimal, kInfeasible };

struct MpfcSolution {
  MpfcStatus status{MpfcStatus::kInfeasible};
  Stance stance{Stance::kLeft};
  /// s2s states x_0..x_N.
  std::vector<Eigen::Vector4d> x;
  /// Footsteps p_0..p_N in the world frame; p_0 is the current stance foot.
  std::vector<Eigen::Vector3d> p;
  /// Foothold id chosen for each planned step p_1..p_N.
  std::vector<int> assignment;
  double u{0.0};
  double T{0.0};
  /// Elapsed time since touchdown when this plan was computed.
  double elapsed{0.0};
  double objective{opt::kInf};
  double solve_time_ms{0.0};
  opt::MiqpStats stats;
  std::string diagnostics;

  bool optimal() const { return status == MpfcStatus::kOptimal; }
};

/// Precomputed data shared by every leaf of one MPFC solve.
struct MpfcProblem {
  MpfcConfig cfg;
  Eigen::Vector4d x_c;
  Stance stance{Stance::kLeft};
  Eigen::Vector3d p0;
  double elapsed{0.0};
  double T_star{0.0};
  double T_lower{0.0};
  double T_upper{0.0};
  alip::TimingLinearization<double> lin;
  alip::S2SMatrices<double> s2s;
  alip::VelocitySubspace<double> subspace;
  std::vector<FootholdPolygon> footholds;
  std::optional<Eigen::AlignedBox2d> trust_region;
  Eigen::AlignedBox2d relaxed_box;
  opt::QuadraticProgram base;

  int num_variables() const { return base.num_variables(); }
  int x_index(int n) const { return 4 * n; }
  int p_index(int n) const { return 4 * (cfg.N + 1) + 3 * (n - 1); }
  int u_index() const { return 4 * (cfg.N + 1) + 3 * cfg.N; }
  int T_index() const { return u_index() + 1; }
  int slack_index(int n) const { return T_index() + 1 + 2 * n; }
};

/// Polygons whose 2D set comes within `radius` of the stance foot, nearest
/// first, capped at cfg.max_footholds. Throws NoFootholdError when empty.
std::vector<FootholdPolygon> FilterFootholds(
    const std::vector<FootholdPolygon>& polygons,
    const Eigen::Vector2d& stance_xy, const MpfcConfig& cfg);

/// Nominal remaining time of the current stance phase.
double NominalRemainingTime(const MpfcConfig& cfg, double elapsed);

MpfcProblem MakeMpfcProblem(const Eigen::Vector4d& x_c, Stance stance,
                            const Eigen::Vector3d& p0, double elapsed,
                            const MpfcSolution* prev,
                            std::vector<FootholdPolygon> footholds,
                            const MpfcConfig& cfg);

/// QP for a (possibly partial) assignment of indices into
/// problem.footholds. Steps beyond the assignment are relaxed to the
/// bounding box of all footholds.
opt::QuadraticProgram BuildMpfcQp(const MpfcProblem& problem,
                                  const std::vector<int>& assignment);

/// The MPC objective evaluated directly from its definition, for checking.
double EvaluateMpfcCost(const MpfcProblem& problem, const Eigen::VectorXd& z);

MpfcSolution SolveMpfc(const Eigen::Vector4d& x_c, Stance stance,
                       const Eigen::Vector3d& p0, double elapsed,
                       const MpfcSolution* prev,
                       const std::vector<FootholdPolygon>& footholds,
                       const MpfcConfig& cfg);

/// Largest violation of the big-M foothold constraints for the returned
/// binaries, over all polygons; zero for a consistent solution.
double BigMViolation(const MpfcSolution& sol,
                     const std::vector<FootholdPolygon>& footholds, double M);

struct FootstepCommand {
  Eigen::Vector3d next_footstep;
  double remaining_time{0.0};
  double ankle_torque{0.0};
};

/// Footstep and timing are frozen to `previous` until T_ds after touchdown.
FootstepCommand ExtractControls(const MpfcSolution& sol, double elapsed,
                                double T_ds,
                                const FootstepCommand* previous = nullptr);

/// Owns warm-start state across solves of one control loop and falls back to
/// the previous plan when a solve is infeasible.
class MpfcController {
 public:
  explicit MpfcController(MpfcConfig cfg);

  const MpfcSolution& Solve(const Eigen::Vector4d& x_c, Stance stance,
                            const Eigen::Vector3d& p0, double elapsed,
                            const std::vector<FootholdPolygon>& footholds);

  const MpfcSolution* last() const { return last_ ? &*last_ : nullptr; }
  int consecutive_failures() const { return consecutive_failures_; }
  const MpfcConfig& config() const { return cfg_; }
  void Reset();

 private:
  MpfcConfig cfg_;
  std::optional<MpfcSolution> last_;
  MpfcSolution fallback_;
  int consecutive_failures_{0};
};

std::string ToJsonLine(const MpfcSolution& sol, double timestamp);

}  // namespace footstep::control
