#pragma once

#include <vector>

#include <Eigen/Dense>

namespace footstep::gait {

/// Slopes (k_x, k_y) of the least-inclined plane through two stance feet:
/// the CoM height reference is z = H + k_x x + k_y y in the stance frame.
/// Returns zero slopes when the feet coincide in 2D.
Eigen::Vector2d ComPlane(const Eigen::Vector3d& p_n, const Eigen::Vector3d& p_n1);

/// Mid-swing waypoint above the line from p0 to p_des. The lift direction
/// blends from vertical to the normal of the step for steps of 0.1 to 0.2 m,
/// and the clearance grows by the step-up height (at most c).
Eigen::Vector3d SwingWaypoint(const Eigen::Vector3d& p0, const Eigen::Vector3d& p_des,
                              double clearance = 0.15);

/// One polynomial per axis on [t0, t1], in normalized time tau = (t - t0) / (t1 - t0).
struct SwingSegment {
  double t0{0.0};
  double t1{0.0};
  Eigen::Matrix<double, 3, Eigen::Dynamic> coeffs;  // column k multiplies tau^k
};

/// Piecewise polynomial swing-foot path. Times are measured from lift-off.
/// Before the first segment and after the last one the path holds its end
/// positions with zero derivatives.
class SwingTrajectory {
 public:
  SwingTrajectory() = default;
  /// Foot resting at p.
  static SwingTrajectory Stationary(const Eigen::Vector3d& p);

  /// Derivative `order` (0, 1 or 2) at time t.
  Eigen::Vector3d Evaluate(double t, int order = 0) const;
  double end_time() const;
  const std::vector<SwingSegment>& segments() const { return segments_; }

  /// Drops everything after t and appends `seg`, which must start at t.
  SwingTrajectory Spliced(double t, SwingSegment seg) const;

 private:
  Eigen::Vector3d rest_{Eigen::Vector3d::Zero()};
  std::vector<SwingSegment> segments_;
};

/// Polynomial degree used by SwingRetime.
inline constexpr int kSwingDegree = 9;

/// Minimum-acceleration replan from t_k to touchdown at T: matches position,
/// velocity and acceleration of `prev` at t_k, ends at rest at p_des and
/// passes p_mid at T / 2 while that time is still ahead. Keeps `prev` when
/// fewer than 10 ms remain.
SwingTrajectory SwingRetime(const SwingTrajectory& prev, double t_k, double T,
                            const Eigen::Vector3d& p_mid, const Eigen::Vector3d& p_des);

/// Integral of the squared acceleration over one segment.
double AccelerationEnergy(const SwingSegment& seg);

}  // namespace footstep::gait
