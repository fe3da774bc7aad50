#include "footstep/gait.h"

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

namespace footstep::gait {
namespace {

using Eigen::Vector2d;
using Eigen::Vector3d;

TEST(ComPlane, Examples) {
  EXPECT_EQ(ComPlane(Vector3d::Zero(), Vector3d(0.2, 0.2, 0)), Vector2d::Zero());
  const Vector2d k = ComPlane(Vector3d(1, 2, 3), Vector3d(2, 2, 3.1));
  EXPECT_NEAR(k.x(), 0.1, 1e-12);
  EXPECT_NEAR(k.y(), 0.0, 1e-12);
  EXPECT_EQ(ComPlane(Vector3d(1, 1, 0), Vector3d(1, 1, 0.3)), Vector2d::Zero());
}

TEST(ComPlane, PassesThroughBothFeet) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector3d a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng));
    const Vector3d p = b - a;
    const Vector2d k = ComPlane(a, b);
    EXPECT_NEAR(k.x() * p.x() + k.y() * p.y(), p.z(), 1e-12);
    // Least inclined: the slope has no component across the step.
    EXPECT_NEAR(-p.y() * k.x() + p.x() * k.y(), 0.0, 1e-12);
  }
}

TEST(SwingWaypoint, Examples) {
  const Vector3d p0(0.4, -0.1, 0.2);
  EXPECT_TRUE(SwingWaypoint(p0, p0, 0.15).isApprox(p0 + Vector3d(0, 0, 0.15), 1e-15));

  // A flat 0.2 m step uses the step normal, which is vertical on flat ground.
  const Vector3d flat = p0 + Vector3d(0.2, 0, 0);
  EXPECT_LT((SwingWaypoint(p0, flat, 0.15) - (p0 + Vector3d(0.1, 0, 0.15))).norm(), 1e-12);

  // Step up (0.3, 0, 0.1): s = 1, n_p = (-1, 0, 3)/sqrt(10), clearance 0.25.
  const Vector3d mid = SwingWaypoint(Vector3d::Zero(), Vector3d(0.3, 0, 0.1), 0.15);
  EXPECT_NEAR(mid.x(), 0.15 - 0.25 / std::sqrt(10.0), 1e-12);
  EXPECT_NEAR(mid.y(), 0.0, 1e-12);
  EXPECT_NEAR(mid.z(), 0.05 + 0.75 / std::sqrt(10.0), 1e-12);

  // Halfway through the blend: s = 0.5 at |dp| = 0.15.
  const Vector3d dp(0.09, 0, 0.12);
  const Vector3d n_p = Vector3d(-0.12, 0, 0.09).normalized();
  const Vector3d n_b = (0.5 * Vector3d::UnitZ() + 0.5 * n_p).normalized();
  EXPECT_LT((SwingWaypoint(Vector3d::Zero(), dp, 0.1) - (0.5 * dp + 0.2 * n_b)).norm(), 1e-12);
}

TEST(SwingRetime, StationaryStaysPut) {
  const Vector3d p(1, 2, 3);
  const auto traj = SwingRetime(SwingTrajectory::Stationary(p), 0.0, 0.3, p, p);
  for (double t = 0; t <= 0.3; t += 0.01) {
    EXPECT_LT((traj.Evaluate(t) - p).norm(), 1e-12);
    EXPECT_LT(traj.Evaluate(t, 1).norm(), 1e-10);
  }
}

SwingTrajectory RandomPrefix(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  const Vector3d p0(u(rng), u(rng), 0);
  const Vector3d des(0.3 + u(rng), u(rng), u(rng));
  return SwingRetime(SwingTrajectory::Stationary(p0), 0.0, 0.3 + u(rng) * 0.1,
                     SwingWaypoint(p0, des, 0.15), des);
}

TEST(SwingRetime, BoundaryConditionsHold) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (int trial = 0; trial < 100; ++trial) {
    const SwingTrajectory prev = RandomPrefix(rng);
    const double t_k = 0.02 + 0.25 * (u(rng) + 0.2);
    const double T = t_k + 0.02 + 0.3 * (u(rng) + 0.2);
    const Vector3d des(0.4 + u(rng), u(rng), u(rng));
    const Vector3d mid = SwingWaypoint(prev.Evaluate(0.0), des, 0.15);
    const SwingTrajectory next = SwingRetime(prev, t_k, T, mid, des);
    for (int order = 0; order <= 2; ++order) {
      // Continuity is checked on the new segment itself, just after t_k.
      EXPECT_LT((next.Evaluate(t_k, order) - prev.Evaluate(t_k, order)).norm(),
                1e-9 * std::max(1.0, prev.Evaluate(t_k, order).norm()))
          << order;
    }
    EXPECT_LT((next.Evaluate(T) - des).norm(), 1e-9);
    EXPECT_LT(next.Evaluate(T, 1).norm(), 1e-8);
    EXPECT_LT(next.Evaluate(T, 2).norm(), 1e-6);
    if (0.5 * T - t_k > 0.01) EXPECT_LT((next.Evaluate(0.5 * T) - mid).norm(), 1e-9);
    EXPECT_DOUBLE_EQ(next.end_time(), T);
  }
}

TEST(SwingRetime, MidpointDroppedOncePassed) {
  std::mt19937_64 rng(3);
  const SwingTrajectory prev = RandomPrefix(rng);
  const Vector3d des(0.5, 0.1, 0);
  const Vector3d far_mid(9, 9, 9);
  const SwingTrajectory next = SwingRetime(prev, 0.2, 0.3, far_mid, des);
  EXPECT_LT((next.Evaluate(0.3) - des).norm(), 1e-9);
  EXPECT_LT(next.Evaluate(0.25).norm(), 2.0);
}

TEST(SwingRetime, HoldsWhenTooLate) {
  std::mt19937_64 rng(4);
  const SwingTrajectory prev = RandomPrefix(rng);
  const SwingTrajectory next = SwingRetime(prev, 0.295, 0.3, Vector3d::Zero(), Vector3d::Ones());
  EXPECT_EQ(next.segments().size(), prev.segments().size());
  EXPECT_EQ(next.Evaluate(0.3), prev.Evaluate(0.3));
}

// Energy of the new segment by trapezoidal quadrature of the evaluated
// acceleration on a dense grid.
double QuadratureEnergy(const SwingTrajectory& traj, double t0, double t1) {
  const int grid = 4000;
  double e = 0;
  for (int g = 0; g <= grid; ++g) {
    const double t = t0 + (t1 - t0) * g / grid;
    const double w = (g == 0 || g == grid) ? 0.5 : 1.0;
    e += w * traj.Evaluate(t, 2).squaredNorm();
  }
  return e * (t1 - t0) / grid;
}

TEST(SwingRetime, EnergyMatchesQuadrature) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (int trial = 0; trial < 30; ++trial) {
    const SwingTrajectory prev = RandomPrefix(rng);
    const double t_k = 0.05 + 0.5 * (u(rng) + 0.2);
    const double T = t_k + 0.1 + 0.5 * (u(rng) + 0.2);
    const Vector3d des(0.4 + u(rng), u(rng), u(rng));
    const SwingTrajectory next =
        SwingRetime(prev, t_k, T, SwingWaypoint(prev.Evaluate(0.0), des, 0.15), des);
    const double exact = AccelerationEnergy(next.segments().back());
    EXPECT_NEAR(exact, QuadratureEnergy(next, t_k, T), 1e-4 * exact);
  }
}

// First-order optimality checked by finite differences: any perturbation that
// keeps every boundary and waypoint constraint satisfied must not lower the
// quadrature energy. Feasible directions come from the kernel of the
// constraint rows written in the normalized monomial basis.
TEST(SwingRetime, NoFeasibleDescentDirection) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  const int n = kSwingDegree + 1;
  for (int trial = 0; trial < 20; ++trial) {
    const SwingTrajectory prev = RandomPrefix(rng);
    const double t_k = 0.05 + 0.5 * (u(rng) + 0.2);
    const double T = t_k + 0.1 + 0.5 * (u(rng) + 0.2);
    const Vector3d des(0.4 + u(rng), u(rng), u(rng));
    const SwingTrajectory next =
        SwingRetime(prev, t_k, T, SwingWaypoint(prev.Evaluate(0.0), des, 0.15), des);
    const SwingSegment& seg = next.segments().back();

    auto row = [&](double tau, int order) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
      for (int k = order; k < n; ++k) {
        double f = 1;
        for (int m = 0; m < order; ++m) f *= (k - m);
        r(k) = f * std::pow(tau, k - order);
      }
      return r;
    };
    std::vector<Eigen::RowVectorXd> rows;
    for (int o = 0; o < 3; ++o) rows.push_back(row(0, o)), rows.push_back(row(1, o));
    if (0.5 * T - t_k > 0.01) rows.push_back(row((0.5 * T - t_k) / (T - t_k), 0));
    Eigen::MatrixXd A(rows.size(), n);
    for (size_t i = 0; i < rows.size(); ++i) A.row(i) = rows[i];
    const Eigen::MatrixXd kernel = A.fullPivLu().kernel();
    ASSERT_EQ(kernel.cols(), n - static_cast<int>(rows.size()));

    const double e0 = QuadratureEnergy(next, t_k, T);
    for (int dir = 0; dir < kernel.cols(); ++dir) {
      for (double sign : {-1.0, 1.0}) {
        SwingSegment moved = seg;
        const Eigen::VectorXd d = kernel.col(dir).normalized();
        for (int axis = 0; axis < 3; ++axis)
          moved.coeffs.row(axis) += sign * 1e-3 * seg.coeffs.cwiseAbs().maxCoeff() * d.transpose();
        const SwingTrajectory other = prev.Spliced(t_k, moved);
        EXPECT_GE(QuadratureEnergy(other, t_k, T), e0 * (1 - 1e-9)) << trial << " " << dir;
      }
    }
  }
}

}  // namespace
}  // namespace footstep::gait
