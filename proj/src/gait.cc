#include "footstep/gait.h"

#include <algorithm>
#include <cmath>

namespace footstep::gait {

using Eigen::Vector2d;
using Eigen::Vector3d;

Vector2d ComPlane(const Vector3d& p_n, const Vector3d& p_n1) {
  const Vector3d p = p_n1 - p_n;
  const double det = p.x() * p.x() + p.y() * p.y();
  if (det == 0.0) return Vector2d::Zero();
  // Inverse of [[px, py], [-py, px]] applied to (pz, 0).
  return Vector2d(p.x() * p.z(), p.y() * p.z()) / det;
}

Vector3d SwingWaypoint(const Vector3d& p0, const Vector3d& p_des, double clearance) {
  const Vector3d dp = p_des - p0;
  const Vector3d ez = Vector3d::UnitZ();
  const double len = dp.norm();
  Vector3d n_p = ez;
  if (len > 0.0) {
    const Vector3d u = dp / len;
    const Vector3d perp = ez - ez.dot(u) * u;
    if (perp.norm() > 1e-12) n_p = perp.normalized();
  }
  const double s = std::clamp((len - 0.1) / 0.1, 0.0, 1.0);
  const Vector3d n_b = (1.0 - s) * ez + s * n_p;
  const double c_clear = clearance + std::min(clearance, dp.z());
  return p0 + 0.5 * dp + c_clear * n_b.normalized();
}

SwingTrajectory SwingTrajectory::Stationary(const Vector3d& p) {
  SwingTrajectory traj;
  traj.rest_ = p;
  return traj;
}

namespace {

Vector3d EvaluateSegment(const SwingSegment& seg, double t, int order) {
  const double L = seg.t1 - seg.t0;
  const double tau = std::clamp((t - seg.t0) / L, 0.0, 1.0);
  Vector3d out = Vector3d::Zero();
  for (int k = order; k < seg.coeffs.cols(); ++k) {
    double factor = 1.0;
    for (int m = 0; m < order; ++m) factor *= (k - m);
    out += seg.coeffs.col(k) * factor * std::pow(tau, k - order);
  }
  return out / std::pow(L, order);
}

}  // namespace

Vector3d SwingTrajectory::Evaluate(double t, int order) const {
  if (segments_.empty()) return order == 0 ? rest_ : Vector3d::Zero();
  const SwingSegment* seg = &segments_.front();
  for (const auto& s : segments_)
    if (s.t0 <= t) seg = &s;
  if (t < seg->t0) return order == 0 ? EvaluateSegment(*seg, seg->t0, 0) : Vector3d::Zero();
  if (t > seg->t1) return order == 0 ? EvaluateSegment(*seg, seg->t1, 0) : Vector3d::Zero();
  return EvaluateSegment(*seg, t, order);
}

double SwingTrajectory::end_time() const {
  return segments_.empty() ? 0.0 : segments_.back().t1;
}

SwingTrajectory SwingTrajectory::Spliced(double t, SwingSegment seg) const {
  SwingTrajectory out;
  out.rest_ = rest_;
  for (const auto& s : segments_)
    if (s.t0 < t) out.segments_.push_back(s);
  out.segments_.push_back(std::move(seg));
  return out;
}

SwingTrajectory SwingRetime(const SwingTrajectory& prev, double t_k, double T,
                            const Vector3d& p_mid, const Vector3d& p_des) {
  const double L = T - t_k;
  if (!(L >= 0.01)) return prev;
  const int n = kSwingDegree + 1;
  // A waypoint squeezed against the start would dominate the fit; once it is
  // within the hold window it is dropped like a passed one.
  const bool with_mid = 0.5 * T - t_k > 0.01;
  const int m = with_mid ? 7 : 6;

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  for (int j = 2; j < n; ++j)
    for (int k = 2; k < n; ++k)
      H(j, k) = double(j * (j - 1) * k * (k - 1)) / double(j + k - 3);

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, n);
  Eigen::MatrixXd b(m, 3);
  const Vector3d p = prev.Evaluate(t_k, 0);
  const Vector3d v = prev.Evaluate(t_k, 1);
  const Vector3d a = prev.Evaluate(t_k, 2);
  A(0, 0) = 1.0;
  A(1, 1) = 1.0;
  A(2, 2) = 2.0;
  b.row(0) = p.transpose();
  b.row(1) = (v * L).transpose();
  b.row(2) = (a * L * L).transpose();
  for (int k = 0; k < n; ++k) {
    A(3, k) = 1.0;
    A(4, k) = k;
    A(5, k) = k * (k - 1.0);
  }
  b.row(3) = p_des.transpose();
  b.row(4).setZero();
  b.row(5).setZero();
  if (with_mid) {
    const double tau = (0.5 * T - t_k) / L;
    for (int k = 0; k < n; ++k) A(6, k) = std::pow(tau, k);
    b.row(6) = p_mid.transpose();
  }

  // Null-space solve: constraints are met through a QR of A^T, so the
  // boundary residual does not inherit the conditioning of the energy Hessian.
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(A.transpose());
  const Eigen::MatrixXd Q = qr.householderQ();
  const auto R = qr.matrixQR().topLeftCorner(m, m).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd y = R.transpose().solve(b);
  const Eigen::MatrixXd c_p = Q.leftCols(m) * y;
  const Eigen::MatrixXd N = Q.rightCols(n - m);
  const Eigen::MatrixXd z = (N.transpose() * H * N).ldlt().solve(-N.transpose() * H * c_p);
  const Eigen::MatrixXd sol = c_p + N * z;

  SwingSegment seg;
  seg.t0 = t_k;
  seg.t1 = T;
  seg.coeffs = sol.topRows(n).transpose();
  return prev.Spliced(t_k, std::move(seg));
}

double AccelerationEnergy(const SwingSegment& seg) {
  const int n = static_cast<int>(seg.coeffs.cols());
  double e = 0.0;
  for (int j = 2; j < n; ++j)
    for (int k = 2; k < n; ++k)
      e += seg.coeffs.col(j).dot(seg.coeffs.col(k)) * double(j * (j - 1) * k * (k - 1)) /
           double(j + k - 3);
  return e / std::pow(seg.t1 - seg.t0, 3);
}

}  // namespace footstep::gait
