#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "footstep/errors.h"

/// Closed-form mathematics of the angular-momentum linear inverted pendulum.
///
/// State ordering is (x_com, y_com, L_x, L_y), expressed relative to the
/// stance contact point. All functions are templated on the scalar type and
/// return fixed-size Eigen objects.
namespace footstep::alip {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Vector4 = Eigen::Matrix<Scalar, 4, 1>;
template <typename Scalar>
using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;
template <typename Scalar>
using Matrix43 = Eigen::Matrix<Scalar, 4, 3>;
template <typename Scalar>
using Matrix42 = Eigen::Matrix<Scalar, 4, 2>;

/// ALIP state (x_com, y_com, L_x, L_y).
template <typename Scalar>
using AlipState = Vector4<Scalar>;

enum class Stance { kLeft, kRight };

inline Stance Opposite(Stance s) {
  return s == Stance::kLeft ? Stance::kRight : Stance::kLeft;
}

/// Lateral sign of the nominal step: -1 while standing on the left foot.
inline int StanceSign(Stance s) { return s == Stance::kLeft ? -1 : 1; }

inline const char* ToString(Stance s) {
  return s == Stance::kLeft ? "left" : "right";
}

enum class ResetMode { kLinearRamp, kInstantaneous, kMixedCassie };

inline const char* ToString(ResetMode m) {
  switch (m) {
    case ResetMode::kLinearRamp: return "linear_ramp";
    case ResetMode::kInstantaneous: return "instantaneous";
    case ResetMode::kMixedCassie: return "mixed_cassie";
  }
  return "unknown";
}

template <typename Scalar = double>
struct AlipParams {
  Scalar m{30.0};
  Scalar H{0.85};
  Scalar g{9.81};
  Scalar T_ss{0.3};
  Scalar T_ds{0.1};

  void Validate() const {
    using std::isfinite;
    if (!(m > 0) || !(H > 0) || !(g > 0) || !(T_ss > 0) || !(T_ds >= 0) ||
        !isfinite(m) || !isfinite(H) || !isfinite(g) || !isfinite(T_ss) ||
        !isfinite(T_ds)) {
      throw ParameterError(
          "AlipParams require m, H, g, T_ss > 0 and T_ds >= 0 (all finite)");
    }
  }
  Scalar omega() const { return std::sqrt(g / H); }
  Scalar stride_duration() const { return T_ss + T_ds; }
};

template <typename Scalar>
struct ResetMatrices {
  Matrix4<Scalar> A_r;
  Matrix43<Scalar> B_ds;
  Matrix43<Scalar> B_fp;
  Matrix43<Scalar> B_r;
  ResetMode transfer_mode{ResetMode::kLinearRamp};
};

template <typename Scalar>
struct S2SMatrices {
  Matrix4<Scalar> A_s2s;
  Matrix43<Scalar> B_s2s;
};

template <typename Scalar>
struct TimingLinearization {
  Matrix4<Scalar> A0;
  Vector4<Scalar> v1;
  Vector4<Scalar> B0;
};

/// Affine period-2 subspace of end-of-stance states for a commanded velocity.
/// Index 0 refers to states sampled while `parity` is the stance leg.
template <typename Scalar>
struct VelocitySubspace {
  Matrix4<Scalar> Pi_0;
  Matrix4<Scalar> Pi_1;
  Vector4<Scalar> d_0;
  Vector4<Scalar> d_1;
  Stance parity{Stance::kLeft};

  const Matrix4<Scalar>& Pi(int n) const { return (n % 2 == 0) ? Pi_0 : Pi_1; }
  const Vector4<Scalar>& d(int n) const { return (n % 2 == 0) ? d_0 : d_1; }
};

template <typename Scalar>
struct AlipDynamics {
  Matrix4<Scalar> A;
  Vector4<Scalar> B;
};

template <typename Scalar>
AlipDynamics<Scalar> AlipMatrices(const AlipParams<Scalar>& params) {
  params.Validate();
  const Scalar mH = params.m * params.H;
  const Scalar mg = params.m * params.g;
  AlipDynamics<Scalar> out;
  out.A.setZero();
  out.A(0, 3) = Scalar(1) / mH;
  out.A(1, 2) = -Scalar(1) / mH;
  out.A(2, 1) = -mg;
  out.A(3, 0) = mg;
  out.B = Vector4<Scalar>::UnitW();
  return out;
}

/// Inverse of the continuous dynamics matrix (exact, block antidiagonal).
template <typename Scalar>
Matrix4<Scalar> AlipMatrixInverse(const AlipParams<Scalar>& params) {
  params.Validate();
  const Scalar mH = params.m * params.H;
  const Scalar mg = params.m * params.g;
  Matrix4<Scalar> inv = Matrix4<Scalar>::Zero();
  inv(3, 0) = mH;
  inv(0, 3) = Scalar(1) / mg;
  inv(2, 1) = -mH;
  inv(1, 2) = -Scalar(1) / mg;
  return inv;
}

/// exp(A t), evaluated per decoupled plane with cosh/sinh.
template <typename Scalar>
Matrix4<Scalar> ExpmAlip(const AlipParams<Scalar>& params, Scalar t) {
  params.Validate();
  const Scalar w = params.omega();
  const Scalar ch = std::cosh(w * t);
  const Scalar sh = std::sinh(w * t);
  const Scalar mHw = params.m * params.H * w;
  Matrix4<Scalar> E = Matrix4<Scalar>::Zero();
  // sagittal: (x_com, L_y)
  E(0, 0) = ch;
  E(0, 3) = sh / mHw;
  E(3, 0) = mHw * sh;
  E(3, 3) = ch;
  // coronal: (y_com, L_x)
  E(1, 1) = ch;
  E(1, 2) = -sh / mHw;
  E(2, 1) = -mHw * sh;
  E(2, 2) = ch;
  return E;
}

/// Input matrix of the zero-order-hold flow, A^-1 (exp(A t) - I) B.
template <typename Scalar>
Vector4<Scalar> FlowInputMatrix(const AlipParams<Scalar>& params, Scalar t) {
  const Matrix4<Scalar> Ad = ExpmAlip(params, t);
  return AlipMatrixInverse(params) * (Ad - Matrix4<Scalar>::Identity()) *
         Vector4<Scalar>::UnitW();
}

/// Exact solution of the ALIP dynamics under constant ankle torque u.
template <typename Scalar>
AlipState<Scalar> Flow(const AlipParams<Scalar>& params,
                       const AlipState<Scalar>& x_c, Scalar u, Scalar t) {
  return ExpmAlip(params, t) * x_c + FlowInputMatrix(params, t) * u;
}

/// Maps a CoP displacement (x, y, z) to the ankle-torque-like input on the
/// angular momentum rows.
template <typename Scalar>
Matrix43<Scalar> CopInputMatrix(const AlipParams<Scalar>& params) {
  const Scalar mg = params.m * params.g;
  Matrix43<Scalar> B = Matrix43<Scalar>::Zero();
  B(2, 1) = mg;
  B(3, 0) = -mg;
  return B;
}

namespace internal {

template <typename Scalar>
Matrix43<Scalar> LinearRampBds(const AlipParams<Scalar>& params,
                               const Matrix4<Scalar>& A_r) {
  if (params.T_ds == Scalar(0)) return Matrix43<Scalar>::Zero();
  const Matrix4<Scalar> Ainv = AlipMatrixInverse(params);
  const Matrix43<Scalar> Bcop = CopInputMatrix(params);
  return (Ainv * Ainv * (A_r - Matrix4<Scalar>::Identity()) * Bcop) /
             params.T_ds -
         Ainv * Bcop;
}

template <typename Scalar>
Matrix43<Scalar> InstantaneousBds(const AlipParams<Scalar>& params,
                                  const Matrix4<Scalar>& A_r) {
  return AlipMatrixInverse(params) * (A_r - Matrix4<Scalar>::Identity()) *
         CopInputMatrix(params);
}

}  // namespace internal

template <typename Scalar>
ResetMatrices<Scalar> ComputeResetMatrices(const AlipParams<Scalar>& params,
                                           ResetMode mode) {
  ResetMatrices<Scalar> rm;
  rm.transfer_mode = mode;
  rm.A_r = ExpmAlip(params, params.T_ds);
  switch (mode) {
    case ResetMode::kLinearRamp:
      rm.B_ds = internal::LinearRampBds(params, rm.A_r);
      break;
    case ResetMode::kInstantaneous:
      rm.B_ds = internal::InstantaneousBds(params, rm.A_r);
      break;
    case ResetMode::kMixedCassie: {
      const Matrix43<Scalar> ramp = internal::LinearRampBds(params, rm.A_r);
      const Matrix43<Scalar> inst = internal::InstantaneousBds(params, rm.A_r);
      rm.B_ds = ramp;
      rm.B_ds.row(1) = inst.row(1);
      rm.B_ds.row(2) = inst.row(2);
      break;
    }
  }
  rm.B_fp = Matrix43<Scalar>::Zero();
  rm.B_fp(0, 0) = Scalar(-1);
  rm.B_fp(1, 1) = Scalar(-1);
  rm.B_r = rm.B_ds + rm.B_fp;
  return rm;
}

/// x+ = A_r x- + B_r (p+ - p-).
template <typename Scalar>
AlipState<Scalar> ApplyReset(const ResetMatrices<Scalar>& rm,
                             const AlipState<Scalar>& x_minus,
                             const Vector3<Scalar>& p_minus,
                             const Vector3<Scalar>& p_plus) {
  return rm.A_r * x_minus + rm.B_r * (p_plus - p_minus);
}

/// State partway through a linear-ramp weight transfer, expressed in the
/// frame of the old stance foot. At t = T_ds this equals A_r x- + B_ds dp.
template <typename Scalar>
AlipState<Scalar> LinearRampTransferState(const AlipParams<Scalar>& params,
                                          const AlipState<Scalar>& x_minus,
                                          const Vector3<Scalar>& dp, Scalar t) {
  const Matrix4<Scalar> E = ExpmAlip(params, t);
  if (params.T_ds == Scalar(0)) return E * x_minus;
  const Matrix4<Scalar> Ainv = AlipMatrixInverse(params);
  const Matrix4<Scalar> I = Matrix4<Scalar>::Identity();
  const Matrix4<Scalar> M =
      (Ainv * Ainv * (E - I) - Ainv * t) / params.T_ds;
  return E * x_minus + M * CopInputMatrix(params) * dp;
}

template <typename Scalar>
S2SMatrices<Scalar> ComputeS2SMatrices(const AlipParams<Scalar>& params,
                                       ResetMode mode) {
  const ResetMatrices<Scalar> rm = ComputeResetMatrices(params, mode);
  S2SMatrices<Scalar> s2s;
  s2s.A_s2s = ExpmAlip(params, params.T_ss + params.T_ds);
  s2s.B_s2s = ExpmAlip(params, params.T_ss) * rm.B_r;
  return s2s;
}

/// First-order expansion of the end-of-stance state about a nominal
/// remaining stance time T_star.
template <typename Scalar>
TimingLinearization<Scalar> ComputeTimingLinearization(
    const AlipParams<Scalar>& params, const AlipState<Scalar>& x_c,
    Scalar T_star) {
  const AlipDynamics<Scalar> dyn = AlipMatrices(params);
  TimingLinearization<Scalar> lin;
  lin.A0 = ExpmAlip(params, T_star);
  lin.v1 = dyn.A * lin.A0 * x_c;
  lin.B0 = AlipMatrixInverse(params) *
           (lin.A0 - Matrix4<Scalar>::Identity()) * dyn.B;
  return lin;
}

template <typename Scalar>
VelocitySubspace<Scalar> ComputeVelocitySubspace(
    const AlipParams<Scalar>& params, ResetMode mode,
    const Vector2<Scalar>& v_des, Stance parity) {
  const S2SMatrices<Scalar> s2s = ComputeS2SMatrices(params, mode);
  const Matrix4<Scalar> I = Matrix4<Scalar>::Identity();
  const Matrix4<Scalar>& A = s2s.A_s2s;
  const Matrix42<Scalar> Bbar = s2s.B_s2s.template leftCols<2>();

  const Matrix4<Scalar> M = I - A * A;
  Eigen::JacobiSVD<Matrix4<Scalar>> svd(M);
  const auto& sv = svd.singularValues();
  if (!(sv(3) > Scalar(0)) || sv(0) / sv(3) > Scalar(1e12)) {
    throw NumericalDegeneracyError(
        "I - A_s2s^2 is singular to working precision");
  }
  Eigen::PartialPivLU<Matrix4<Scalar>> lu(M);
  const Matrix4<Scalar> G = lu.inverse();

  const Matrix42<Scalar> L0 = G * (A - I) * Bbar;
  const Matrix42<Scalar> L1 = A * L0 + Bbar;

  auto projector = [&I](const Matrix42<Scalar>& L) {
    Eigen::HouseholderQR<Matrix42<Scalar>> qr(L);
    const Matrix42<Scalar> Q1 =
        qr.householderQ() * Matrix42<Scalar>::Identity();
    Matrix4<Scalar> P = I - Q1 * Q1.transpose();
    return Matrix4<Scalar>((P + P.transpose()) / Scalar(2));
  };

  VelocitySubspace<Scalar> vs;
  vs.parity = parity;
  vs.Pi_0 = projector(L0);
  vs.Pi_1 = projector(L1);
  vs.d_0 = Scalar(2) * params.stride_duration() * G * Bbar * v_des;
  vs.d_1 = A * vs.d_0;
  return vs;
}

}  // namespace footstep::alip
