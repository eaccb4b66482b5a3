#pragma once

#include <Eigen/Dense>

// Fixed-size algebra for 3x3 matrices and the minor map
// Phi(F) = (F, cof F, det F) together with its derivatives.
//
// State packing contract used everywhere in this project:
//   xi[0..8]   = F, row-major   (F11,F12,F13,F21,...,F33)
//   xi[9..17]  = Z, row-major
//   xi[18]     = w
// Any code that flattens a 3x3 matrix uses the same row-major order.

namespace polyelast {

using Mat3 = Eigen::Matrix3d;
using Xi = Eigen::Matrix<double, 19, 1>;
using PhiJacobian = Eigen::Matrix<double, 19, 9>;

inline constexpr int kXiDim = 19;

/// Flatten a 3x3 matrix row-major into a 9-vector.
inline Eigen::Matrix<double, 9, 1> flatten(const Mat3& m) {
  Eigen::Matrix<double, 9, 1> v;
  for (int i = 0; i < 3; ++i)
    for (int a = 0; a < 3; ++a) v[3 * i + a] = m(i, a);
  return v;
}

inline Mat3 unflatten(const Eigen::Matrix<double, 9, 1>& v) {
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int a = 0; a < 3; ++a) m(i, a) = v[3 * i + a];
  return m;
}

inline Mat3 xi_F(const Xi& xi) { return unflatten(xi.segment<9>(0)); }
inline Mat3 xi_Z(const Xi& xi) { return unflatten(xi.segment<9>(9)); }
inline double xi_w(const Xi& xi) { return xi[18]; }

inline Xi pack_xi(const Mat3& F, const Mat3& Z, double w) {
  Xi xi;
  xi.segment<9>(0) = flatten(F);
  xi.segment<9>(9) = flatten(Z);
  xi[18] = w;
  return xi;
}

/// Cofactor matrix by explicit signed 2x2 minors. Total function,
/// valid at singular F; satisfies M * cof(M)^T = det(M) * I.
Mat3 cofactor(const Mat3& m);

/// Laplace-expansion determinant.
double determinant(const Mat3& m);

/// Phi(F) = (F, cof F, det F) in the fixed packing.
Xi phi(const Mat3& f);

/// Directional derivative DPhi(F)[A].
/// Components: F-block = A, Z-block = eps_ijk eps_abg F_kg A_jb,
/// w = cof(F) : A.
Xi dphi_apply(const Mat3& f, const Mat3& a);

/// 19x9 Jacobian of Phi: row A, column (i,a) row-major.
/// Rows 0..8 are the identity pattern, rows 9..17 the epsilon
/// contraction with F, row 18 equals cof(F) flattened.
PhiJacobian phi_jacobian(const Mat3& f);

}  // namespace polyelast
