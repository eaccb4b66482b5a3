#include "polyelast/tensor.hpp"

namespace polyelast {

namespace {

// Levi-Civita symbol.
inline double eps(int i, int j, int k) {
  return static_cast<double>((i - j) * (j - k) * (k - i)) / 2.0;
}

}  // namespace

Mat3 cofactor(const Mat3& m) {
  Mat3 c;
  for (int i = 0; i < 3; ++i) {
    const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
    for (int a = 0; a < 3; ++a) {
      const int a1 = (a + 1) % 3, a2 = (a + 2) % 3;
      // Cyclic index choice absorbs the (-1)^{i+a} sign.
      c(i, a) = m(i1, a1) * m(i2, a2) - m(i1, a2) * m(i2, a1);
    }
  }
  return c;
}

double determinant(const Mat3& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

Xi phi(const Mat3& f) { return pack_xi(f, cofactor(f), determinant(f)); }

Xi dphi_apply(const Mat3& f, const Mat3& a) {
  Xi d;
  d.segment<9>(0) = flatten(a);
  Mat3 dz = Mat3::Zero();
  for (int i = 0; i < 3; ++i)
    for (int al = 0; al < 3; ++al)
      for (int j = 0; j < 3; ++j)
        for (int be = 0; be < 3; ++be) {
          const int k = 3 - i - j, g = 3 - al - be;
          if (i == j || al == be) continue;
          dz(i, al) += eps(i, j, k) * eps(al, be, g) * f(k, g) * a(j, be);
        }
  d.segment<9>(9) = flatten(dz);
  d[18] = cofactor(f).cwiseProduct(a).sum();
  return d;
}

PhiJacobian phi_jacobian(const Mat3& f) {
  PhiJacobian jac = PhiJacobian::Zero();
  for (int r = 0; r < 9; ++r) jac(r, r) = 1.0;
  for (int i = 0; i < 3; ++i)
    for (int al = 0; al < 3; ++al)
      for (int j = 0; j < 3; ++j)
        for (int be = 0; be < 3; ++be) {
          if (i == j || al == be) continue;
          const int k = 3 - i - j, g = 3 - al - be;
          jac(9 + 3 * i + al, 3 * j + be) =
              eps(i, j, k) * eps(al, be, g) * f(k, g);
        }
  jac.row(18) = flatten(cofactor(f)).transpose();
  return jac;
}

}  // namespace polyelast
