#include "polyelast/null_lagrangian.hpp"

#include <cmath>

namespace polyelast {

namespace {

// Scalar U_h function value / gradient at a quadrature point.
double scalar_at(const FeSystem& fe, const Eigen::VectorXd& z, int e, int q) {
  double out = 0.0;
  const Eigen::VectorXd& bv = fe.basis_values(q);
  for (int a = 0; a < fe.local_nodes(); ++a)
    out += bv[a] * z[fe.global_node(e, a)];
  return out;
}

Eigen::Vector3d scalar_grad_at(const FeSystem& fe, const Eigen::VectorXd& z,
                               int e, int q) {
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  const Eigen::MatrixXd& bg = fe.basis_gradients(e, q);
  for (int a = 0; a < fe.local_nodes(); ++a)
    out += bg.row(a).transpose() * z[fe.global_node(e, a)];
  return out;
}

}  // namespace

double null_lagrangian_residual_field(const FeSystem& fe, const BrokenField& F,
                                      const Eigen::VectorXd& phi) {
  Xi acc = Xi::Zero();
  for (int e = 0; e < fe.num_elements(); ++e)
    for (int q = 0; q < fe.num_quad(); ++q) {
      const Mat3 f = unflatten(fe.broken_at(F, e, q));
      const Mat3 gphi = fe.velocity_grad_at(phi, e, q);
      acc += fe.quad_weight(e, q) * (phi_jacobian(f) * flatten(gphi));
    }
  return acc.cwiseAbs().maxCoeff();
}

double null_lagrangian_residual(const FeSystem& fe, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& phi) {
  return null_lagrangian_residual_field(fe, fe.inject_gradient(u), phi);
}

double null_lagrangian_residual(const FeSystem& fe, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& phi,
                                const Eigen::VectorXd& z) {
  // For each test component c:  int Phi^A_{,ia}(grad u) d_a(z phi_c) dx = 0.
  Eigen::Matrix<double, 19, 3> acc[3];
  for (auto& a : acc) a.setZero();
  for (int e = 0; e < fe.num_elements(); ++e)
    for (int q = 0; q < fe.num_quad(); ++q) {
      const double w = fe.quad_weight(e, q);
      const Mat3 gu = fe.velocity_grad_at(u, e, q);
      const PhiJacobian jac = phi_jacobian(gu);
      const Eigen::Vector3d ph = fe.velocity_at(phi, e, q);
      const Mat3 gph = fe.velocity_grad_at(phi, e, q);
      const double zv = scalar_at(fe, z, e, q);
      const Eigen::Vector3d gz = scalar_grad_at(fe, z, e, q);
      for (int c = 0; c < 3; ++c)
        for (int A = 0; A < kXiDim; ++A)
          for (int i = 0; i < 3; ++i)
            for (int al = 0; al < 3; ++al)
              acc[c](A, i) += w * jac(A, 3 * i + al) *
                              (zv * gph(c, al) + ph[c] * gz[al]);
    }
  double r = 0.0;
  for (const auto& a : acc) r = std::max(r, a.cwiseAbs().maxCoeff());
  return r;
}

}  // namespace polyelast
