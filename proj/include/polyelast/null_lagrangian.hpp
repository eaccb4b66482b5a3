#pragma once

#include "polyelast/fe_space.hpp"

// Discrete null-Lagrangian identity checks: for a field F that is the
// gradient of a continuous piecewise-polynomial map, the minors of Phi
// satisfy  int Phi^A_{,ia}(F) d_a phi_i dx = 0  for all continuous test
// fields, and the weighted variant with a scalar z.

namespace polyelast {

/// max_A | int Phi^A_{,ia}(F) d_a phi_i dx | for a broken F field.
double null_lagrangian_residual_field(const FeSystem& fe, const BrokenField& F,
                                      const Eigen::VectorXd& phi);

/// Residual of the divergence identity for F = grad u, u and phi in U_h.
double null_lagrangian_residual(const FeSystem& fe, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& phi);

/// Residual of the z-weighted identity: z is a continuous scalar in the
/// U_h-node basis, tested against every component of phi.
/// max over (A, i, c) of
///   | int Phi^A_{,ia}(grad u) (z d_a phi_c + phi_c d_a z) dx |.
double null_lagrangian_residual(const FeSystem& fe, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& phi,
                                const Eigen::VectorXd& z);

}  // namespace polyelast
