#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <memory>
#include <vector>

#include "polyelast/mesh.hpp"
#include "polyelast/quadrature.hpp"
#include "polyelast/tensor.hpp"

// The four finite element spaces of the scheme and their L2 projectors:
//   U_h  : continuous vector Lagrange P_k, periodic
//   H^F  : broken [P_{k-1}]^9
//   H^Z  : broken [P_{2(k-1)}]^9
//   H^w  : broken P_{3(k-1)}
// The broken spaces are represented per element in the monomial basis of
// reference coordinates; the degrees are chosen so that DPhi(F_h) grad v_h
// lies in H^F x H^Z x H^w with zero representation error.

namespace polyelast {

using VectorField = std::function<Eigen::Vector3d(const Eigen::Vector3d&)>;
using ScalarField = std::function<double(const Eigen::Vector3d&)>;
using XiField = std::function<Xi(const Eigen::Vector3d&)>;

/// Monomials of total degree <= degree on reference coordinates.
struct MonomialBasis {
  int degree = 0;
  std::vector<Eigen::Vector3i> exps;

  explicit MonomialBasis(int degree);
  int size() const { return static_cast<int>(exps.size()); }
  Eigen::VectorXd eval(const Eigen::Vector3d& x) const;
  Eigen::MatrixXd eval_grad(const Eigen::Vector3d& x) const;  // size x 3
};

/// Per-element coefficients of a broken (discontinuous) field:
/// coef[e] is ncomp x nbasis.
struct BrokenField {
  int ncomp = 0;
  int degree = 0;
  std::vector<Eigen::MatrixXd> coef;

  static BrokenField zeros(int ncomp, int degree, int num_elements);
};

/// Discrete state (v_h, xi_h) at one time level.
struct DiscreteState {
  Eigen::VectorXd v;  // U_h coefficients, dof = 3*node + comp
  BrokenField F;      // 9 components, degree k-1
  BrokenField Z;      // 9 components, degree 2(k-1)
  BrokenField w;      // 1 component, degree 3(k-1)
  bool gradient_flag = false;  // F constructed as a discrete gradient
  int time_index = 0;
};

/// Assembled geometry, bases, quadrature caches, and projectors for one
/// (mesh, k) pair. Immutable after construction.
class FeSystem {
 public:
  FeSystem(const TorusMesh& mesh, int k, int quad_order = 0);

  const TorusMesh& mesh() const { return *mesh_; }
  int degree() const { return k_; }
  int num_nodes() const { return num_nodes_; }
  int num_velocity_dofs() const { return 3 * num_nodes_; }
  int num_elements() const { return static_cast<int>(mesh_->elements.size()); }
  int num_quad() const { return static_cast<int>(quad_.points.size()); }
  const QuadratureRule& quad() const { return quad_; }

  int deg_F() const { return k_ - 1; }
  int deg_Z() const { return 2 * (k_ - 1); }
  int deg_w() const { return 3 * (k_ - 1); }

  // -- geometry / basis caches -------------------------------------------
  int local_nodes() const { return nloc_; }
  int global_node(int element, int local) const {
    return elem_nodes_[element][local];
  }
  /// Physical coordinate of quadrature point q in element e.
  Eigen::Vector3d quad_point(int e, int q) const;
  /// Quadrature weight including the element Jacobian.
  double quad_weight(int e, int q) const {
    return quad_.weights[q] * mesh_->elements[e].det_jac;
  }
  /// Lagrange basis values at quadrature point q (shared by all elements).
  const Eigen::VectorXd& basis_values(int q) const { return basis_val_[q]; }
  /// Physical-space basis gradients at (e, q): nloc x 3.
  const Eigen::MatrixXd& basis_gradients(int e, int q) const {
    return basis_grad_[e][q];
  }
  /// Monomial values for a broken degree at quadrature point q.
  const Eigen::VectorXd& monomial_values(int deg, int q) const;

  // -- evaluation --------------------------------------------------------
  Eigen::Vector3d velocity_at(const Eigen::VectorXd& v, int e, int q) const;
  Mat3 velocity_grad_at(const Eigen::VectorXd& v, int e, int q) const;
  Eigen::VectorXd broken_at(const BrokenField& f, int e, int q) const;
  Xi xi_at(const DiscreteState& s, int e, int q) const;
  /// Evaluate at an arbitrary point (point location + wrap mod 1).
  Eigen::Vector3d velocity_at_point(const Eigen::VectorXd& v,
                                    const Eigen::Vector3d& x) const;
  Xi xi_at_point(const DiscreteState& s, const Eigen::Vector3d& x) const;

  // -- projections -------------------------------------------------------
  /// L2 projection into U_h (mass-matrix solve, direct factorization).
  Eigen::VectorXd project_velocity(const VectorField& f) const;
  /// Elementwise L2 projection into a broken space of the given degree.
  BrokenField project_broken(int ncomp, int degree,
                             const std::function<Eigen::VectorXd(
                                 const Eigen::Vector3d&)>& f) const;
  /// Same, but with the integrand given per (element, quad point) so
  /// discontinuous integrands stay element-local.
  BrokenField project_broken_local(
      int ncomp, int degree,
      const std::function<Eigen::VectorXd(int, int)>& f) const;
  /// Projection of a Xi-valued field into H^F x H^Z x H^w.
  void project_state(const XiField& f, BrokenField& F, BrokenField& Z,
                     BrokenField& w) const;

  /// Exact elementwise representation of grad v_h in the H^F basis.
  BrokenField inject_gradient(const Eigen::VectorXd& v) const;

  /// Initial data: v = P^U v0, F0 = I + grad(P^U u) for the periodic
  /// displacement u (so F0 is a discrete gradient of x + u_h),
  /// Z0 = P^Z cof F0, w0 = P^w det F0.
  DiscreteState init_from_deformation(const VectorField& displacement,
                                      const VectorField& v0) const;

  /// Scalar U_h mass matrix (shared by the three velocity components).
  const Eigen::SparseMatrix<double>& scalar_mass() const { return mass_; }
  /// Solve the scalar mass system for several right-hand sides.
  Eigen::MatrixXd solve_mass(const Eigen::MatrixXd& rhs) const;

  /// L2 norm^2 of a U_h vector function.
  double velocity_norm2(const Eigen::VectorXd& v) const;
  /// L2 norm^2 of the broken state components of a DiscreteState delta.
  double state_norm2(const BrokenField& F, const BrokenField& Z,
                     const BrokenField& w) const;

 private:
  const TorusMesh* mesh_;
  int k_;
  int nloc_;
  int num_nodes_ = 0;
  QuadratureRule quad_;

  // Lagrange basis: coeff_ maps monomials -> nodal basis.
  MonomialBasis lagr_mono_;
  Eigen::MatrixXd lagr_coeff_;  // nloc x nloc
  std::vector<Eigen::Vector3d> ref_nodes_;

  std::vector<std::vector<int>> elem_nodes_;
  std::vector<Eigen::VectorXd> basis_val_;                 // [q]
  std::vector<std::vector<Eigen::MatrixXd>> basis_grad_;   // [e][q]

  // Broken-space machinery per distinct degree.
  struct BrokenCache {
    MonomialBasis mono{0};
    std::vector<Eigen::VectorXd> vals;  // [q]
    Eigen::MatrixXd mass_inv;           // reference mass inverse
  };
  std::vector<BrokenCache> broken_;  // indexed by degree
  const BrokenCache& broken_cache(int deg) const;

  Eigen::SparseMatrix<double> mass_;
  std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>
      mass_solver_;
};

}  // namespace polyelast
