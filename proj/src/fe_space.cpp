#include "polyelast/fe_space.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace polyelast {

MonomialBasis::MonomialBasis(int degree) : degree(degree) {
  for (int d = 0; d <= degree; ++d)
    for (int a = d; a >= 0; --a)
      for (int b = d - a; b >= 0; --b) exps.emplace_back(a, b, d - a - b);
}

Eigen::VectorXd MonomialBasis::eval(const Eigen::Vector3d& x) const {
  Eigen::VectorXd out(size());
  for (int i = 0; i < size(); ++i) {
    const auto& e = exps[i];
    out[i] = std::pow(x[0], e[0]) * std::pow(x[1], e[1]) * std::pow(x[2], e[2]);
  }
  return out;
}

Eigen::MatrixXd MonomialBasis::eval_grad(const Eigen::Vector3d& x) const {
  Eigen::MatrixXd out(size(), 3);
  for (int i = 0; i < size(); ++i) {
    const auto& e = exps[i];
    for (int c = 0; c < 3; ++c) {
      if (e[c] == 0) {
        out(i, c) = 0.0;
        continue;
      }
      double g = e[c] * std::pow(x[c], e[c] - 1);
      for (int d = 0; d < 3; ++d)
        if (d != c) g *= std::pow(x[d], e[d]);
      out(i, c) = g;
    }
  }
  return out;
}

BrokenField BrokenField::zeros(int ncomp, int degree, int num_elements) {
  BrokenField f;
  f.ncomp = ncomp;
  f.degree = degree;
  const int nb = MonomialBasis(degree).size();
  f.coef.assign(num_elements, Eigen::MatrixXd::Zero(ncomp, nb));
  return f;
}

FeSystem::FeSystem(const TorusMesh& mesh, int k, int quad_order)
    : mesh_(&mesh), k_(k), nloc_(0), lagr_mono_(k) {
  if (k < 1 || k > 2)
    throw std::invalid_argument("fem.degree must be 1 or 2");
  const int default_order = std::max(3 * k + 1, 6 * (k - 1));
  const int order = quad_order > 0 ? quad_order : default_order;
  quad_ = duffy_rule(order);

  // Equispaced Lagrange nodes on the reference tet.
  for (int a = 0; a <= k; ++a)
    for (int b = 0; b <= k - a; ++b)
      for (int c = 0; c <= k - a - b; ++c)
        ref_nodes_.emplace_back(static_cast<double>(a) / k,
                                static_cast<double>(b) / k,
                                static_cast<double>(c) / k);
  nloc_ = static_cast<int>(ref_nodes_.size());

  Eigen::MatrixXd vand(nloc_, nloc_);
  for (int a = 0; a < nloc_; ++a)
    vand.row(a) = lagr_mono_.eval(ref_nodes_[a]).transpose();
  lagr_coeff_ = vand.inverse();

  // Global periodic node numbering: quantize node positions on the
  // 1/(k n) lattice and number them lexicographically.
  const int nel = num_elements();
  const int lat = k * mesh.n;
  auto key_of = [&](const Eigen::Vector3d& x) {
    std::array<int, 3> key;
    for (int c = 0; c < 3; ++c) {
      double y = x[c] - std::floor(x[c]);
      int i = static_cast<int>(std::llround(y * lat)) % lat;
      key[c] = (i + lat) % lat;
    }
    return key;
  };
  std::map<std::array<int, 3>, int> ids;
  elem_nodes_.assign(nel, std::vector<int>(nloc_));
  for (int e = 0; e < nel; ++e)
    for (int a = 0; a < nloc_; ++a) {
      const Eigen::Vector3d x =
          mesh.elements[e].origin + mesh.elements[e].jac * ref_nodes_[a];
      ids.emplace(key_of(x), 0);
    }
  int next = 0;
  for (auto& kv : ids) kv.second = next++;
  num_nodes_ = next;
  for (int e = 0; e < nel; ++e)
    for (int a = 0; a < nloc_; ++a) {
      const Eigen::Vector3d x =
          mesh.elements[e].origin + mesh.elements[e].jac * ref_nodes_[a];
      elem_nodes_[e][a] = ids.at(key_of(x));
    }

  // Basis values (shared) and physical gradients (per element) at the
  // quadrature points.
  const int nq = num_quad();
  basis_val_.resize(nq);
  std::vector<Eigen::MatrixXd> ref_grad(nq);
  for (int q = 0; q < nq; ++q) {
    basis_val_[q] = lagr_coeff_.transpose() * lagr_mono_.eval(quad_.points[q]);
    ref_grad[q] = lagr_coeff_.transpose() * lagr_mono_.eval_grad(quad_.points[q]);
  }
  basis_grad_.assign(nel, std::vector<Eigen::MatrixXd>(nq));
  for (int e = 0; e < nel; ++e)
    for (int q = 0; q < nq; ++q)
      basis_grad_[e][q] = ref_grad[q] * mesh.elements[e].jac_inv_t.transpose();

  // Broken-space caches for every degree up to 3(k-1).
  broken_.resize(3 * (k - 1) + 1);
  for (int d = 0; d <= 3 * (k - 1); ++d) {
    BrokenCache& bc = broken_[d];
    bc.mono = MonomialBasis(d);
    bc.vals.resize(nq);
    const int nb = bc.mono.size();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nb, nb);
    for (int q = 0; q < nq; ++q) {
      bc.vals[q] = bc.mono.eval(quad_.points[q]);
      m += quad_.weights[q] * bc.vals[q] * bc.vals[q].transpose();
    }
    bc.mass_inv = m.inverse();
  }

  // Scalar U_h mass matrix.
  std::vector<Eigen::Triplet<double>> trips;
  for (int e = 0; e < nel; ++e) {
    Eigen::MatrixXd me = Eigen::MatrixXd::Zero(nloc_, nloc_);
    for (int q = 0; q < nq; ++q)
      me += quad_weight(e, q) * basis_val_[q] * basis_val_[q].transpose();
    for (int a = 0; a < nloc_; ++a)
      for (int b = 0; b < nloc_; ++b)
        trips.emplace_back(elem_nodes_[e][a], elem_nodes_[e][b], me(a, b));
  }
  mass_.resize(num_nodes_, num_nodes_);
  mass_.setFromTriplets(trips.begin(), trips.end());
  mass_solver_ =
      std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
  mass_solver_->compute(mass_);
  if (mass_solver_->info() != Eigen::Success)
    throw std::runtime_error("U_h mass matrix factorization failed");
}

const FeSystem::BrokenCache& FeSystem::broken_cache(int deg) const {
  return broken_.at(deg);
}

const Eigen::VectorXd& FeSystem::monomial_values(int deg, int q) const {
  return broken_.at(deg).vals[q];
}

Eigen::Vector3d FeSystem::quad_point(int e, int q) const {
  return mesh_->elements[e].origin + mesh_->elements[e].jac * quad_.points[q];
}

Eigen::Vector3d FeSystem::velocity_at(const Eigen::VectorXd& v, int e,
                                      int q) const {
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  const Eigen::VectorXd& bv = basis_val_[q];
  for (int a = 0; a < nloc_; ++a) {
    const int g = elem_nodes_[e][a];
    for (int c = 0; c < 3; ++c) out[c] += bv[a] * v[3 * g + c];
  }
  return out;
}

Mat3 FeSystem::velocity_grad_at(const Eigen::VectorXd& v, int e, int q) const {
  Mat3 out = Mat3::Zero();
  const Eigen::MatrixXd& bg = basis_grad_[e][q];
  for (int a = 0; a < nloc_; ++a) {
    const int g = elem_nodes_[e][a];
    for (int i = 0; i < 3; ++i)
      for (int al = 0; al < 3; ++al) out(i, al) += bg(a, al) * v[3 * g + i];
  }
  return out;
}

Eigen::VectorXd FeSystem::broken_at(const BrokenField& f, int e, int q) const {
  return f.coef[e] * broken_cache(f.degree).vals[q];
}

Xi FeSystem::xi_at(const DiscreteState& s, int e, int q) const {
  Xi xi;
  xi.segment<9>(0) = broken_at(s.F, e, q);
  xi.segment<9>(9) = broken_at(s.Z, e, q);
  xi[18] = broken_at(s.w, e, q)[0];
  return xi;
}

Eigen::Vector3d FeSystem::velocity_at_point(const Eigen::VectorXd& v,
                                            const Eigen::Vector3d& x) const {
  Eigen::Vector3d ref;
  const int e = mesh_->locate(x, ref);
  const Eigen::VectorXd bv = lagr_coeff_.transpose() * lagr_mono_.eval(ref);
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  for (int a = 0; a < nloc_; ++a) {
    const int g = elem_nodes_[e][a];
    for (int c = 0; c < 3; ++c) out[c] += bv[a] * v[3 * g + c];
  }
  return out;
}

Xi FeSystem::xi_at_point(const DiscreteState& s,
                         const Eigen::Vector3d& x) const {
  Eigen::Vector3d ref;
  const int e = mesh_->locate(x, ref);
  Xi xi;
  xi.segment<9>(0) = s.F.coef[e] * broken_cache(s.F.degree).mono.eval(ref);
  xi.segment<9>(9) = s.Z.coef[e] * broken_cache(s.Z.degree).mono.eval(ref);
  xi[18] = (s.w.coef[e] * broken_cache(s.w.degree).mono.eval(ref))(0);
  return xi;
}

Eigen::VectorXd FeSystem::project_velocity(const VectorField& f) const {
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(num_nodes_, 3);
  const int nel = num_elements();
  const int nq = num_quad();
  for (int e = 0; e < nel; ++e)
    for (int q = 0; q < nq; ++q) {
      const Eigen::Vector3d val = f(quad_point(e, q));
      const double w = quad_weight(e, q);
      for (int a = 0; a < nloc_; ++a)
        rhs.row(elem_nodes_[e][a]) += w * basis_val_[q][a] * val.transpose();
    }
  const Eigen::MatrixXd sol = solve_mass(rhs);
  Eigen::VectorXd out(num_velocity_dofs());
  for (int g = 0; g < num_nodes_; ++g)
    for (int c = 0; c < 3; ++c) out[3 * g + c] = sol(g, c);
  return out;
}

Eigen::MatrixXd FeSystem::solve_mass(const Eigen::MatrixXd& rhs) const {
  Eigen::MatrixXd sol = mass_solver_->solve(rhs);
  if (mass_solver_->info() != Eigen::Success)
    throw std::runtime_error("U_h mass solve failed");
  return sol;
}

BrokenField FeSystem::project_broken_local(
    int ncomp, int degree,
    const std::function<Eigen::VectorXd(int, int)>& f) const {
  const BrokenCache& bc = broken_cache(degree);
  BrokenField out = BrokenField::zeros(ncomp, degree, num_elements());
  const int nq = num_quad();
  for (int e = 0; e < num_elements(); ++e) {
    Eigen::MatrixXd load = Eigen::MatrixXd::Zero(ncomp, bc.mono.size());
    for (int q = 0; q < nq; ++q)
      load += quad_.weights[q] * f(e, q) * bc.vals[q].transpose();
    out.coef[e] = load * bc.mass_inv;  // mass_inv is symmetric
  }
  return out;
}

BrokenField FeSystem::project_broken(
    int ncomp, int degree,
    const std::function<Eigen::VectorXd(const Eigen::Vector3d&)>& f) const {
  return project_broken_local(ncomp, degree,
                              [&](int e, int q) { return f(quad_point(e, q)); });
}

void FeSystem::project_state(const XiField& f, BrokenField& F, BrokenField& Z,
                             BrokenField& w) const {
  F = project_broken(9, deg_F(), [&](const Eigen::Vector3d& x) {
    return Eigen::VectorXd(f(x).segment<9>(0));
  });
  Z = project_broken(9, deg_Z(), [&](const Eigen::Vector3d& x) {
    return Eigen::VectorXd(f(x).segment<9>(9));
  });
  w = project_broken(1, deg_w(), [&](const Eigen::Vector3d& x) {
    return Eigen::VectorXd(f(x).tail<1>());
  });
}

BrokenField FeSystem::inject_gradient(const Eigen::VectorXd& v) const {
  const BrokenCache& bc = broken_cache(deg_F());
  BrokenField out = BrokenField::zeros(9, deg_F(), num_elements());
  const int nq = num_quad();
  for (int e = 0; e < num_elements(); ++e) {
    Eigen::MatrixXd load = Eigen::MatrixXd::Zero(9, bc.mono.size());
    for (int q = 0; q < nq; ++q)
      load += quad_.weights[q] * flatten(velocity_grad_at(v, e, q)) *
              bc.vals[q].transpose();
    out.coef[e] = load * bc.mass_inv;
  }
  return out;
}

DiscreteState FeSystem::init_from_deformation(const VectorField& displacement,
                                              const VectorField& v0) const {
  DiscreteState s;
  s.v = project_velocity(v0);
  const Eigen::VectorXd u_h = project_velocity(displacement);
  s.F = inject_gradient(u_h);
  // F0 = I + grad(P^U u): the gradient of the projected map x + u_h.
  const Eigen::Matrix<double, 9, 1> id = flatten(Mat3::Identity());
  for (auto& c : s.F.coef) c.col(0) += id;  // monomial 0 is the constant
  s.Z = project_broken_local(9, deg_Z(), [&](int e, int q) {
    return Eigen::VectorXd(
        flatten(cofactor(unflatten(broken_at(s.F, e, q)))));
  });
  s.w = project_broken_local(1, deg_w(), [&](int e, int q) {
    Eigen::VectorXd out(1);
    out[0] = determinant(unflatten(broken_at(s.F, e, q)));
    return out;
  });
  s.gradient_flag = true;
  s.time_index = 0;
  return s;
}

double FeSystem::velocity_norm2(const Eigen::VectorXd& v) const {
  double out = 0.0;
  Eigen::VectorXd comp(num_nodes_);
  for (int c = 0; c < 3; ++c) {
    for (int g = 0; g < num_nodes_; ++g) comp[g] = v[3 * g + c];
    out += comp.dot(mass_ * comp);
  }
  return out;
}

double FeSystem::state_norm2(const BrokenField& F, const BrokenField& Z,
                             const BrokenField& w) const {
  double out = 0.0;
  for (int e = 0; e < num_elements(); ++e)
    for (int q = 0; q < num_quad(); ++q) {
      const double wq = quad_weight(e, q);
      out += wq * (broken_at(F, e, q).squaredNorm() +
                   broken_at(Z, e, q).squaredNorm() +
                   broken_at(w, e, q).squaredNorm());
    }
  return out;
}

}  // namespace polyelast
