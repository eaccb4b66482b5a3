#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "polyelast/fe_space.hpp"

using namespace polyelast;

namespace {

Eigen::VectorXd random_velocity(const FeSystem& fe, std::mt19937& rng,
                                double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Eigen::VectorXd v(fe.num_velocity_dofs());
  for (int i = 0; i < v.size(); ++i) v[i] = dist(rng);
  return v;
}

}  // namespace

TEST_CASE("node counts for k = 1 and k = 2") {
  const TorusMesh mesh = TorusMesh::build_uniform(2);
  CHECK(FeSystem(mesh, 1).num_nodes() == 8);
  CHECK(FeSystem(mesh, 2).num_nodes() == 64);  // (k n)^3 periodic lattice
}

TEST_CASE("velocity projector reproduces U_h functions (idempotence)") {
  const TorusMesh mesh = TorusMesh::build_uniform(2);
  for (int k : {1, 2}) {
    const FeSystem fe(mesh, k);
    std::mt19937 rng(61);
    const Eigen::VectorXd v = random_velocity(fe, rng);
    const Eigen::VectorXd pv = fe.project_velocity(
        [&](const Eigen::Vector3d& x) { return fe.velocity_at_point(v, x); });
    CHECK((pv - v).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("projector is the L2-orthogonal one (Galerkin orthogonality)") {
  const TorusMesh mesh = TorusMesh::build_uniform(2);
  const FeSystem fe(mesh, 1);
  // non-polynomial target
  const VectorField f = [](const Eigen::Vector3d& x) {
    return Eigen::Vector3d(std::sin(2 * M_PI * x[0]),
                           std::cos(2 * M_PI * x[1]) * x[2], 0.25);
  };
  const Eigen::VectorXd pf = fe.project_velocity(f);
  std::mt19937 rng(67);
  const Eigen::VectorXd test = random_velocity(fe, rng);
  // <f - Pf, test> = 0 by quadrature
  double inner = 0.0;
  double scale = 0.0;
  for (int e = 0; e < fe.num_elements(); ++e)
    for (int q = 0; q < fe.num_quad(); ++q) {
      const Eigen::Vector3d x =
          fe.quad_point(e, q);
      const Eigen::Vector3d diff = f(x) - fe.velocity_at(pf, e, q);
      const Eigen::Vector3d t = fe.velocity_at(test, e, q);
      inner += fe.quad_weight(e, q) * diff.dot(t);
      scale += fe.quad_weight(e, q) * t.norm();
    }
  CHECK(std::abs(inner) <= 1e-12 * std::max(1.0, scale));
}

TEST_CASE("inject_gradient represents grad v exactly") {
  const TorusMesh mesh = TorusMesh::build_uniform(2);
  for (int k : {1, 2}) {
    const FeSystem fe(mesh, k);
    std::mt19937 rng(71);
    const Eigen::VectorXd v = random_velocity(fe, rng);
    const BrokenField g = fe.inject_gradient(v);
    CHECK(g.degree == k - 1);
    for (int e = 0; e < fe.num_elements(); ++e)
      for (int q = 0; q < fe.num_quad(); ++q) {
        const Mat3 direct = fe.velocity_grad_at(v, e, q);
        const Mat3 broken = unflatten(fe.broken_at(g, e, q));
        CHECK((direct - broken).cwiseAbs().maxCoeff() <= 1e-12);
      }
  }
}

TEST_CASE("DPhi(F_h) grad v_h lies exactly in the broken spaces") {
  // project the Z- and w-components of DPhi(grad u) grad v into H^Z, H^w
  // and verify zero representation error at the quadrature points.
  const TorusMesh mesh = TorusMesh::build_uniform(2);
  for (int k : {1, 2}) {
    const FeSystem fe(mesh, k);
    std::mt19937 rng(73);
    const Eigen::VectorXd u = random_velocity(fe, rng);
    const Eigen::VectorXd v = random_velocity(fe, rng);
    const BrokenField F = fe.inject_gradient(u);
    const auto dphi_field = [&](int e, int q) -> Xi {
      const Mat3 f = unflatten(fe.broken_at(F, e, q));
      return dphi_apply(f, fe.velocity_grad_at(v, e, q));
    };
    const BrokenField Z = fe.project_broken_local(
        9, fe.deg_Z(),
        [&](int e, int q) { return Eigen::VectorXd(dphi_field(e, q).segment<9>(9)); });
    const BrokenField w = fe.project_broken_local(
        1, fe.deg_w(), [&](int e, int q) {
          return Eigen::VectorXd(
              Eigen::VectorXd::Constant(1, dphi_field(e, q)[18]));
        });
    double scale = 1.0;
    for (int e = 0; e < fe.num_elements(); ++e)
      for (int q = 0; q < fe.num_quad(); ++q)
        scale = std::max(scale, dphi_field(e, q).cwiseAbs().maxCoeff());
    for (int e = 0; e < fe.num_elements(); ++e)
      for (int q = 0; q < fe.num_quad(); ++q) {
        const Xi direct = dphi_field(e, q);
        CHECK((fe.broken_at(Z, e, q) - direct.segment<9>(9))
                  .cwiseAbs()
                  .maxCoeff() <= 1e-12 * scale);
        CHECK(std::abs(fe.broken_at(w, e, q)[0] - direct[18]) <= 1e-12 * scale);
      }
  }
}

TEST_CASE("initial data: identity deformation gives xi = Phi(I)") {
  const TorusMesh mesh = TorusMesh::build_uniform(2);
  const FeSystem fe(mesh, 1);
  const DiscreteState s = fe.init_from_deformation(
      [](const Eigen::Vector3d&) { return Eigen::Vector3d::Zero(); },
      [](const Eigen::Vector3d&) { return Eigen::Vector3d::Zero(); });
  CHECK(s.gradient_flag);
  for (int e = 0; e < fe.num_elements(); ++e)
    for (int q = 0; q < fe.num_quad(); ++q) {
      const Xi xi = fe.xi_at(s, e, q);
      CHECK((xi - phi(Mat3::Identity())).cwiseAbs().maxCoeff() <= 1e-13);
    }
  CHECK(fe.velocity_norm2(s.v) <= 1e-26);
}

TEST_CASE("periodicity of evaluation") {
  const TorusMesh mesh = TorusMesh::build_uniform(2);
  const FeSystem fe(mesh, 2);
  std::mt19937 rng(79);
  const Eigen::VectorXd v = random_velocity(fe, rng);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int s = 0; s < 50; ++s) {
    const Eigen::Vector3d x(dist(rng), dist(rng), dist(rng));
    const Eigen::Vector3d shift(1.0, -1.0, 2.0);
    CHECK((fe.velocity_at_point(v, x) - fe.velocity_at_point(v, x + shift))
              .cwiseAbs()
              .maxCoeff() <= 1e-13);
  }
}

TEST_CASE("mass matrix integrates constants exactly") {
  const TorusMesh mesh = TorusMesh::build_uniform(2);
  const FeSystem fe(mesh, 1);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(fe.num_velocity_dofs());
  CHECK(fe.velocity_norm2(ones) == doctest::Approx(3.0).epsilon(1e-13));
}
