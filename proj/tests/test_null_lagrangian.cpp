#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "polyelast/null_lagrangian.hpp"

using namespace polyelast;

namespace {

Eigen::VectorXd random_vec(int n, std::mt19937& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

}  // namespace

TEST_CASE("divergence identities vanish for discrete gradients") {
  const TorusMesh mesh = TorusMesh::build_uniform(2);
  for (int k : {1, 2}) {
    const FeSystem fe(mesh, k);
    std::mt19937 rng(83);
    for (int s = 0; s < 20; ++s) {
      const Eigen::VectorXd u = random_vec(fe.num_velocity_dofs(), rng);
      const Eigen::VectorXd phi = random_vec(fe.num_velocity_dofs(), rng);
      const Eigen::VectorXd z = random_vec(fe.num_nodes(), rng);
      CHECK(null_lagrangian_residual(fe, u, phi) <= 1e-12);
      CHECK(null_lagrangian_residual(fe, u, phi, z) <= 1e-12);
    }
  }
}

TEST_CASE("identity fails for a non-gradient broken field") {
  const TorusMesh mesh = TorusMesh::build_uniform(2);
  const FeSystem fe(mesh, 1);
  std::mt19937 rng(89);
  // random element-wise constants: discontinuous, not curl-free
  BrokenField F = BrokenField::zeros(9, 0, fe.num_elements());
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& c : F.coef)
    for (int i = 0; i < 9; ++i) c(i, 0) = dist(rng);
  const Eigen::VectorXd phi = random_vec(fe.num_velocity_dofs(), rng);
  CHECK(null_lagrangian_residual_field(fe, F, phi) > 1e-8);
}
