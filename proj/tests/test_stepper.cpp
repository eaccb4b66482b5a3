#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "polyelast/runner.hpp"
#include "polyelast/stepper.hpp"

using namespace polyelast;

namespace {

struct Setup {
  TorusMesh mesh = TorusMesh::build_uniform(2);
  FeSystem fe{mesh, 1};
  EnergyModel model = EnergyModel::make(1.0, 1.0, 7.0);

  DiscreteState preset(const std::string& name) const {
    RunConfig cfg;
    cfg.preset = name;
    return make_initial_state(fe, cfg);
  }
};

double gradient_conservation_defect(const FeSystem& fe,
                                    const DiscreteState& prev,
                                    const DiscreteState& next, double tau) {
  double worst = 0.0;
  for (int e = 0; e < fe.num_elements(); ++e)
    for (int q = 0; q < fe.num_quad(); ++q) {
      const Mat3 dF = unflatten(fe.broken_at(next.F, e, q)) -
                      unflatten(fe.broken_at(prev.F, e, q));
      const Mat3 gv = fe.velocity_grad_at(next.v, e, q);
      worst = std::max(worst, (dF - tau * gv).cwiseAbs().maxCoeff());
    }
  return worst;
}

}  // namespace

TEST_CASE("equilibrium is a fixed point") {
  const Setup s;
  const DiscreteState prev = s.preset("equilibrium");
  StepConfig cfg;
  cfg.tau = 1e-3;
  const auto [next, cert] = solve_step(s.fe, s.model, prev, cfg);
  CHECK(cert.converged);
  CHECK(s.fe.velocity_norm2(next.v) <= 1e-24);
  CHECK(cert.dissipation_velocity <= 1e-24);
  for (int e = 0; e < s.fe.num_elements(); ++e)
    for (int q = 0; q < s.fe.num_quad(); ++q)
      CHECK((s.fe.xi_at(next, e, q) - s.fe.xi_at(prev, e, q))
                .cwiseAbs()
                .maxCoeff() <= 1e-12);
}

TEST_CASE("uniform translation is a fixed point") {
  const Setup s;
  const DiscreteState prev = s.preset("translation");
  StepConfig cfg;
  cfg.tau = 1e-3;
  const auto [next, cert] = solve_step(s.fe, s.model, prev, cfg);
  CHECK(cert.converged);
  CHECK((next.v - prev.v).cwiseAbs().maxCoeff() <= 1e-12);
  for (int e = 0; e < s.fe.num_elements(); ++e)
    for (int q = 0; q < s.fe.num_quad(); ++q)
      CHECK((s.fe.xi_at(next, e, q) - s.fe.xi_at(prev, e, q))
                .cwiseAbs()
                .maxCoeff() <= 1e-12);
}

TEST_CASE("step functional: minimizer optimality against random probes") {
  const Setup s;
  const DiscreteState prev = s.preset("perturbed");
  StepConfig cfg;
  cfg.tau = 1e-3;
  const auto [next, cert] = solve_step(s.fe, s.model, prev, cfg);
  REQUIRE(cert.converged);
  const double j_min = step_functional(s.fe, s.model, next.v, prev, cfg.tau);
  std::mt19937 rng(97);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int probe = 0; probe < 20; ++probe) {
    Eigen::VectorXd v = next.v;
    for (int i = 0; i < v.size(); ++i) v[i] += 0.1 * dist(rng);
    CHECK(step_functional(s.fe, s.model, v, prev, cfg.tau) >= j_min);
  }
  // constant-velocity collapse: J[v_prev] = int G(xi_prev) when grad v = 0
  const DiscreteState trans = s.preset("translation");
  double internal = 0.0;
  for (int e = 0; e < s.fe.num_elements(); ++e)
    for (int q = 0; q < s.fe.num_quad(); ++q)
      internal +=
          s.fe.quad_weight(e, q) * s.model.eval(s.fe.xi_at(trans, e, q));
  CHECK(step_functional(s.fe, s.model, trans.v, trans, cfg.tau) ==
        doctest::Approx(internal).epsilon(1e-13));
}

TEST_CASE("per-step certificates over a perturbed run") {
  const Setup s;
  const DiscreteState initial = s.preset("perturbed");
  StepConfig cfg;
  cfg.tau = 1e-3;
  const double e0 = step_functional(s.fe, s.model, initial.v, initial, 0.0) +
                    0.5 * s.fe.velocity_norm2(initial.v);
  const Trajectory traj = run(s.fe, s.model, initial, cfg, 0.02);
  REQUIRE(traj.completed);
  REQUIRE(traj.certificates.size() == 20);
  for (std::size_t n = 0; n < traj.certificates.size(); ++n) {
    const StepCertificate& cert = traj.certificates[n];
    CHECK(cert.converged);
    // energy inequality with certified slack
    CHECK(cert.slack() <= 1e-10 * cert.energy_before);
    // gradient conservation, exact up to roundoff
    CHECK(gradient_conservation_defect(s.fe, traj.states[n],
                                       traj.states[n + 1], cfg.tau) <= 1e-12);
    CHECK(traj.states[n + 1].gradient_flag);
    // Newton monotonicity up to the roundoff allowance of the line search
    for (std::size_t i = 1; i < cert.functional_history.size(); ++i)
      CHECK(cert.functional_history[i] <=
            cert.functional_history[i - 1] +
                1e-13 * std::max(1.0, cert.functional_history[i - 1]));
  }
  // total energy non-increasing; increments bounded by the initial data
  for (std::size_t n = 1; n < traj.certificates.size(); ++n)
    CHECK(traj.certificates[n].energy_before <=
          traj.certificates[n - 1].energy_before + 1e-10 * e0);
  CHECK(traj.increment_sum <= 2.0 * e0);
}

TEST_CASE("Euler-Lagrange residual: converged, equilibrium, corrupted") {
  const Setup s;
  const DiscreteState prev = s.preset("perturbed");
  StepConfig cfg;
  cfg.tau = 1e-3;
  const auto [next, cert] = solve_step(s.fe, s.model, prev, cfg);
  REQUIRE(cert.converged);
  CHECK(euler_lagrange_residual(s.fe, s.model, prev, next, cfg.tau) <=
        cfg.newton_tol);

  const DiscreteState eq = s.preset("equilibrium");
  CHECK(euler_lagrange_residual(s.fe, s.model, eq, eq, cfg.tau) <= 1e-13);

  DiscreteState corrupted = next;
  corrupted.v[4] += 1e-3;
  CHECK(euler_lagrange_residual(s.fe, s.model, prev, corrupted, cfg.tau) >=
        1e-5);
}

TEST_CASE("projection equivalences on trajectory states") {
  const Setup s;
  const DiscreteState initial = s.preset("perturbed");
  StepConfig cfg;
  cfg.tau = 1e-3;
  const Trajectory traj = run(s.fe, s.model, initial, cfg, 5e-3);
  REQUIRE(traj.completed);
  for (std::size_t n = 1; n < traj.states.size(); ++n) {
    const DiscreteState& prev = traj.states[n - 1];
    const DiscreteState& next = traj.states[n];
    // P^H DG(xi^n): element-local L2 projections into H^F x H^Z x H^w
    const auto dg = [&](int e, int q) { return s.model.grad(s.fe.xi_at(next, e, q)); };
    const BrokenField pF = s.fe.project_broken_local(
        9, s.fe.deg_F(),
        [&](int e, int q) { return Eigen::VectorXd(dg(e, q).segment<9>(0)); });
    const BrokenField pZ = s.fe.project_broken_local(
        9, s.fe.deg_Z(),
        [&](int e, int q) { return Eigen::VectorXd(dg(e, q).segment<9>(9)); });
    const BrokenField pw = s.fe.project_broken_local(
        1, s.fe.deg_w(), [&](int e, int q) {
          return Eigen::VectorXd(Eigen::VectorXd::Constant(1, dg(e, q)[18]));
        });
    double with_proj = 0.0, without = 0.0;          // <dxi, .> pair
    double with_proj2 = 0.0, without2 = 0.0;        // <DPhi grad v, .> pair
    for (int e = 0; e < s.fe.num_elements(); ++e)
      for (int q = 0; q < s.fe.num_quad(); ++q) {
        const double w = s.fe.quad_weight(e, q);
        const Xi dxi = s.fe.xi_at(next, e, q) - s.fe.xi_at(prev, e, q);
        Xi proj;
        proj.segment<9>(0) = s.fe.broken_at(pF, e, q);
        proj.segment<9>(9) = s.fe.broken_at(pZ, e, q);
        proj[18] = s.fe.broken_at(pw, e, q)[0];
        const Xi raw = dg(e, q);
        with_proj += w * dxi.dot(proj);
        without += w * dxi.dot(raw);
        const Mat3 f_prev = unflatten(s.fe.broken_at(prev.F, e, q));
        const Xi dphi_gv =
            dphi_apply(f_prev, s.fe.velocity_grad_at(next.v, e, q));
        with_proj2 += w * dphi_gv.dot(proj);
        without2 += w * dphi_gv.dot(raw);
      }
    CHECK(std::abs(with_proj - without) <=
          1e-12 * std::max(1.0, std::abs(without)));
    CHECK(std::abs(with_proj2 - without2) <=
          1e-12 * std::max(1.0, std::abs(without2)));
  }
}

TEST_CASE("run validates the step count") {
  const Setup s;
  const DiscreteState initial = s.preset("equilibrium");
  StepConfig cfg;
  cfg.tau = 3e-3;
  CHECK_THROWS_AS(run(s.fe, s.model, initial, cfg, 1e-2),
                  std::invalid_argument);
}
