#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "polyelast/entropy.hpp"
#include "polyelast/runner.hpp"

using namespace polyelast;

namespace {

struct Setup {
  TorusMesh mesh = TorusMesh::build_uniform(2);
  FeSystem fe{mesh, 1};
  EnergyModel model = EnergyModel::make(1.0, 1.0, 7.0);

  DiscreteState preset(const std::string& name, double amplitude = 0.05) const {
    RunConfig cfg;
    cfg.preset = name;
    cfg.amplitude = amplitude;
    return make_initial_state(fe, cfg);
  }

  Trajectory run_preset(const std::string& name, double tau,
                        double t_final) const {
    StepConfig cfg;
    cfg.tau = tau;
    return run(fe, model, preset(name), cfg, t_final);
  }
};

}  // namespace

TEST_CASE("entropy of constant states") {
  const Setup s;
  const double g_id = s.model.eval(phi(Mat3::Identity()));
  CHECK(entropy(s.fe, s.model, s.preset("equilibrium")) ==
        doctest::Approx(g_id).epsilon(1e-13));
  const double a = 0.05;
  CHECK(entropy(s.fe, s.model, s.preset("translation", a)) ==
        doctest::Approx(0.5 * a * a + g_id).epsilon(1e-13));
}

TEST_CASE("relative entropy: zero at the reference, exact for v shifts") {
  const Setup s;
  const DiscreteState eq = s.preset("equilibrium");
  const ReferenceSolution ref = equilibrium_reference();
  CHECK(std::abs(relative_entropy(s.fe, s.model, eq, ref, 0.0)) <= 1e-13);

  // velocity-only perturbation: eta_r = 1/2 ||dv||^2 exactly
  DiscreteState shifted = eq;
  shifted.v.setConstant(0.3);
  const double expected = 0.5 * s.fe.velocity_norm2(shifted.v);
  CHECK(relative_entropy(s.fe, s.model, shifted, ref, 0.0) ==
        doctest::Approx(expected).epsilon(1e-13));

  // Bregman nonnegativity for a generic state
  const DiscreteState pert = s.preset("perturbed");
  CHECK(relative_entropy(s.fe, s.model, pert, ref, 0.0) >= 0.0);
}

TEST_CASE("interpolants: grid exactness, midpoint average, bar iterate") {
  const Setup s;
  const Trajectory traj = s.run_preset("perturbed", 1e-3, 5e-3);
  REQUIRE(traj.completed);
  const Interpolants interp(s.fe, traj);

  for (int n = 0; n <= 5; ++n) {
    const DiscreteState at = interp.hat(n * traj.tau);
    CHECK((at.v - traj.states[n].v).cwiseAbs().maxCoeff() <= 1e-14);
    for (std::size_t e = 0; e < at.F.coef.size(); ++e)
      CHECK((at.F.coef[e] - traj.states[n].F.coef[e]).cwiseAbs().maxCoeff() <=
            1e-14);
  }
  const double tm = 2.5 * traj.tau;
  CHECK(interp.interval(tm) == 3);
  CHECK(interp.lambda(tm) == doctest::Approx(0.5).epsilon(1e-12));
  const DiscreteState mid = interp.hat(tm);
  const Eigen::VectorXd avg = 0.5 * (traj.states[2].v + traj.states[3].v);
  CHECK((mid.v - avg).cwiseAbs().maxCoeff() <= 1e-14);
  // bar = iterate n on [t_{n-1}, t_n); bar_star carries F^{n-1}
  CHECK(&interp.bar(tm) == &traj.states[3]);
  CHECK(&interp.lower(tm) == &traj.states[2]);
  CHECK(&interp.bar_star_F(tm) == &traj.states[2].F);
}

TEST_CASE("identity terms vanish against exact constant references") {
  const Setup s;
  const Trajectory traj = s.run_preset("perturbed", 1e-3, 5e-3);
  REQUIRE(traj.completed);
  for (const ReferenceSolution& ref :
       {equilibrium_reference(),
        translation_reference(Eigen::Vector3d(0.05, 0.0, 0.0))}) {
    for (double t : {0.5e-3, 2.5e-3, 4.5e-3}) {
      const EntropyReport rep = identity_terms(s.fe, s.model, traj, ref, t);
      CHECK(std::abs(rep.Q) <= 1e-12);
      CHECK(std::abs(rep.E) <= 1e-12);
      CHECK(std::abs(rep.Ebar) <= 1e-12);
      CHECK(rep.D >= -1e-14);
      CHECK(rep.eta_r >= 0.0);
    }
  }
}

TEST_CASE("integrated identity holds along a perturbed trajectory") {
  const Setup s;
  const Trajectory traj = s.run_preset("perturbed", 1e-3, 1e-2);
  REQUIRE(traj.completed);
  std::vector<double> t_grid;
  for (int n = 1; n <= 10; ++n) t_grid.push_back((n - 0.5) * traj.tau);
  for (const ReferenceSolution& ref :
       {equilibrium_reference(),
        translation_reference(Eigen::Vector3d(0.05, 0.0, 0.0))}) {
    const auto reports = verify_identity(s.fe, s.model, traj, ref, t_grid);
    REQUIRE(reports.size() == t_grid.size());
    for (const EntropyReport& rep : reports) {
      const double rhs = -rep.D / traj.tau + rep.Q + rep.E + rep.Ebar;
      CHECK(rep.residual <= 1e-8 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("identity evaluation rejects grid times") {
  const Setup s;
  const Trajectory traj = s.run_preset("perturbed", 1e-3, 2e-3);
  REQUIRE(traj.completed);
  const ReferenceSolution ref = equilibrium_reference();
  CHECK_THROWS_AS(identity_terms(s.fe, s.model, traj, ref, traj.tau),
                  std::invalid_argument);
}

TEST_CASE("gronwall monitor: decay towards equilibrium") {
  const Setup s;
  const Trajectory traj = s.run_preset("perturbed", 1e-3, 1e-2);
  REQUIRE(traj.completed);
  const GronwallReport rep =
      gronwall_monitor(s.fe, s.model, traj, equilibrium_reference());
  CHECK(rep.monotone_decay);
  CHECK(rep.sup_eta_r == doctest::Approx(rep.eta_r_initial).epsilon(1e-12));
  CHECK(rep.samples.size() == 11);  // t = 0 plus 10 midpoints
  for (const auto& [t, v] : rep.samples) CHECK(v >= 0.0);
}

TEST_CASE("surrogate reference reproduces its own trajectory") {
  const Setup s;
  auto fe = std::make_shared<FeSystem>(s.mesh, 1);
  const EnergyModel model = EnergyModel::make(1.0, 1.0, 7.0);
  RunConfig rc;
  rc.preset = "perturbed";
  StepConfig sc;
  sc.tau = 1e-3;
  auto traj = std::make_shared<Trajectory>(
      run(*fe, model, make_initial_state(*fe, rc), sc, 5e-3));
  REQUIRE(traj->completed);
  const ReferenceSolution ref = surrogate_reference(fe, traj);
  CHECK_FALSE(ref.smooth_derivatives);
  // relative entropy of the trajectory against itself vanishes at grid times
  for (int n = 0; n <= 5; ++n)
    CHECK(std::abs(relative_entropy(*fe, model, traj->states[n], ref,
                                    n * traj->tau)) <= 1e-12);
}
