#pragma once

#include <functional>
#include <vector>

#include "polyelast/energy.hpp"
#include "polyelast/fe_space.hpp"

// One step of the fully discrete scheme: minimize the convex functional
//   J[v] = int  1/2 |v - v_prev|^2 + G(xi_prev + tau DPhi(F_prev) grad v)  dx
// over U_h (Newton + Armijo backtracking), then update xi exactly,
//   xi_n = xi_prev + tau DPhi(F_prev) grad v_n,
// which lands in H^F x H^Z x H^w with zero representation error.

namespace polyelast {

struct StepConfig {
  double tau = 1e-3;
  double newton_tol = 1e-10;  // Euler-Lagrange residual, dual norm of U_h
  int max_newton = 50;
  double armijo_c = 1e-4;
  double armijo_shrink = 0.5;
};

struct StepCertificate {
  double energy_before = 0.0;      // 1/2 |v_prev|^2 + int G(xi_prev)
  double energy_after = 0.0;       // 1/2 |v_n|^2 + int G(xi_n)
  double dissipation_velocity = 0.0;  // 1/2 |v_n - v_prev|^2
  double residual = 0.0;           // final Euler-Lagrange residual
  int newton_iterations = 0;
  bool converged = false;
  double min_w = 0.0;              // min of the orientation field over quad pts
  std::vector<double> functional_history;  // J after each accepted iterate
  // energy_after + dissipation_velocity - energy_before; <= 0 up to roundoff.
  double slack() const {
    return energy_after + dissipation_velocity - energy_before;
  }
};

struct Trajectory {
  double tau = 0.0;
  std::vector<DiscreteState> states;       // states[0] = initial data
  std::vector<StepCertificate> certificates;
  double increment_sum = 0.0;  // sum_n |dv^n|^2 + |dxi^n|^2  (L2 squared)
  bool completed = true;       // false when a step aborted the run
};

using StepHook =
    std::function<void(int step, const DiscreteState&, const StepCertificate&)>;

/// J[v] evaluated by quadrature; convex in v.
double step_functional(const FeSystem& fe, const EnergyModel& model,
                       const Eigen::VectorXd& v, const DiscreteState& prev,
                       double tau);

/// max over scalar basis functions phi_a e_i of
///   |<(v_n - v_prev)/tau, phi> + <G_{,A}(xi_n) Phi^A_{,ia}(F_prev), d_a phi>|
/// normalized by ||phi_a||_{L2}.
double euler_lagrange_residual(const FeSystem& fe, const EnergyModel& model,
                               const DiscreteState& prev,
                               const DiscreteState& next, double tau);

/// One step. Throws std::runtime_error on line-search failure (signals a
/// non-convex energy); Newton non-convergence is reported through the
/// certificate, not thrown.
std::pair<DiscreteState, StepCertificate> solve_step(
    const FeSystem& fe, const EnergyModel& model, const DiscreteState& prev,
    const StepConfig& cfg);

/// N = round(t_final / tau) steps from the initial state.
Trajectory run(const FeSystem& fe, const EnergyModel& model,
               const DiscreteState& initial, const StepConfig& cfg,
               double t_final, const StepHook& hook = nullptr);

}  // namespace polyelast
