#pragma once

#include <memory>
#include <vector>

#include "polyelast/energy.hpp"
#include "polyelast/fe_space.hpp"
#include "polyelast/stepper.hpp"

// Time interpolants of a discrete trajectory, relative entropy against a
// reference solution, and term-by-term verification of the integrated
// relative entropy identity
//   d/dt int eta^r dx = int ( -D/tau + Q + E + Ebar ) dx.

namespace polyelast {

/// A smooth (or surrogate) solution of the enlarged system, evaluable at
/// arbitrary (x, t). grad_velocity / grad_dG are the spatial derivatives
/// d_a v_i and d_a(G_{,A}(xi)); they are only set for references with
/// analytically known derivatives (smooth_derivatives = true).
struct ReferenceSolution {
  std::function<Eigen::Vector3d(const Eigen::Vector3d&, double)> velocity;
  std::function<Xi(const Eigen::Vector3d&, double)> xi;
  std::function<Mat3(const Eigen::Vector3d&, double)> grad_velocity;
  std::function<Eigen::Matrix<double, 19, 3>(const Eigen::Vector3d&, double)>
      grad_dG;
  bool smooth_derivatives = false;
  double bound_M = 0.0;
};

/// Constant equilibrium state: v = 0, xi = Phi(F_star).
ReferenceSolution equilibrium_reference(const Mat3& f_star = Mat3::Identity());

/// Uniform translation: v = c, xi = Phi(F_star).
ReferenceSolution translation_reference(const Eigen::Vector3d& c,
                                        const Mat3& f_star = Mat3::Identity());

/// Surrogate reference for rate studies: the hat interpolant of a finer
/// trajectory on the same mesh. Values only (no smooth derivatives).
ReferenceSolution surrogate_reference(std::shared_ptr<const FeSystem> fe,
                                      std::shared_ptr<const Trajectory> fine);

/// Time interpolants of a trajectory: hat (piecewise linear), bar
/// (piecewise constant, value = iterate n on [t_{n-1}, t_n)), and the
/// time-shifted bar_star (value = F^{n-1} on that interval).
class Interpolants {
 public:
  Interpolants(const FeSystem& fe, const Trajectory& traj)
      : fe_(&fe), traj_(&traj) {}

  /// 1-based interval index n with t in [t_{n-1}, t_n); clamped at the end.
  int interval(double t) const;
  double lambda(double t) const;  // (t - t_{n-1}) / tau in [0, 1)

  /// Coefficient-linear hat interpolant (exact at grid times).
  DiscreteState hat(double t) const;
  const DiscreteState& bar(double t) const;       // iterate n
  const DiscreteState& lower(double t) const;     // iterate n-1
  const BrokenField& bar_star_F(double t) const;  // F^{n-1}

 private:
  const FeSystem* fe_;
  const Trajectory* traj_;
};

struct EntropyReport {
  double t = 0.0;
  double eta = 0.0;    // entropy of the hat interpolant
  double eta_r = 0.0;  // relative entropy vs the reference
  double Q = 0.0;
  double D = 0.0;
  double E = 0.0;
  double Ebar = 0.0;
  double residual = 0.0;  // |d/dt int eta_r - (-D/tau + Q + E + Ebar)|
};

struct GronwallReport {
  double sup_eta_r = 0.0;
  double eta_r_initial = 0.0;
  double growth_constant = 0.0;  // smallest empirical C; 0 when undefined
  bool absolute_only = false;    // eta_r(0) = 0 with later growth
  bool monotone_decay = true;
  std::vector<std::pair<double, double>> samples;  // (t, int eta_r)
};

/// int ( 1/2 |v|^2 + G(xi) ) dx by quadrature.
double entropy(const FeSystem& fe, const EnergyModel& model,
               const DiscreteState& state);

/// int eta(approx) - eta(ref) - Deta(ref)(approx - ref) dx  at time t.
double relative_entropy(const FeSystem& fe, const EnergyModel& model,
                        const DiscreteState& approx,
                        const ReferenceSolution& ref, double t);

/// Assembles eta, eta_r, Q, D, E, Ebar at a time t in the interior of a
/// step interval. Throws when t sits on a grid time.
EntropyReport identity_terms(const FeSystem& fe, const EnergyModel& model,
                             const Trajectory& traj,
                             const ReferenceSolution& ref, double t);

/// Residual of the integrated identity at each sample time; the left side
/// is a centered difference of int eta_r with delta = tau/100.
std::vector<EntropyReport> verify_identity(const FeSystem& fe,
                                           const EnergyModel& model,
                                           const Trajectory& traj,
                                           const ReferenceSolution& ref,
                                           const std::vector<double>& t_grid);

/// sup_t int eta_r plus an empirical Gronwall growth constant; samples at
/// interval midpoints. Diagnostic only.
GronwallReport gronwall_monitor(const FeSystem& fe, const EnergyModel& model,
                                const Trajectory& traj,
                                const ReferenceSolution& ref);

}  // namespace polyelast
