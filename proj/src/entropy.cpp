#include "polyelast/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace polyelast {

namespace {

Eigen::Matrix<double, 19, 3> zero_grad_dg(const Eigen::Vector3d&, double) {
  return Eigen::Matrix<double, 19, 3>::Zero();
}

Mat3 zero_grad_v(const Eigen::Vector3d&, double) { return Mat3::Zero(); }

ReferenceSolution constant_reference(const Eigen::Vector3d& c,
                                     const Mat3& f_star) {
  const Xi xi_star = phi(f_star);
  ReferenceSolution ref;
  ref.velocity = [c](const Eigen::Vector3d&, double) { return c; };
  ref.xi = [xi_star](const Eigen::Vector3d&, double) { return xi_star; };
  ref.grad_velocity = zero_grad_v;
  ref.grad_dG = zero_grad_dg;
  ref.smooth_derivatives = true;
  ref.bound_M = 0.0;
  return ref;
}

// S(g, J)_{ia} = g_A J_{A,(ia)}: the (19 x 9 -> 3 x 3) stress contraction.
Mat3 contract(const Xi& g, const PhiJacobian& J) {
  return unflatten(J.transpose() * g);
}

}  // namespace

ReferenceSolution equilibrium_reference(const Mat3& f_star) {
  return constant_reference(Eigen::Vector3d::Zero(), f_star);
}

ReferenceSolution translation_reference(const Eigen::Vector3d& c,
                                        const Mat3& f_star) {
  return constant_reference(c, f_star);
}

ReferenceSolution surrogate_reference(std::shared_ptr<const FeSystem> fe,
                                      std::shared_ptr<const Trajectory> fine) {
  struct Cache {
    double t = std::numeric_limits<double>::quiet_NaN();
    DiscreteState hat;
  };
  auto cache = std::make_shared<Cache>();
  auto hat_at = [fe, fine, cache](double t) -> const DiscreteState& {
    if (!(t == cache->t)) {
      cache->hat = Interpolants(*fe, *fine).hat(t);
      cache->t = t;
    }
    return cache->hat;
  };
  ReferenceSolution ref;
  ref.velocity = [fe, hat_at](const Eigen::Vector3d& x, double t) {
    return fe->velocity_at_point(hat_at(t).v, x);
  };
  ref.xi = [fe, hat_at](const Eigen::Vector3d& x, double t) {
    return fe->xi_at_point(hat_at(t), x);
  };
  ref.smooth_derivatives = false;
  return ref;
}

// ---------------------------------------------------------------------------
// Interpolants

int Interpolants::interval(double t) const {
  const int nmax = static_cast<int>(traj_->states.size()) - 1;
  if (nmax < 1) throw std::logic_error("trajectory has no steps");
  const int n = static_cast<int>(std::floor(t / traj_->tau)) + 1;
  return std::clamp(n, 1, nmax);
}

double Interpolants::lambda(double t) const {
  const int n = interval(t);
  return (t - (n - 1) * traj_->tau) / traj_->tau;
}

DiscreteState Interpolants::hat(double t) const {
  const int n = interval(t);
  const double lam = lambda(t);
  const DiscreteState& a = traj_->states[n - 1];
  const DiscreteState& b = traj_->states[n];
  DiscreteState out;
  out.v = (1.0 - lam) * a.v + lam * b.v;
  out.F = a.F;
  out.Z = a.Z;
  out.w = a.w;
  for (int e = 0; e < fe_->num_elements(); ++e) {
    out.F.coef[e] = (1.0 - lam) * a.F.coef[e] + lam * b.F.coef[e];
    out.Z.coef[e] = (1.0 - lam) * a.Z.coef[e] + lam * b.Z.coef[e];
    out.w.coef[e] = (1.0 - lam) * a.w.coef[e] + lam * b.w.coef[e];
  }
  out.gradient_flag = a.gradient_flag && b.gradient_flag;
  out.time_index = n;
  return out;
}

const DiscreteState& Interpolants::bar(double t) const {
  return traj_->states[interval(t)];
}

const DiscreteState& Interpolants::lower(double t) const {
  return traj_->states[interval(t) - 1];
}

const BrokenField& Interpolants::bar_star_F(double t) const {
  return traj_->states[interval(t) - 1].F;
}

// ---------------------------------------------------------------------------
// Entropy functionals

double entropy(const FeSystem& fe, const EnergyModel& model,
               const DiscreteState& state) {
  double out = 0.0;
  for (int e = 0; e < fe.num_elements(); ++e)
    for (int q = 0; q < fe.num_quad(); ++q) {
      const Eigen::Vector3d v = fe.velocity_at(state.v, e, q);
      out += fe.quad_weight(e, q) *
             (0.5 * v.squaredNorm() + model.eval(fe.xi_at(state, e, q)));
    }
  return out;
}

double relative_entropy(const FeSystem& fe, const EnergyModel& model,
                        const DiscreteState& approx,
                        const ReferenceSolution& ref, double t) {
  double out = 0.0;
  for (int e = 0; e < fe.num_elements(); ++e)
    for (int q = 0; q < fe.num_quad(); ++q) {
      const Eigen::Vector3d x = fe.quad_point(e, q);
      const Eigen::Vector3d dv = fe.velocity_at(approx.v, e, q) -
                                 ref.velocity(x, t);
      const Xi xi_h = fe.xi_at(approx, e, q);
      const Xi xi_r = ref.xi(x, t);
      out += fe.quad_weight(e, q) *
             (0.5 * dv.squaredNorm() + model.eval(xi_h) - model.eval(xi_r) -
              model.grad(xi_r).dot(xi_h - xi_r));
    }
  return out;
}

EntropyReport identity_terms(const FeSystem& fe, const EnergyModel& model,
                             const Trajectory& traj,
                             const ReferenceSolution& ref, double t) {
  const Interpolants ip(fe, traj);
  const double lam = ip.lambda(t);
  if (lam == 0.0)
    throw std::invalid_argument(
        "identity terms need t in the interior of a step interval");
  if (!ref.smooth_derivatives)
    throw std::invalid_argument(
        "identity terms need a reference with smooth derivatives");

  const DiscreteState hat = ip.hat(t);
  const DiscreteState& bar = ip.bar(t);
  const DiscreteState& low = ip.lower(t);

  // P^U of the reference velocity at time t, for the Ebar term.
  const Eigen::VectorXd puv = fe.project_velocity(
      [&](const Eigen::Vector3d& x) { return ref.velocity(x, t); });

  EntropyReport rep;
  rep.t = t;
  rep.eta = entropy(fe, model, hat);
  rep.eta_r = relative_entropy(fe, model, hat, ref, t);

  for (int e = 0; e < fe.num_elements(); ++e)
    for (int q = 0; q < fe.num_quad(); ++q) {
      const double w = fe.quad_weight(e, q);
      const Eigen::Vector3d x = fe.quad_point(e, q);

      const Eigen::Vector3d v_r = ref.velocity(x, t);
      const Xi xi_r = ref.xi(x, t);
      const Mat3 gv = ref.grad_velocity(x, t);
      const Eigen::Matrix<double, 19, 3> gdg = ref.grad_dG(x, t);

      const Eigen::Vector3d v_h = fe.velocity_at(hat.v, e, q);
      const Eigen::Vector3d v_b = fe.velocity_at(bar.v, e, q);
      const Xi xi_h = fe.xi_at(hat, e, q);
      const Xi xi_b = fe.xi_at(bar, e, q);
      const Mat3 f_s = unflatten(fe.broken_at(low.F, e, q));

      const PhiJacobian J_h = phi_jacobian(xi_F(xi_h));
      const PhiJacobian J_r = phi_jacobian(xi_F(xi_r));
      const PhiJacobian J_s = phi_jacobian(f_s);

      const Xi dG_h = model.grad(xi_h);
      const Xi dG_b = model.grad(xi_b);
      const Xi dG_r = model.grad(xi_r);

      // U(J)_i = d_a(G_{,A}(xi)) Phi^A_{,ia}, contracted with the velocity
      // differences below.
      const auto ucontract = [&gdg](const PhiJacobian& J) {
        Eigen::Vector3d u = Eigen::Vector3d::Zero();
        for (int i = 0; i < 3; ++i)
          for (int al = 0; al < 3; ++al)
            u[i] += gdg.col(al).dot(J.col(3 * i + al));
        return u;
      };

      // Q: quadratic-in-difference terms of the two solutions.
      const Xi q3 = dG_h - dG_r - model.hess(xi_r) * (xi_h - xi_r);
      double Q = ucontract(J_h - J_r).dot(v_h - v_r);
      Q += gv.cwiseProduct(contract(dG_h - dG_r, J_h - J_r)).sum();
      Q += gv.cwiseProduct(contract(q3, J_r)).sum();

      // D on this interval: (grad eta(bar) - grad eta(hat)) . delta Theta.
      const Eigen::Vector3d dv_n = v_b - fe.velocity_at(low.v, e, q);
      const Xi dxi_n = xi_b - fe.xi_at(low, e, q);
      const double D = (v_b - v_h).dot(dv_n) + (dG_b - dG_h).dot(dxi_n);

      // E: the time-discretization error (eight products).
      double E = ucontract(J_r).dot(v_b - v_h);
      E += ucontract(J_h - J_r).dot(v_b - v_h);
      E += ucontract(J_s - J_h).dot(v_b - v_h);
      E += ucontract(J_s - J_h).dot(v_h - v_r);
      E += gv.cwiseProduct(contract(dG_b - dG_h, J_r)).sum();
      E += gv.cwiseProduct(contract(dG_b - dG_h, J_s - J_h)).sum();
      E += gv.cwiseProduct(contract(dG_b - dG_h, J_h - J_r)).sum();
      E += gv.cwiseProduct(contract(dG_h - dG_r, J_s - J_h)).sum();

      // Ebar: the spatial-discretization error.
      const Mat3 gp = fe.velocity_grad_at(puv, e, q) - gv;
      const double Ebar = contract(dG_b, J_s).cwiseProduct(gp).sum();

      rep.Q += w * Q;
      rep.D += w * D;
      rep.E += w * E;
      rep.Ebar += w * Ebar;
    }
  return rep;
}

std::vector<EntropyReport> verify_identity(const FeSystem& fe,
                                           const EnergyModel& model,
                                           const Trajectory& traj,
                                           const ReferenceSolution& ref,
                                           const std::vector<double>& t_grid) {
  const Interpolants ip(fe, traj);
  std::vector<EntropyReport> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    EntropyReport rep = identity_terms(fe, model, traj, ref, t);
    const double delta = traj.tau / 100.0;
    if (ip.interval(t - delta) != ip.interval(t + delta))
      throw std::invalid_argument(
          "sample time too close to a step boundary for differencing");
    const double lo = relative_entropy(fe, model, ip.hat(t - delta), ref,
                                       t - delta);
    const double hi = relative_entropy(fe, model, ip.hat(t + delta), ref,
                                       t + delta);
    const double lhs = (hi - lo) / (2.0 * delta);
    const double rhs = -rep.D / traj.tau + rep.Q + rep.E + rep.Ebar;
    rep.residual = std::abs(lhs - rhs);
    out.push_back(rep);
  }
  return out;
}

GronwallReport gronwall_monitor(const FeSystem& fe, const EnergyModel& model,
                                const Trajectory& traj,
                                const ReferenceSolution& ref) {
  const Interpolants ip(fe, traj);
  GronwallReport rep;
  rep.eta_r_initial =
      relative_entropy(fe, model, traj.states.front(), ref, 0.0);
  rep.sup_eta_r = rep.eta_r_initial;
  rep.samples.emplace_back(0.0, rep.eta_r_initial);

  const int nsteps = static_cast<int>(traj.states.size()) - 1;
  double accumulated = 0.0;
  double prev = rep.eta_r_initial;
  for (int n = 1; n <= nsteps; ++n) {
    const double t = (n - 0.5) * traj.tau;
    const double er = relative_entropy(fe, model, ip.hat(t), ref, t);
    if (ref.smooth_derivatives) {
      const EntropyReport terms = identity_terms(fe, model, traj, ref, t);
      accumulated += traj.tau * (std::abs(terms.E) + std::abs(terms.Ebar));
    }
    rep.sup_eta_r = std::max(rep.sup_eta_r, er);
    if (er > prev + 1e-14 * std::max(1.0, prev)) rep.monotone_decay = false;
    prev = er;
    rep.samples.emplace_back(t, er);

    const double excess = er - accumulated;
    if (excess > 0.0 && t > 0.0) {
      if (rep.eta_r_initial > 0.0)
        rep.growth_constant = std::max(
            rep.growth_constant, std::log(excess / rep.eta_r_initial) / t);
      else
        rep.absolute_only = true;
    }
  }
  return rep;
}

}  // namespace polyelast
