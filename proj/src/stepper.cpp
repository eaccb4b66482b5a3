#include "polyelast/stepper.hpp"

#include <Eigen/Sparse>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace polyelast {

namespace {

// Per-quadrature-point data frozen at the beginning of a step.
struct StepWorkspace {
  // phi_jacobian(F_prev) per (element, quad point), row-major in q.
  std::vector<PhiJacobian> dphi;
  // xi_prev per (element, quad point).
  std::vector<Xi> xi_prev;
  // v_prev per (element, quad point).
  std::vector<Eigen::Vector3d> v_prev;

  int nq = 0;
  int at(int e, int q) const { return e * nq + q; }
};

StepWorkspace make_workspace(const FeSystem& fe, const DiscreteState& prev) {
  StepWorkspace ws;
  ws.nq = fe.num_quad();
  const int total = fe.num_elements() * ws.nq;
  ws.dphi.resize(total);
  ws.xi_prev.resize(total);
  ws.v_prev.resize(total);
  for (int e = 0; e < fe.num_elements(); ++e)
    for (int q = 0; q < fe.num_quad(); ++q) {
      const int id = ws.at(e, q);
      ws.xi_prev[id] = fe.xi_at(prev, e, q);
      ws.dphi[id] = phi_jacobian(xi_F(ws.xi_prev[id]));
      ws.v_prev[id] = fe.velocity_at(prev.v, e, q);
    }
  return ws;
}

Xi xi_candidate(const StepWorkspace& ws, int id, const Mat3& grad_v,
                double tau) {
  return ws.xi_prev[id] + tau * (ws.dphi[id] * flatten(grad_v));
}

double functional(const FeSystem& fe, const EnergyModel& model,
                  const StepWorkspace& ws, const Eigen::VectorXd& v,
                  double tau) {
  double J = 0.0;
  for (int e = 0; e < fe.num_elements(); ++e)
    for (int q = 0; q < fe.num_quad(); ++q) {
      const int id = ws.at(e, q);
      const Eigen::Vector3d dv = fe.velocity_at(v, e, q) - ws.v_prev[id];
      const Mat3 gv = fe.velocity_grad_at(v, e, q);
      J += fe.quad_weight(e, q) *
           (0.5 * dv.squaredNorm() + model.eval(xi_candidate(ws, id, gv, tau)));
    }
  return J;
}

Eigen::VectorXd gradient(const FeSystem& fe, const EnergyModel& model,
                         const StepWorkspace& ws, const Eigen::VectorXd& v,
                         double tau) {
  // First pass: stresses and their volume mean. Since int grad phi dx = 0
  // exactly on the torus (and the quadrature integrates it exactly), any
  // constant may be subtracted from the stress; removing the mean avoids
  // catastrophic cancellation in the assembled sums.
  std::vector<Mat3> stress(ws.dphi.size());
  Mat3 mean = Mat3::Zero();
  double vol = 0.0;
  for (int e = 0; e < fe.num_elements(); ++e)
    for (int q = 0; q < fe.num_quad(); ++q) {
      const int id = ws.at(e, q);
      const Mat3 gv = fe.velocity_grad_at(v, e, q);
      const Xi xi = xi_candidate(ws, id, gv, tau);
      // stress s_{ia} = G_{,A}(xi) Phi^A_{,ia}(F_prev)
      stress[id] = unflatten(ws.dphi[id].transpose() * model.grad(xi));
      const double w = fe.quad_weight(e, q);
      mean += w * stress[id];
      vol += w;
    }
  mean /= vol;

  Eigen::VectorXd g = Eigen::VectorXd::Zero(fe.num_velocity_dofs());
  for (int e = 0; e < fe.num_elements(); ++e)
    for (int q = 0; q < fe.num_quad(); ++q) {
      const int id = ws.at(e, q);
      const double w = fe.quad_weight(e, q);
      const Eigen::Vector3d dv = fe.velocity_at(v, e, q) - ws.v_prev[id];
      const Mat3 s = stress[id] - mean;
      const Eigen::VectorXd& bv = fe.basis_values(q);
      const Eigen::MatrixXd& bg = fe.basis_gradients(e, q);
      for (int a = 0; a < fe.local_nodes(); ++a) {
        const int node = fe.global_node(e, a);
        for (int i = 0; i < 3; ++i)
          g[3 * node + i] +=
              w * (dv[i] * bv[a] + tau * s.row(i).dot(bg.row(a)));
      }
    }
  return g;
}

Eigen::SparseMatrix<double> hessian(const FeSystem& fe,
                                    const EnergyModel& model,
                                    const StepWorkspace& ws,
                                    const Eigen::VectorXd& v, double tau) {
  const int n = fe.num_velocity_dofs();
  std::vector<Eigen::Triplet<double>> trips;
  const int nloc = fe.local_nodes();
  trips.reserve(static_cast<std::size_t>(fe.num_elements()) * 9 * nloc * nloc);
  Eigen::MatrixXd local(3 * nloc, 3 * nloc);
  for (int e = 0; e < fe.num_elements(); ++e) {
    local.setZero();
    for (int q = 0; q < fe.num_quad(); ++q) {
      const int id = ws.at(e, q);
      const double w = fe.quad_weight(e, q);
      const Mat3 gv = fe.velocity_grad_at(v, e, q);
      const Xi xi = xi_candidate(ws, id, gv, tau);
      // K_{(ia)(jb)} = Phi^A_{,ia} G_{,AB} Phi^B_{,jb}, 9x9 SPD block.
      const Eigen::Matrix<double, 9, 9> K =
          ws.dphi[id].transpose() * model.hess(xi) * ws.dphi[id];
      const Eigen::VectorXd& bv = fe.basis_values(q);
      const Eigen::MatrixXd& bg = fe.basis_gradients(e, q);
      for (int a = 0; a < nloc; ++a)
        for (int b = 0; b < nloc; ++b) {
          const double mass_ab = w * bv[a] * bv[b];
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
              double kab = 0.0;
              for (int al = 0; al < 3; ++al)
                for (int be = 0; be < 3; ++be)
                  kab += K(3 * i + al, 3 * j + be) * bg(a, al) * bg(b, be);
              local(3 * a + i, 3 * b + j) +=
                  (i == j ? mass_ab : 0.0) + w * tau * tau * kab;
            }
        }
    }
    for (int a = 0; a < nloc; ++a)
      for (int b = 0; b < nloc; ++b) {
        const int na = fe.global_node(e, a);
        const int nb = fe.global_node(e, b);
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            trips.emplace_back(3 * na + i, 3 * nb + j,
                               local(3 * a + i, 3 * b + j));
      }
  }
  Eigen::SparseMatrix<double> H(n, n);
  H.setFromTriplets(trips.begin(), trips.end());
  return H;
}

// Euler-Lagrange residual from the functional gradient:
// grad J = tau * (EL residual vector), normalized per basis function.
double residual_from_gradient(const FeSystem& fe, const Eigen::VectorXd& g,
                              double tau) {
  const Eigen::VectorXd diag = fe.scalar_mass().diagonal();
  double r = 0.0;
  for (int node = 0; node < fe.num_nodes(); ++node) {
    const double scale = tau * std::sqrt(diag[node]);
    for (int i = 0; i < 3; ++i)
      r = std::max(r, std::abs(g[3 * node + i]) / scale);
  }
  return r;
}

double internal_energy(const FeSystem& fe, const EnergyModel& model,
                       const DiscreteState& s) {
  double E = 0.0;
  for (int e = 0; e < fe.num_elements(); ++e)
    for (int q = 0; q < fe.num_quad(); ++q)
      E += fe.quad_weight(e, q) * model.eval(fe.xi_at(s, e, q));
  return E;
}

double min_orientation(const FeSystem& fe, const DiscreteState& s) {
  double m = std::numeric_limits<double>::infinity();
  for (int e = 0; e < fe.num_elements(); ++e)
    for (int q = 0; q < fe.num_quad(); ++q)
      m = std::min(m, fe.broken_at(s.w, e, q)[0]);
  return m;
}

}  // namespace

double step_functional(const FeSystem& fe, const EnergyModel& model,
                       const Eigen::VectorXd& v, const DiscreteState& prev,
                       double tau) {
  return functional(fe, model, make_workspace(fe, prev), v, tau);
}

double euler_lagrange_residual(const FeSystem& fe, const EnergyModel& model,
                               const DiscreteState& prev,
                               const DiscreteState& next, double tau) {
  if (prev.v.size() != next.v.size())
    throw std::invalid_argument("states live on different spaces");
  // Mean-subtracted stress, as in the Newton gradient assembly.
  std::vector<Mat3> stress(
      static_cast<std::size_t>(fe.num_elements()) * fe.num_quad());
  Mat3 mean = Mat3::Zero();
  double vol = 0.0;
  for (int e = 0; e < fe.num_elements(); ++e)
    for (int q = 0; q < fe.num_quad(); ++q) {
      const Mat3 f_prev = unflatten(fe.broken_at(prev.F, e, q));
      const std::size_t id = static_cast<std::size_t>(e) * fe.num_quad() + q;
      stress[id] = model.stress(fe.xi_at(next, e, q), f_prev);
      const double w = fe.quad_weight(e, q);
      mean += w * stress[id];
      vol += w;
    }
  mean /= vol;

  Eigen::VectorXd g = Eigen::VectorXd::Zero(fe.num_velocity_dofs());
  for (int e = 0; e < fe.num_elements(); ++e)
    for (int q = 0; q < fe.num_quad(); ++q) {
      const double w = fe.quad_weight(e, q);
      const Eigen::Vector3d dv =
          fe.velocity_at(next.v, e, q) - fe.velocity_at(prev.v, e, q);
      const std::size_t id = static_cast<std::size_t>(e) * fe.num_quad() + q;
      const Mat3 s = stress[id] - mean;
      const Eigen::VectorXd& bv = fe.basis_values(q);
      const Eigen::MatrixXd& bg = fe.basis_gradients(e, q);
      for (int a = 0; a < fe.local_nodes(); ++a) {
        const int node = fe.global_node(e, a);
        for (int i = 0; i < 3; ++i)
          g[3 * node + i] +=
              w * (dv[i] * bv[a] + tau * s.row(i).dot(bg.row(a)));
      }
    }
  return residual_from_gradient(fe, g, tau);
}

std::pair<DiscreteState, StepCertificate> solve_step(
    const FeSystem& fe, const EnergyModel& model, const DiscreteState& prev,
    const StepConfig& cfg) {
  if (cfg.tau <= 0.0) throw std::invalid_argument("time step must be > 0");
  const double tau = cfg.tau;
  const StepWorkspace ws = make_workspace(fe, prev);

  Eigen::VectorXd v = prev.v;  // warm start
  double J = functional(fe, model, ws, v, tau);
  Eigen::VectorXd g = gradient(fe, model, ws, v, tau);
  double res = residual_from_gradient(fe, g, tau);

  StepCertificate cert;
  cert.energy_before = 0.5 * fe.velocity_norm2(prev.v) +
                       internal_energy(fe, model, prev);

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analyzed = false;
  cert.functional_history.push_back(J);
  int it = 0;
  for (; it < cfg.max_newton && res > cfg.newton_tol; ++it) {
    const Eigen::SparseMatrix<double> H = hessian(fe, model, ws, v, tau);
    if (!analyzed) {
      ldlt.analyzePattern(H);
      analyzed = true;
    }
    ldlt.factorize(H);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("Newton system factorization failed");
    const Eigen::VectorXd d = ldlt.solve(-g);
    const double slope = g.dot(d);  // < 0 for a descent direction
    // Near the minimizer the predicted decrease falls below the roundoff
    // resolution of J; the allowance keeps Armijo from rejecting genuine
    // Newton steps there.
    const double j_eps = 1e-14 * std::max(1.0, std::abs(J));
    double lam = 1.0;
    double J_trial = functional(fe, model, ws, v + lam * d, tau);
    int backtracks = 0;
    while (J_trial > J + cfg.armijo_c * lam * slope + j_eps) {
      lam *= cfg.armijo_shrink;
      if (++backtracks > 60)
        throw std::runtime_error(
            "line search failed: step functional is not convex");
      J_trial = functional(fe, model, ws, v + lam * d, tau);
    }
    v += lam * d;
    J = J_trial;
    cert.functional_history.push_back(J);
    g = gradient(fe, model, ws, v, tau);
    res = residual_from_gradient(fe, g, tau);
  }

  cert.newton_iterations = it;
  cert.residual = res;
  cert.converged = res <= cfg.newton_tol;

  // Exact state update: xi_n = xi_prev + tau DPhi(F_prev) grad v_n. Each
  // block is a polynomial of the exact broken degree, so the elementwise
  // projections below have zero representation error.
  DiscreteState next;
  next.v = v;
  next.time_index = prev.time_index + 1;
  next.gradient_flag = prev.gradient_flag;

  const BrokenField gv = fe.inject_gradient(v);
  next.F = prev.F;
  for (int e = 0; e < fe.num_elements(); ++e)
    next.F.coef[e] += tau * gv.coef[e];

  const auto delta = [&](int e, int q) -> Xi {
    const Mat3 gvq = fe.velocity_grad_at(v, e, q);
    return tau * (ws.dphi[ws.at(e, q)] * flatten(gvq));
  };
  next.Z = fe.project_broken_local(9, fe.deg_Z(), [&](int e, int q) {
    return Eigen::VectorXd(delta(e, q).segment<9>(9));
  });
  next.w = fe.project_broken_local(1, fe.deg_w(), [&](int e, int q) {
    return Eigen::VectorXd(Eigen::VectorXd::Constant(1, delta(e, q)[18]));
  });
  for (int e = 0; e < fe.num_elements(); ++e) {
    next.Z.coef[e] += prev.Z.coef[e];
    next.w.coef[e] += prev.w.coef[e];
  }

  cert.energy_after =
      0.5 * fe.velocity_norm2(v) + internal_energy(fe, model, next);
  Eigen::VectorXd dv = v - prev.v;
  cert.dissipation_velocity = 0.5 * fe.velocity_norm2(dv);
  cert.min_w = min_orientation(fe, next);
  return {std::move(next), cert};
}

Trajectory run(const FeSystem& fe, const EnergyModel& model,
               const DiscreteState& initial, const StepConfig& cfg,
               double t_final, const StepHook& hook) {
  const int nsteps = static_cast<int>(std::round(t_final / cfg.tau));
  if (nsteps < 1 || std::abs(nsteps * cfg.tau - t_final) > 1e-9 * t_final)
    throw std::invalid_argument("time.dt must divide time.t_final");

  Trajectory traj;
  traj.tau = cfg.tau;
  traj.states.push_back(initial);
  traj.states.front().time_index = 0;
  for (int n = 1; n <= nsteps; ++n) {
    auto [next, cert] = solve_step(fe, model, traj.states.back(), cfg);
    if (!cert.converged) {
      traj.certificates.push_back(cert);
      traj.completed = false;
      break;
    }
    const DiscreteState& prev = traj.states.back();
    Eigen::VectorXd dv = next.v - prev.v;
    BrokenField dF = next.F, dZ = next.Z, dw = next.w;
    for (int e = 0; e < fe.num_elements(); ++e) {
      dF.coef[e] -= prev.F.coef[e];
      dZ.coef[e] -= prev.Z.coef[e];
      dw.coef[e] -= prev.w.coef[e];
    }
    traj.increment_sum +=
        fe.velocity_norm2(dv) + fe.state_norm2(dF, dZ, dw);
    traj.states.push_back(std::move(next));
    traj.certificates.push_back(cert);
    if (hook) hook(n, traj.states.back(), cert);
  }
  return traj;
}

}  // namespace polyelast
