#include "polyelast/energy.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace polyelast {

namespace {

EnergyParams derive_constants(double kappa, double gamma, double p) {
  EnergyParams q;
  q.kappa = kappa;
  q.gamma = gamma;
  q.p = p;
  // D2H of kappa|F|^p has eigenvalues kappa*p*|F|^{p-2} (orthogonal to F)
  // and kappa*p*(p-1)*|F|^{p-2} (along F).
  q.kappa_lo = kappa * p;
  q.kappa_hi = kappa * p * (p - 1.0);
  q.gamma_lo = gamma;
  q.gamma_hi = gamma;
  // (H2): G = kappa|F|^p + (gamma/2)|xi|^2 >= kappa|F|^p + (gamma/2)(|Z|^2+|w|^2).
  q.c1 = kappa;
  q.c2 = 0.5 * gamma;
  q.c3 = 0.5 * gamma;
  q.c4 = 1.0;
  // (H3): |F|^2 <= |F|^p + 1 for p > 2.
  q.c5 = kappa + gamma;
  // (H4): |G_F| <= (kappa*p + gamma) max(|F|^{p-1}, 1), etc.
  const double ag = std::abs(gamma);
  q.c6 = 3.0 * (std::pow(kappa * p + ag, p / (p - 1.0)) +
                std::pow(ag, p / (p - 2.0)) + std::pow(ag, p / (p - 3.0)) + 1.0);
  // (H5): componentwise |D3H| <= kappa p(p-2)(3+|p-4|) |F|^{p-3}.
  q.c7 = kappa * p * (p - 2.0) * (3.0 + std::abs(p - 4.0)) + 1.0;
  q.c8 = 1.0;
  return q;
}

}  // namespace

EnergyModel EnergyModel::make(double kappa, double gamma, double p) {
  if (!(p > 6.0))
    throw std::invalid_argument("energy.p must exceed 6, got " +
                                std::to_string(p));
  if (!(kappa > 0.0))
    throw std::invalid_argument("energy.kappa must be positive");
  if (!(gamma > 0.0))
    throw std::invalid_argument("energy.gamma must be positive");
  return EnergyModel(derive_constants(kappa, gamma, p));
}

EnergyModel EnergyModel::make_unchecked(double kappa, double gamma, double p) {
  return EnergyModel(derive_constants(kappa, gamma, p));
}

double EnergyModel::eval(const Xi& xi) const {
  const double fn = xi.segment<9>(0).norm();
  return params_.kappa * std::pow(fn, params_.p) +
         0.5 * params_.gamma * xi.squaredNorm();
}

Xi EnergyModel::grad(const Xi& xi) const {
  const double fn = xi.segment<9>(0).norm();
  Xi g = params_.gamma * xi;
  if (fn > 0.0)
    g.segment<9>(0) +=
        params_.kappa * params_.p * std::pow(fn, params_.p - 2.0) *
        xi.segment<9>(0);
  return g;
}

Hess19 EnergyModel::hess(const Xi& xi) const {
  Hess19 h = params_.gamma * Hess19::Identity();
  const auto f = xi.segment<9>(0);
  const double fn = f.norm();
  if (fn > 0.0) {
    const double kp = params_.kappa * params_.p;
    h.block<9, 9>(0, 0) +=
        kp * std::pow(fn, params_.p - 2.0) * Eigen::Matrix<double, 9, 9>::Identity() +
        kp * (params_.p - 2.0) * std::pow(fn, params_.p - 4.0) * f * f.transpose();
  }
  return h;
}

Mat3 EnergyModel::stress(const Xi& xi, const Mat3& f_tilde) const {
  const Eigen::Matrix<double, 9, 1> g =
      phi_jacobian(f_tilde).transpose() * grad(xi);
  return unflatten(g);
}

// ---------------------------------------------------------------------------

namespace {

void record(HypothesisReport& rep, double& worst, const char* name,
            double margin, const Xi& xi, double tol) {
  if (margin < worst) worst = margin;
  if (margin < -tol) {
    rep.passed = false;
    if (rep.violations.size() < 16)
      rep.violations.push_back({name, margin, xi});
  }
}

}  // namespace

HypothesisReport check_hypotheses(const EnergyModel& model, int sample_count,
                                  double radius, unsigned seed) {
  if (sample_count < 1)
    throw std::invalid_argument("sample_count must be >= 1");
  const EnergyParams& c = model.params();
  const double p = c.p;

  HypothesisReport rep;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const double fd_h = 1e-5;

  for (int s = 0; s < sample_count; ++s) {
    Xi xi;
    for (int a = 0; a < kXiDim; ++a) xi[a] = gauss(rng);
    double r = radius * std::pow(unif(rng), 1.0 / kXiDim);
    if (s % 5 == 4) r *= 1.0 + 9.0 * unif(rng);  // heavy tail
    xi *= r / xi.norm();

    const double G = model.eval(xi);
    const Xi g = model.grad(xi);
    const double Fp = std::pow(xi.segment<9>(0).norm(), p);
    const double Z2 = xi.segment<9>(9).squaredNorm();
    const double w2 = xi[18] * xi[18];
    const double bulk = Fp + Z2 + w2 + 1.0;

    // (H1) via finite differences of the gradient.
    Hess19 hfd;
    for (int a = 0; a < kXiDim; ++a) {
      Xi e = Xi::Zero();
      e[a] = fd_h * std::max(1.0, xi.norm());
      hfd.col(a) = (model.grad(xi + e) - model.grad(xi - e)) / (2.0 * e[a]);
    }
    hfd = 0.5 * (hfd + hfd.transpose()).eval();
    const double h1_tol = 1e-4 * std::max(1.0, hfd.norm());
    {
      // R block: eigenvalues of the (Z,w) block must lie in [gamma_lo, gamma_hi].
      Eigen::Matrix<double, 10, 10> rblk = hfd.block<10, 10>(9, 9);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 10, 10>> es(rblk);
      const double lo = es.eigenvalues().minCoeff();
      const double hi = es.eigenvalues().maxCoeff();
      record(rep, rep.h1_margin, "H1", lo - c.gamma_lo, xi, h1_tol);
      record(rep, rep.h1_margin, "H1", c.gamma_hi - hi, xi, h1_tol);
      // (H1) demands strictly convex R with a positive floor.
      record(rep, rep.h1_margin, "H1", lo, xi, h1_tol);
      // H block: z^T D2H z in [kappa_lo, kappa_hi] * |F|^{p-2} |z|^2.
      Eigen::Matrix<double, 9, 9> hblk =
          hfd.block<9, 9>(0, 0) -
          c.gamma * Eigen::Matrix<double, 9, 9>::Identity();
      const double fpm2 = std::pow(xi.segment<9>(0).norm(), p - 2.0);
      for (int t = 0; t < 4; ++t) {
        Eigen::Matrix<double, 9, 1> z;
        for (int a = 0; a < 9; ++a) z[a] = gauss(rng);
        z.normalize();
        const double q = z.dot(hblk * z);
        record(rep, rep.h1_margin, "H1", q - c.kappa_lo * fpm2, xi, h1_tol);
        record(rep, rep.h1_margin, "H1", c.kappa_hi * fpm2 - q, xi, h1_tol);
      }
    }

    // (H2)-(H4): direct growth bounds.
    record(rep, rep.h2_margin, "H2",
           G - (c.c1 * Fp + c.c2 * Z2 + c.c3 * w2 - c.c4), xi, 1e-9 * bulk);
    record(rep, rep.h3_margin, "H3", c.c5 * bulk - G, xi, 1e-9 * bulk);
    const double h4_lhs = std::pow(g.segment<9>(0).norm(), p / (p - 1.0)) +
                          std::pow(g.segment<9>(9).norm(), p / (p - 2.0)) +
                          std::pow(std::abs(g[18]), p / (p - 3.0));
    record(rep, rep.h4_margin, "H4", c.c6 * bulk - h4_lhs, xi, 1e-9 * bulk);

    // (H5): third derivatives by finite-differencing the Hessian along a
    // few random directions (checked on a subset of samples).
    if (s % 25 == 0) {
      const double fnorm = xi.segment<9>(0).norm();
      const double h5_scale = c.c7 * std::pow(fnorm, p - 3.0);
      for (int t = 0; t < 3; ++t) {
        Xi dir = Xi::Zero();
        const bool f_dir = t < 2;
        for (int a = f_dir ? 0 : 9; a < (f_dir ? 9 : kXiDim); ++a)
          dir[a] = gauss(rng);
        dir.normalize();
        const double step = fd_h * std::max(1.0, fnorm);
        Hess19 d3 = (model.hess(xi + step * dir) - model.hess(xi - step * dir)) /
                    (2.0 * step);
        if (f_dir) {
          const double m = d3.block<9, 9>(0, 0).cwiseAbs().maxCoeff();
          record(rep, rep.h5_margin, "H5", h5_scale - m, xi,
                 1e-3 * std::max(1.0, h5_scale));
        } else {
          const double m = d3.block<10, 10>(9, 9).cwiseAbs().maxCoeff();
          record(rep, rep.h5_margin, "H5", c.c8 - m, xi, 1e-6);
        }
      }
    }

    rep.samples = s + 1;
  }
  return rep;
}

}  // namespace polyelast
