#include "starisac/solvers/unit_modulus.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

namespace starisac {

namespace {

void require_valid(const CMat& omega, const CVec& mu, const CVec& phi0) {
  if (omega.rows() != omega.cols() || omega.rows() != mu.size() || mu.size() != phi0.size())
    throw std::invalid_argument("unit_modulus: dimension mismatch");
  Real scale = omega.cwiseAbs().maxCoeff();
  if (scale > 0) {
    CMat shifted = omega + Complex(1e-8 * scale, 0.0) * CMat::Identity(omega.rows(), omega.cols());
    Eigen::LLT<CMat> llt(shifted);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("unit_modulus: Omega is not positive semidefinite");
  }
  for (Eigen::Index n = 0; n < phi0.size(); ++n)
    if (std::abs(std::abs(phi0[n]) - 1.0) > 1e-8)
      throw std::invalid_argument("unit_modulus: start point is not unit-modulus");
}

CVec normalize_entrywise(const CVec& z, const CVec& fallback) {
  CVec out(z.size());
  for (Eigen::Index n = 0; n < z.size(); ++n) {
    Real mag = std::abs(z[n]);
    out[n] = mag > 0 ? z[n] / mag : fallback[n];
  }
  return out;
}

}  // namespace

Real unit_modulus_objective(const CMat& omega, const CVec& mu, const CVec& phi) {
  return std::real(phi.dot(omega * phi)) - 2.0 * std::real(mu.dot(phi));
}

Real lambda_max_power_iteration(const CMat& a, Real tol, int iter_cap) {
  if (a.rows() != a.cols()) throw std::invalid_argument("lambda_max: square matrix required");
  const auto n = a.rows();
  // deterministic start with a ramp so no symmetric instance pins the
  // iterate to an invariant subspace
  CVec v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = Complex(1.0 + 1e-3 * static_cast<Real>(i) / static_cast<Real>(n),
                   1e-4 * static_cast<Real>(i % 7));
  v.normalize();
  Real lambda = 0;
  for (int it = 0; it < iter_cap; ++it) {
    CVec w = a * v;
    Real norm = w.norm();
    if (norm == 0) return 0;
    v = w / norm;
    Real next = std::real(v.dot(a * v));
    if (std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) return next;
    lambda = next;
  }
  return lambda;
}

UnitModulusResult minimize_unit_modulus_mm(const CMat& omega, const CVec& mu, const CVec& phi0,
                                           const UnitModulusOptions& opts) {
  require_valid(omega, mu, phi0);
  // Inflate the spectral bound slightly so the surrogate stays an upper
  // bound under power-iteration error.
  Real lambda = opts.trace_bound ? std::real(omega.trace())
                                 : lambda_max_power_iteration(omega) * (1.0 + 1e-6);

  UnitModulusResult res;
  res.phi = phi0;
  res.objective = unit_modulus_objective(omega, mu, phi0);
  for (int it = 1; it <= opts.iter_cap; ++it) {
    CVec z = lambda * res.phi - omega * res.phi + mu;
    CVec phi_next = normalize_entrywise(z, res.phi);
    Real f_next = unit_modulus_objective(omega, mu, phi_next);
    if (f_next > res.objective) {  // numerically stalled
      res.converged = true;
      res.iterations = it;
      return res;
    }
    Real decrease = res.objective - f_next;
    res.phi = phi_next;
    res.objective = f_next;
    res.iterations = it;
    if (decrease <= opts.tol * std::max(1.0, std::abs(res.objective))) {
      res.converged = true;
      return res;
    }
  }
  return res;
}

UnitModulusResult minimize_unit_modulus_ccm(const CMat& omega, const CVec& mu, const CVec& phi0,
                                            const UnitModulusOptions& opts) {
  require_valid(omega, mu, phi0);
  const Real lipschitz = 2.0 * omega.cwiseAbs().rowwise().sum().maxCoeff() + 1e-300;

  UnitModulusResult res;
  res.phi = phi0;
  res.objective = unit_modulus_objective(omega, mu, phi0);
  Real step0 = 1.0 / lipschitz;

  for (int it = 1; it <= opts.iter_cap; ++it) {
    CVec grad = 2.0 * (omega * res.phi - mu);
    // project onto the tangent space of the torus
    CVec radial = grad.cwiseProduct(res.phi.conjugate()).real().cast<Complex>();
    CVec tangent = grad - radial.cwiseProduct(res.phi);
    Real tnorm_sq = tangent.squaredNorm();
    res.iterations = it;
    if (std::sqrt(tnorm_sq) < opts.tol * std::max(1.0, std::abs(res.objective))) {
      res.converged = true;
      return res;
    }

    Real step = step0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      CVec cand = normalize_entrywise(res.phi - step * tangent, res.phi);
      Real f_cand = unit_modulus_objective(omega, mu, cand);
      if (f_cand <= res.objective - 1e-4 * step * tnorm_sq) {
        res.phi = cand;
        res.objective = f_cand;
        step0 = std::min(2.0 * step, 1e6 / lipschitz);  // reuse a working scale
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {  // no descent direction at machine precision
      res.converged = true;
      return res;
    }
  }
  return res;
}

}  // namespace starisac
