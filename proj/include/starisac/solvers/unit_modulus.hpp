#pragma once

#include "starisac/types.hpp"

namespace starisac {

/// Objective shared by both phase optimizers:
/// f(phi) = phi^H Omega phi - 2 Re{phi^H mu} over |phi_n| = 1.
Real unit_modulus_objective(const CMat& omega, const CVec& mu, const CVec& phi);

struct UnitModulusOptions {
  Real tol = 1e-10;      ///< MM: relative objective decrease; CCM: tangent gradient norm
  int iter_cap = 1000;
  bool trace_bound = false;  ///< MM only: use trace(Omega) instead of lambda_max
};

struct UnitModulusResult {
  CVec phi;
  Real objective = 0;
  int iterations = 0;
  bool converged = false;
};

/// Largest eigenvalue of a Hermitian PSD matrix by power iteration with a
/// deterministic start vector.
Real lambda_max_power_iteration(const CMat& a, Real tol = 1e-10, int iter_cap = 20000);

/// Majorize-minimize: each sweep sets phi_n to the phase of
/// ((lambda I - Omega) phi + mu)_n, which minimizes the tangent-matching
/// quadratic upper bound. Monotone nonincreasing objective.
UnitModulusResult minimize_unit_modulus_mm(const CMat& omega, const CVec& mu, const CVec& phi0,
                                           const UnitModulusOptions& opts = {});

/// Riemannian gradient descent on the product-of-circles manifold with
/// entrywise-normalization retraction and Armijo backtracking.
UnitModulusResult minimize_unit_modulus_ccm(const CMat& omega, const CVec& mu, const CVec& phi0,
                                            const UnitModulusOptions& opts = {});

}  // namespace starisac
