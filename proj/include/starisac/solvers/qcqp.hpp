#pragma once

#include <utility>
#include <vector>

#include "starisac/types.hpp"

namespace starisac {

/// x -> x^H Q x - 2 Re{b^H x} with Q Hermitian PSD. An empty b means a pure
/// quadratic.
struct QuadraticForm {
  CMat Q;
  CVec b;
  Real eval(const CVec& x) const;
};

enum class Sense { Ge, Le };

/// Re{a^H x} (sense) c
struct LinearConstraint {
  CVec a;
  Real c;
  Sense sense;
};

/// Convex QCQP over complex vectors: minimize the objective form subject to
/// quadratic upper bounds, diagonal-quadratic upper bounds (sum d_n |x_n|^2
/// <= bound with d >= 0), halfspaces and norm balls. At least one bounded
/// constraint is required.
struct QcqpProblem {
  QuadraticForm objective;
  std::vector<std::pair<QuadraticForm, Real>> quad_constraints;
  std::vector<std::pair<RVec, Real>> diag_quad_constraints;
  std::vector<LinearConstraint> linear_constraints;
  std::vector<Real> ball_constraints;  ///< ||x||^2 <= r
};

struct KktReport {
  bool converged = false;
  int iterations = 0;
  Real duality_gap = 0;      ///< surrogate gap in (normalized) objective units
  Real stationarity = 0;     ///< inf-norm of the scaled dual residual
  Real complementarity = 0;  ///< max |lambda_i f_i|, scaled
  Real max_violation = 0;    ///< max normalized constraint value; <= 0 is feasible
  bool hit_iteration_cap = false;
};

struct QcqpResult {
  CVec x;
  RVec lambda;  ///< multipliers, ordered [quad..., diag..., linear..., ball...]
  KktReport report;
};

struct QcqpOptions {
  Real tol = 1e-10;
  int iteration_cap = 200;
  bool check_psd = true;
};

/// Real-coded core: minimize 1/2 x^T P0 x + q0^T x subject to
/// 1/2 x^T P x + q^T x + r <= 0 per constraint, where the quadratic part is
/// dense (P), diagonal (pd) or absent.
struct RealQcqp {
  RMat P0;
  RVec q0;
  struct Constraint {
    RMat P;   ///< dense quadratic, or empty
    RVec pd;  ///< diagonal quadratic, or empty
    RVec q;
    Real r = 0;
  };
  std::vector<Constraint> cons;

  Real objective(const RVec& x) const;
  Real constraint_value(std::size_t i, const RVec& x) const;
  RVec constraint_gradient(std::size_t i, const RVec& x) const;
};

struct RealQcqpResult {
  RVec x;
  RVec lambda;
  KktReport report;
};

/// Primal-dual interior-point solve from a strictly feasible x0. Throws on
/// an infeasible start or (when check_psd) a non-PSD quadratic; an iteration
/// cap is reported, not thrown.
RealQcqpResult solve_qcqp_real(const RealQcqp& prob, const RVec& x0, const QcqpOptions& opts = {});

QcqpResult solve_qcqp(const QcqpProblem& prob, const CVec& x0, const QcqpOptions& opts = {});

/// [[Re, -Im], [Im, Re]] embedding; symmetric whenever Q is Hermitian.
RMat complex_to_real_matrix(const CMat& Q);
RVec complex_to_real_vector(const CVec& v);
CVec real_to_complex_vector(const RVec& v);

}  // namespace starisac
