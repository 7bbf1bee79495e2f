#include "starisac/solvers/qcqp.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace starisac {

Real QuadraticForm::eval(const CVec& x) const {
  Real value = std::real(x.dot(Q * x));
  if (b.size() > 0) value -= 2.0 * std::real(b.dot(x));
  return value;
}

Real RealQcqp::objective(const RVec& x) const { return 0.5 * x.dot(P0 * x) + q0.dot(x); }

Real RealQcqp::constraint_value(std::size_t i, const RVec& x) const {
  const Constraint& c = cons[i];
  Real v = c.r;
  if (c.q.size()) v += c.q.dot(x);
  if (c.P.size()) v += 0.5 * x.dot(c.P * x);
  if (c.pd.size()) v += 0.5 * c.pd.dot(x.cwiseAbs2());
  return v;
}

RVec RealQcqp::constraint_gradient(std::size_t i, const RVec& x) const {
  const Constraint& c = cons[i];
  RVec g = c.q.size() ? c.q : RVec(RVec::Zero(x.size()));
  if (c.P.size()) g.noalias() += c.P * x;
  if (c.pd.size()) g += c.pd.cwiseProduct(x);
  return g;
}

namespace {

constexpr Real kMu = 10.0;     // surrogate-gap reduction factor
constexpr Real kAlpha = 0.01;  // accepted residual decrease fraction
constexpr Real kBeta = 0.5;    // backtracking factor

void check_psd_or_throw(const RMat& P, const char* what) {
  if (P.size() == 0) return;
  Real scale = P.cwiseAbs().maxCoeff();
  if (scale == 0) return;
  RMat shifted = P + 1e-8 * scale * RMat::Identity(P.rows(), P.cols());
  Eigen::LLT<RMat> llt(shifted);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument(std::string("solve_qcqp: ") + what +
                                " is not positive semidefinite");
}

struct Scaled {
  RealQcqp prob;
  Real x_scale = 1;  // x = x_scale * y
  Real f0_scale = 1;
  std::vector<Real> f_scale;
};

Scaled scale_problem(const RealQcqp& in, const RVec& x0) {
  const auto n = in.q0.size();
  const std::size_t m = in.cons.size();

  Real sx = 0;
  for (const auto& c : in.cons) {
    if (!(c.r < 0)) continue;
    Real tr = c.P.size() ? c.P.trace() : (c.pd.size() ? c.pd.sum() : 0.0);
    if (tr > 0) sx = std::max(sx, std::sqrt(-2.0 * c.r / (tr / static_cast<Real>(n))));
  }
  sx = std::max(sx, x0.norm());
  if (!(sx > 0)) sx = 1.0;

  Scaled s;
  s.x_scale = sx;
  s.prob.P0 = in.P0 * (sx * sx);
  s.prob.q0 = in.q0 * sx;
  Real s0 = std::max(s.prob.P0.size() ? s.prob.P0.cwiseAbs().maxCoeff() : 0.0,
                     s.prob.q0.size() ? s.prob.q0.cwiseAbs().maxCoeff() : 0.0);
  if (!(s0 > 0)) s0 = 1.0;
  s.f0_scale = s0;
  s.prob.P0 /= s0;
  s.prob.q0 /= s0;

  s.prob.cons.resize(m);
  s.f_scale.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    RealQcqp::Constraint c;
    c.P = in.cons[i].P.size() ? RMat(in.cons[i].P * (sx * sx)) : RMat();
    c.pd = in.cons[i].pd.size() ? RVec(in.cons[i].pd * (sx * sx)) : RVec();
    c.q = in.cons[i].q.size() ? RVec(in.cons[i].q * sx) : RVec();
    c.r = in.cons[i].r;
    Real si = std::max({std::abs(c.r), c.P.size() ? c.P.cwiseAbs().maxCoeff() : 0.0,
                        c.pd.size() ? c.pd.cwiseAbs().maxCoeff() : 0.0,
                        c.q.size() ? c.q.cwiseAbs().maxCoeff() : 0.0});
    if (!(si > 0)) si = 1.0;
    s.f_scale[i] = si;
    if (c.P.size()) c.P /= si;
    if (c.pd.size()) c.pd /= si;
    if (c.q.size()) c.q /= si;
    c.r /= si;
    s.prob.cons[i] = std::move(c);
  }
  return s;
}

}  // namespace

RealQcqpResult solve_qcqp_real(const RealQcqp& prob, const RVec& x0, const QcqpOptions& opts) {
  const auto n = x0.size();
  const std::size_t m = prob.cons.size();
  if (m == 0) throw std::invalid_argument("solve_qcqp: at least one constraint is required");
  if (prob.P0.rows() != n || prob.q0.size() != n)
    throw std::invalid_argument("solve_qcqp: dimension mismatch");

  if (opts.check_psd) {
    check_psd_or_throw(prob.P0, "objective");
    for (const auto& c : prob.cons) {
      check_psd_or_throw(c.P, "constraint quadratic");
      if (c.pd.size() && c.pd.minCoeff() < 0)
        throw std::invalid_argument("solve_qcqp: constraint quadratic is not positive semidefinite");
    }
  }

  Scaled sc = scale_problem(prob, x0);
  const RealQcqp& p = sc.prob;
  const auto mi = static_cast<Eigen::Index>(m);

  RVec y = x0 / sc.x_scale;
  RVec f(mi), lambda(mi);
  auto eval_all = [&](const RVec& yy, RVec& ff) {
    for (std::size_t i = 0; i < m; ++i)
      ff[static_cast<Eigen::Index>(i)] = p.constraint_value(i, yy);
  };
  eval_all(y, f);
  for (Eigen::Index i = 0; i < mi; ++i)
    if (!(f[i] < 0))
      throw std::invalid_argument("solve_qcqp: start point is not strictly feasible");
  for (Eigen::Index i = 0; i < mi; ++i) lambda[i] = std::clamp(-1.0 / f[i], 1e-8, 1e8);

  KktReport rep;
  std::vector<RVec> grad(m);
  RVec grad0(n), r_dual(n);
  const Real tol_dual = opts.tol * 10.0;
  const Real tol_gap = opts.tol * static_cast<Real>(m);

  int iter = 0;
  for (; iter < opts.iteration_cap; ++iter) {
    grad0 = p.P0 * y + p.q0;
    for (std::size_t i = 0; i < m; ++i) grad[i] = p.constraint_gradient(i, y);
    r_dual = grad0;
    for (std::size_t i = 0; i < m; ++i) r_dual += lambda[static_cast<Eigen::Index>(i)] * grad[i];
    Real gap = -f.dot(lambda);

    if (r_dual.lpNorm<Eigen::Infinity>() <= tol_dual && gap <= tol_gap) {
      rep.converged = true;
      break;
    }

    Real t = kMu * static_cast<Real>(m) / gap;

    RMat H = p.P0;
    for (std::size_t i = 0; i < m; ++i) {
      Real li = lambda[static_cast<Eigen::Index>(i)];
      Real fi = f[static_cast<Eigen::Index>(i)];
      const auto& c = p.cons[i];
      if (c.P.size()) H += li * c.P;
      if (c.pd.size()) H.diagonal() += li * c.pd;
      H.noalias() += (li / (-fi)) * grad[i] * grad[i].transpose();
    }
    RVec rhs = -grad0;
    for (std::size_t i = 0; i < m; ++i)
      rhs += (1.0 / (t * f[static_cast<Eigen::Index>(i)])) * grad[i];

    RVec dy;
    Real ridge = 0;
    for (;;) {
      Eigen::LDLT<RMat> ldlt(H + ridge * RMat::Identity(n, n));
      dy = ldlt.solve(rhs);
      if (ldlt.info() == Eigen::Success && dy.allFinite()) break;
      ridge = (ridge == 0) ? 1e-12 : ridge * 100;
      if (ridge > 1e2) throw std::runtime_error("solve_qcqp: Newton system is singular");
    }

    RVec dlambda(mi);
    for (Eigen::Index i = 0; i < mi; ++i)
      dlambda[i] = -(lambda[i] / f[i]) * grad[static_cast<std::size_t>(i)].dot(dy) - lambda[i] -
                   1.0 / (t * f[i]);

    Real smax = 1.0;
    for (Eigen::Index i = 0; i < mi; ++i)
      if (dlambda[i] < 0) smax = std::min(smax, -lambda[i] / dlambda[i]);
    Real s = 0.99 * smax;

    auto residual_norm = [&](const RVec& yy, const RVec& ll, const RVec& ff) {
      RVec rd = p.P0 * yy + p.q0;
      Real rc_sq = 0;
      for (std::size_t i = 0; i < m; ++i) {
        rd += ll[static_cast<Eigen::Index>(i)] * p.constraint_gradient(i, yy);
        Real rc = -ll[static_cast<Eigen::Index>(i)] * ff[static_cast<Eigen::Index>(i)] - 1.0 / t;
        rc_sq += rc * rc;
      }
      return std::sqrt(rd.squaredNorm() + rc_sq);
    };
    Real rc0_sq = 0;
    for (Eigen::Index i = 0; i < mi; ++i) {
      Real rc = -lambda[i] * f[i] - 1.0 / t;
      rc0_sq += rc * rc;
    }
    Real res_now = std::sqrt(r_dual.squaredNorm() + rc0_sq);

    RVec y_new(n), f_new(mi), lambda_new(mi);
    bool stepped = false;
    for (int bt = 0; bt < 60; ++bt) {
      y_new = y + s * dy;
      lambda_new = lambda + s * dlambda;
      eval_all(y_new, f_new);
      bool strictly_feasible = (f_new.array() < 0).all();
      if (strictly_feasible &&
          residual_norm(y_new, lambda_new, f_new) <= (1.0 - kAlpha * s) * res_now) {
        stepped = true;
        break;
      }
      s *= kBeta;
    }
    if (!stepped) break;  // stalled at numerical precision
    y = y_new;
    lambda = lambda_new;
    f = f_new;
  }
  rep.iterations = iter;
  rep.hit_iteration_cap = iter >= opts.iteration_cap;

  r_dual = p.P0 * y + p.q0;
  Real comp = 0;
  for (std::size_t i = 0; i < m; ++i) {
    r_dual += lambda[static_cast<Eigen::Index>(i)] * p.constraint_gradient(i, y);
    comp = std::max(comp, std::abs(lambda[static_cast<Eigen::Index>(i)] *
                                   f[static_cast<Eigen::Index>(i)]));
  }
  rep.duality_gap = -f.dot(lambda);
  rep.stationarity = r_dual.lpNorm<Eigen::Infinity>();
  rep.complementarity = comp;
  rep.max_violation = f.maxCoeff();

  RealQcqpResult out;
  out.x = sc.x_scale * y;
  if (prob.objective(out.x) > prob.objective(x0)) out.x = x0;  // never worse than the start
  out.lambda.resize(mi);
  for (Eigen::Index i = 0; i < mi; ++i)
    out.lambda[i] = lambda[i] * sc.f0_scale / sc.f_scale[static_cast<std::size_t>(i)];
  out.report = rep;
  return out;
}

RMat complex_to_real_matrix(const CMat& Q) {
  const auto n = Q.rows();
  RMat out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = Q.real();
  out.topRightCorner(n, n) = -Q.imag();
  out.bottomLeftCorner(n, n) = Q.imag();
  out.bottomRightCorner(n, n) = Q.real();
  return out;
}

RVec complex_to_real_vector(const CVec& v) {
  RVec out(2 * v.size());
  out.head(v.size()) = v.real();
  out.tail(v.size()) = v.imag();
  return out;
}

CVec real_to_complex_vector(const RVec& v) {
  const auto n = v.size() / 2;
  CVec out(n);
  out.real() = v.head(n);
  out.imag() = v.tail(n);
  return out;
}

QcqpResult solve_qcqp(const QcqpProblem& prob, const CVec& x0, const QcqpOptions& opts) {
  const auto n = x0.size();
  RealQcqp rp;
  rp.P0 = 2.0 * complex_to_real_matrix(prob.objective.Q);
  rp.q0 = prob.objective.b.size() ? RVec(-2.0 * complex_to_real_vector(prob.objective.b))
                                  : RVec(RVec::Zero(2 * n));

  for (const auto& [form, bound] : prob.quad_constraints) {
    RealQcqp::Constraint c;
    c.P = 2.0 * complex_to_real_matrix(form.Q);
    if (form.b.size()) c.q = -2.0 * complex_to_real_vector(form.b);
    c.r = -bound;
    rp.cons.push_back(std::move(c));
  }
  for (const auto& [d, bound] : prob.diag_quad_constraints) {
    RealQcqp::Constraint c;
    c.pd.resize(2 * n);
    c.pd << 2.0 * d, 2.0 * d;
    c.r = -bound;
    rp.cons.push_back(std::move(c));
  }
  for (const auto& lc : prob.linear_constraints) {
    RealQcqp::Constraint c;
    RVec a = complex_to_real_vector(lc.a);
    if (lc.sense == Sense::Ge) {
      c.q = -a;
      c.r = lc.c;
    } else {
      c.q = a;
      c.r = -lc.c;
    }
    rp.cons.push_back(std::move(c));
  }
  for (Real radius : prob.ball_constraints) {
    RealQcqp::Constraint c;
    c.pd = 2.0 * RVec::Ones(2 * n);
    c.r = -radius;
    rp.cons.push_back(std::move(c));
  }

  RealQcqpResult real_res = solve_qcqp_real(rp, complex_to_real_vector(x0), opts);
  QcqpResult res;
  res.x = real_to_complex_vector(real_res.x);
  res.lambda = std::move(real_res.lambda);
  res.report = real_res.report;
  return res;
}

}  // namespace starisac
