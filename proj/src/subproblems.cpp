#include "starisac/subproblems.hpp"

#include "starisac/solvers/rayleigh.hpp"
#include "starisac/solvers/unit_modulus.hpp"

#include <cmath>
#include <stdexcept>

namespace starisac {

namespace {

constexpr Real kQcqpTol = 1e-11;

QcqpOptions subproblem_options() {
  QcqpOptions opts;
  opts.tol = kQcqpTol;
  opts.check_psd = false;  // PSD by construction; covered by the assembly tests
  return opts;
}

Real quad_lin_value(const CMat& quad, const CVec& lin, const CVec& x) {
  return std::real(x.dot(quad * x)) - 2.0 * std::real(lin.dot(x));
}

}  // namespace

// ---------------------------------------------------------------------------
// radar receive filter
// ---------------------------------------------------------------------------

RadarFilterResult solve_radar_filter(const CMat& W, const CVec& h_dt, Real sigma_z_sq) {
  Real h_norm = h_dt.norm();
  if (!(h_norm > 0)) throw std::invalid_argument("solve_radar_filter: zero target channel");
  const auto M = h_dt.size();

  RadarFilterResult res;
  Real beam_gain = (W.adjoint() * h_dt).squaredNorm();
  if (beam_gain <= 0) {
    res.u = h_dt / h_norm;
    res.degenerate = true;
    return res;
  }
  CMat C = beam_gain * (h_dt * h_dt.adjoint());
  CMat E = sigma_z_sq * CMat::Identity(M, M);
  res.u = max_generalized_rayleigh(C, E);
  return res;
}

// ---------------------------------------------------------------------------
// DFBS transmit beamforming
// ---------------------------------------------------------------------------

CVec stack_beams(const CMat& W) {
  return Eigen::Map<const CVec>(W.data(), W.size());
}

CMat unstack_beams(const CVec& w, int M, int beams) {
  if (w.size() != static_cast<Eigen::Index>(M) * beams)
    throw std::invalid_argument("unstack_beams: length mismatch");
  return Eigen::Map<const CMat>(w.data(), M, beams);
}

namespace {

CMat kron_identity(const CMat& block, int copies) {
  const auto m = block.rows();
  CMat out = CMat::Zero(m * copies, m * copies);
  for (int j = 0; j < copies; ++j) out.block(j * m, j * m, m, m) = block;
  return out;
}

}  // namespace

CMat TransmitProblemData::stacked_quad() const { return kron_identity(block_r + block_t, beams); }
CMat TransmitProblemData::stacked_radar_quad() const { return kron_identity(radar_block, beams); }
CMat TransmitProblemData::stacked_ris_quad() const { return kron_identity(ris_block, beams); }

TransmitProblemData assemble_transmit_problem(const BeamformingState& state,
                                              const StarState& star, const ChannelSet& ch,
                                              const ScenarioConfig& cfg, const CVec& w_s) {
  const int M = cfg.M;
  const int K = ch.users();
  const int beams = K + M;
  if (w_s.size() != static_cast<Eigen::Index>(M) * beams)
    throw std::invalid_argument("assemble_transmit_problem: expansion point length");

  TransmitProblemData data;
  data.M = M;
  data.beams = beams;
  data.w_s = w_s;
  data.p_max_bs = cfg.p_max_bs;

  data.block_r = CMat::Zero(M, M);
  data.block_t = CMat::Zero(M, M);
  data.alpha_r = CVec::Zero(static_cast<Eigen::Index>(M) * beams);
  data.alpha_t = CVec::Zero(static_cast<Eigen::Index>(M) * beams);
  for (int k = 0; k < K; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    Side side = ch.user_side[uk];
    CVec h = equivalent_channel(ch.h_d[uk], ch.f[uk], star.psi(side), ch.G);
    Real w_rho = std::norm(state.rho[k]);
    CVec alpha_k = std::sqrt(1.0 + state.gamma[k]) * state.rho[k] * h;
    if (side == Side::Reflect) {
      data.block_r.noalias() += w_rho * (h * h.adjoint());
      data.alpha_r.segment(static_cast<Eigen::Index>(k) * M, M) = alpha_k;
    } else {
      data.block_t.noalias() += w_rho * (h * h.adjoint());
      data.alpha_t.segment(static_cast<Eigen::Index>(k) * M, M) = alpha_k;
    }
  }

  Real coupling = std::norm(state.u.dot(ch.h_dt));
  data.radar_block = coupling * (ch.h_dt * ch.h_dt.adjoint());
  data.eta = cfg.gamma_t * cfg.sigma_z_sq * state.u.squaredNorm() / cfg.xi_sq;

  RVec amp_sq = star.amp_r.cwiseAbs2() + star.amp_t.cwiseAbs2();
  data.ris_block = ch.G.adjoint() * amp_sq.cast<Complex>().asDiagonal() * ch.G;
  data.ris_rhs =
      cfg.p_max_ris - cfg.sigma_v_sq * (star.amp_r.squaredNorm() + star.amp_t.squaredNorm());
  data.include_ris_constraint = cfg.mode != StarMode::Passive;
  return data;
}

namespace {

/// Re{a^H x} for the linearized radar floor, with a = 2 Y w_s applied
/// blockwise.
CVec radar_linear_coefficient(const TransmitProblemData& d) {
  CVec a(d.w_s.size());
  for (int j = 0; j < d.beams; ++j)
    a.segment(static_cast<Eigen::Index>(j) * d.M, d.M) =
        2.0 * d.radar_block * d.w_s.segment(static_cast<Eigen::Index>(j) * d.M, d.M);
  return a;
}

}  // namespace

TransmitResult solve_transmit_beamforming(const TransmitProblemData& data) {
  TransmitResult res;
  res.W = unstack_beams(data.w_s, data.M, data.beams);  // fallback value

  if (data.include_ris_constraint && !(data.ris_rhs > 0)) {
    res.sca_infeasible = true;
    return res;
  }

  QcqpProblem prob;
  prob.objective.Q = data.stacked_quad();
  prob.objective.b = data.alpha_r + data.alpha_t;
  prob.ball_constraints.push_back(data.p_max_bs);
  if (data.include_ris_constraint)
    prob.quad_constraints.push_back({QuadraticForm{data.stacked_ris_quad(), CVec()}, data.ris_rhs});

  CVec a = radar_linear_coefficient(data);
  Real radar_at_ws = 0.5 * std::real(a.dot(data.w_s));  // w_s^H Y w_s
  Real c_lin = data.eta + radar_at_ws;
  Real a_norm = a.norm();
  bool have_radar_floor = true;
  if (a_norm == 0) {
    if (c_lin > 0) {  // unreachable floor
      res.sca_infeasible = true;
      return res;
    }
    have_radar_floor = false;
  }
  if (have_radar_floor)
    prob.linear_constraints.push_back({a, c_lin, Sense::Ge});

  auto strictly_feasible = [&](const CVec& x) {
    if (!(x.squaredNorm() < data.p_max_bs)) return false;
    if (data.include_ris_constraint &&
        !(prob.quad_constraints[0].first.eval(x) < data.ris_rhs))
      return false;
    if (have_radar_floor && !(std::real(a.dot(x)) > c_lin)) return false;
    return true;
  };

  CVec start;
  bool have_start = false;
  for (Real c : {0.995, 0.97, 0.9}) {
    CVec cand = c * data.w_s;
    if (strictly_feasible(cand)) {
      start = cand;
      have_start = true;
      break;
    }
  }
  if (!have_start) {
    // push toward the radar floor from the origin, then check reachability
    QcqpProblem phase1;
    phase1.objective.Q = CMat::Zero(data.w_s.size(), data.w_s.size());
    phase1.objective.b = 0.5 * a;
    phase1.ball_constraints = prob.ball_constraints;
    phase1.quad_constraints = prob.quad_constraints;
    QcqpResult p1 = solve_qcqp(phase1, CVec::Zero(data.w_s.size()), subproblem_options());
    Real reach = std::real(a.dot(p1.x));
    if (!(reach > c_lin + 1e-10 * std::max(1.0, std::abs(c_lin)))) {
      res.sca_infeasible = true;
      return res;
    }
    start = p1.x;
    if (!strictly_feasible(start)) {
      res.sca_infeasible = true;
      return res;
    }
  }

  QcqpResult sol = solve_qcqp(prob, start, subproblem_options());
  res.kkt = sol.report;

  // keep the expansion point whenever it is feasible and not improved upon
  Real obj_sol = prob.objective.eval(sol.x);
  bool ws_feasible =
      data.w_s.squaredNorm() <= data.p_max_bs * (1 + 1e-12) &&
      (!data.include_ris_constraint ||
       prob.quad_constraints[0].first.eval(data.w_s) <= data.ris_rhs * (1 + 1e-12)) &&
      (!have_radar_floor ||
       radar_at_ws >= data.eta - 1e-12 * std::max(1.0, std::abs(data.eta)));
  if (ws_feasible && prob.objective.eval(data.w_s) < obj_sol) {
    res.W = unstack_beams(data.w_s, data.M, data.beams);
    return res;
  }
  res.W = unstack_beams(sol.x, data.M, data.beams);
  return res;
}

// ---------------------------------------------------------------------------
// STAR-RIS beamforming
// ---------------------------------------------------------------------------

RVec star_power_diagonal(const CMat& W, const CMat& G, Real sigma_v_sq) {
  const CMat V = G * W;
  return V.cwiseAbs2().rowwise().sum().array() + sigma_v_sq;
}

StarQuadraticData assemble_star_quadratic(Side side, const std::vector<CVec>& modulation,
                                          const BeamformingState& state, const ChannelSet& ch,
                                          const ScenarioConfig& cfg) {
  const auto N = ch.G.rows();
  const int K = ch.users();
  if (static_cast<int>(modulation.size()) != K)
    throw std::invalid_argument("assemble_star_quadratic: modulation per user required");

  const CMat V = ch.G * state.W;               // N x (K+M)
  const CMat Bc = (V * V.adjoint()).conjugate();

  StarQuadraticData out;
  out.quad = CMat::Zero(N, N);
  out.lin = CVec::Zero(N);
  for (int k = 0; k < K; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    if (ch.user_side[uk] != side) continue;
    const CVec& c = modulation[uk];
    Real w_rho = std::norm(state.rho[k]);

    out.lin += std::sqrt(1.0 + state.gamma[k]) * state.rho[k] *
               c.cwiseProduct(V.col(k)).conjugate();
    CVec direct = V * (state.W.adjoint() * ch.h_d[uk]);
    out.lin -= w_rho * c.conjugate().cwiseProduct(direct.conjugate());

    out.quad += w_rho * Bc.cwiseProduct(c.conjugate() * c.transpose());
    out.quad.diagonal() += (w_rho * cfg.sigma_v_sq) * c.cwiseAbs2().cast<Complex>();
  }
  return out;
}

namespace {

std::vector<CVec> conj_f_modulation(const ChannelSet& ch) {
  std::vector<CVec> mod;
  mod.reserve(ch.f.size());
  for (const CVec& f : ch.f) mod.push_back(f.conjugate());
  return mod;
}

std::vector<CVec> scaled_modulation(const ChannelSet& ch, const CVec& factor_r,
                                    const CVec& factor_t) {
  std::vector<CVec> mod;
  mod.reserve(ch.f.size());
  for (std::size_t k = 0; k < ch.f.size(); ++k) {
    const CVec& factor = ch.user_side[k] == Side::Reflect ? factor_r : factor_t;
    mod.push_back(ch.f[k].conjugate().cwiseProduct(factor));
  }
  return mod;
}

/// Joint [psi_r; psi_t] coefficient problem shared by the UED and passive
/// modes; only the constraints differ.
struct JointStarProblem {
  StarQuadraticData reflect, transmit;
  CMat quad;  // stacked 2N x 2N
  CVec lin;   // stacked 2N
};

JointStarProblem joint_star_problem(const BeamformingState& state, const ChannelSet& ch,
                                    const ScenarioConfig& cfg) {
  const auto N = ch.G.rows();
  auto mod = conj_f_modulation(ch);
  JointStarProblem jp;
  jp.reflect = assemble_star_quadratic(Side::Reflect, mod, state, ch, cfg);
  jp.transmit = assemble_star_quadratic(Side::Transmit, mod, state, ch, cfg);
  jp.quad = CMat::Zero(2 * N, 2 * N);
  jp.quad.topLeftCorner(N, N) = jp.reflect.quad;
  jp.quad.bottomRightCorner(N, N) = jp.transmit.quad;
  jp.lin.resize(2 * N);
  jp.lin << jp.reflect.lin, jp.transmit.lin;
  return jp;
}

StarState star_from_stacked(const CVec& x) {
  const auto N = x.size() / 2;
  return StarState::from_psi(x.head(N), x.tail(N));
}

}  // namespace

StarUpdateResult solve_star_ued(const BeamformingState& state, const StarState& prev,
                                const ChannelSet& ch, const ScenarioConfig& cfg) {
  const auto N = ch.G.rows();
  JointStarProblem jp = joint_star_problem(state, ch, cfg);
  RVec pi = star_power_diagonal(state.W, ch.G, cfg.sigma_v_sq);

  QcqpProblem prob;
  prob.objective.Q = jp.quad;
  prob.objective.b = jp.lin;
  RVec pi_stacked(2 * N);
  pi_stacked << pi, pi;
  prob.diag_quad_constraints.push_back({pi_stacked, cfg.p_max_ris});

  CVec x_prev(2 * N);
  x_prev << prev.psi_r(), prev.psi_t();
  Real used = pi_stacked.dot(x_prev.cwiseAbs2());
  Real shrink = 0.99 * std::min(1.0, std::sqrt(cfg.p_max_ris / std::max(used, 1e-300)));
  CVec x0 = shrink * x_prev;

  QcqpResult sol = solve_qcqp(prob, x0, subproblem_options());
  StarUpdateResult res;
  res.kkt = sol.report;
  CVec x_best = quad_lin_value(jp.quad, jp.lin, sol.x) <= quad_lin_value(jp.quad, jp.lin, x_prev)
                    ? sol.x
                    : x_prev;
  res.star = star_from_stacked(x_best);
  return res;
}

StarUpdateResult solve_star_passive(const BeamformingState& state, const StarState& prev,
                                    const ChannelSet& ch, const ScenarioConfig& cfg) {
  const auto N = ch.G.rows();
  JointStarProblem jp = joint_star_problem(state, ch, cfg);

  QcqpProblem prob;
  prob.objective.Q = jp.quad;
  prob.objective.b = jp.lin;
  for (Eigen::Index n = 0; n < N; ++n) {
    RVec sel = RVec::Zero(2 * N);
    sel[n] = 1.0;
    sel[N + n] = 1.0;
    prob.diag_quad_constraints.push_back({sel, 1.0});
  }

  CVec x_prev(2 * N);
  x_prev << prev.psi_r(), prev.psi_t();
  RVec split = x_prev.head(N).cwiseAbs2() + x_prev.tail(N).cwiseAbs2();
  Real worst = split.maxCoeff();
  Real shrink = 0.99 * std::min(1.0, 1.0 / std::sqrt(std::max(worst, 1e-300)));
  CVec x0 = shrink * x_prev;

  QcqpResult sol = solve_qcqp(prob, x0, subproblem_options());
  StarUpdateResult res;
  res.kkt = sol.report;
  CVec x_best = quad_lin_value(jp.quad, jp.lin, sol.x) <= quad_lin_value(jp.quad, jp.lin, x_prev)
                    ? sol.x
                    : x_prev;
  res.star = star_from_stacked(x_best);
  return res;
}

namespace {

UnitModulusResult run_phase_stage(const CMat& omega, const CVec& mu, const CVec& phi0,
                                  const ScenarioConfig& cfg) {
  UnitModulusOptions opts;
  opts.tol = 1e-9;
  opts.iter_cap = 300;
  if (cfg.um_solver == UnitModulusMethod::Mm) return minimize_unit_modulus_mm(omega, mu, phi0, opts);
  return minimize_unit_modulus_ccm(omega, mu, phi0, opts);
}

/// Shared EED/SD machinery. `mask_r`/`mask_t` are 0/1 weights per element
/// (all ones for EED, complementary for SD); `power_factor` is 2 for EED
/// (both sides replicate a) and 1 for SD (each element feeds one side).
StarUpdateResult solve_star_common_amplitude(const BeamformingState& state, const StarState& prev,
                                             const ChannelSet& ch, const ScenarioConfig& cfg,
                                             const RVec& mask_r, const RVec& mask_t,
                                             bool freeze_amplitudes) {
  const auto N = ch.G.rows();
  RVec pi = star_power_diagonal(state.W, ch.G, cfg.sigma_v_sq);
  // each element consumes a_n^2 pi_n once per side it feeds
  RVec pi_masked = pi.cwiseProduct(mask_r + mask_t);

  StarUpdateResult res;
  RVec amp;
  if (freeze_amplitudes) {
    Real total = pi_masked.sum();
    Real cap = total > 0 ? std::sqrt(cfg.p_max_ris / total) : 1.0;
    amp = RVec::Constant(N, std::min(1.0, cap));
  } else {
    auto mod = scaled_modulation(ch, prev.phase_r.cwiseProduct(mask_r.cast<Complex>()),
                                 prev.phase_t.cwiseProduct(mask_t.cast<Complex>()));
    StarQuadraticData qr = assemble_star_quadratic(Side::Reflect, mod, state, ch, cfg);
    StarQuadraticData qt = assemble_star_quadratic(Side::Transmit, mod, state, ch, cfg);
    CMat omega_c = qr.quad + qt.quad;
    RVec mu = (qr.lin + qt.lin).real();
    RMat omega = omega_c.real();
    omega = 0.5 * (omega + omega.transpose()).eval();

    RealQcqp rp;
    rp.P0 = 2.0 * omega;
    rp.q0 = -2.0 * mu;
    RealQcqp::Constraint power;
    power.pd = 2.0 * pi_masked;
    power.r = -cfg.p_max_ris;
    rp.cons.push_back(std::move(power));
    for (Eigen::Index n = 0; n < N; ++n) {
      RealQcqp::Constraint nonneg;
      nonneg.q = RVec::Zero(N);
      nonneg.q[n] = -1.0;
      nonneg.r = 0.0;
      rp.cons.push_back(std::move(nonneg));
    }

    // strictly interior start: positive entries, strictly inside the budget
    RVec a_prev = prev.amp_r.cwiseMax(prev.amp_t);
    Real floor = 1e-8 * std::sqrt(cfg.p_max_ris / std::max(pi_masked.sum(), 1e-300));
    RVec a0 = (0.99 * a_prev).cwiseMax(floor);
    Real used = pi_masked.dot(a0.cwiseAbs2());
    if (used >= cfg.p_max_ris)
      a0 *= 0.99 * std::sqrt(cfg.p_max_ris / used);

    RealQcqpResult sol = solve_qcqp_real(rp, a0, subproblem_options());
    res.kkt = sol.report;
    amp = rp.objective(sol.x) <= rp.objective(a_prev) ? sol.x : a_prev;
    amp = amp.cwiseMax(0.0);
  }

  StarState next = prev;
  next.amp_r = amp.cwiseProduct(mask_r);
  next.amp_t = amp.cwiseProduct(mask_t);

  // phase stages, one pass per side
  auto mod_r = scaled_modulation(ch, next.amp_r.cast<Complex>(), next.amp_t.cast<Complex>());
  StarQuadraticData pr = assemble_star_quadratic(Side::Reflect, mod_r, state, ch, cfg);
  UnitModulusResult phase_r = run_phase_stage(pr.quad, pr.lin, prev.phase_r, cfg);
  next.phase_r = phase_r.phi;
  StarQuadraticData pt = assemble_star_quadratic(Side::Transmit, mod_r, state, ch, cfg);
  UnitModulusResult phase_t = run_phase_stage(pt.quad, pt.lin, prev.phase_t, cfg);
  next.phase_t = phase_t.phi;

  res.star = std::move(next);
  return res;
}

}  // namespace

StarUpdateResult solve_star_eed(const BeamformingState& state, const StarState& prev,
                                const ChannelSet& ch, const ScenarioConfig& cfg) {
  const auto N = ch.G.rows();
  return solve_star_common_amplitude(state, prev, ch, cfg, RVec::Ones(N), RVec::Ones(N), false);
}

StarUpdateResult solve_star_sd(const BeamformingState& state, const StarState& prev,
                               const ChannelSet& ch, const ScenarioConfig& cfg,
                               const std::vector<Side>& mask) {
  const auto N = ch.G.rows();
  if (static_cast<Eigen::Index>(mask.size()) != N)
    throw std::invalid_argument("solve_star_sd: mask length");
  RVec mask_r = RVec::Zero(N), mask_t = RVec::Zero(N);
  for (Eigen::Index n = 0; n < N; ++n)
    (mask[static_cast<std::size_t>(n)] == Side::Reflect ? mask_r : mask_t)[n] = 1.0;

  bool users_r = false, users_t = false;
  for (Side s : ch.user_side) (s == Side::Reflect ? users_r : users_t) = true;
  StarUpdateResult res = solve_star_common_amplitude(state, prev, ch, cfg, mask_r, mask_t,
                                                     cfg.sd_freeze_amplitudes);
  if ((users_r && mask_r.sum() == 0) || (users_t && mask_t.sum() == 0)) res.degenerate = true;
  return res;
}

StarUpdateResult solve_star_block(const BeamformingState& state, const StarState& prev,
                                  const ChannelSet& ch, const ScenarioConfig& cfg) {
  switch (cfg.mode) {
    case StarMode::Ued: return solve_star_ued(state, prev, ch, cfg);
    case StarMode::Eed: return solve_star_eed(state, prev, ch, cfg);
    case StarMode::Sd: return solve_star_sd(state, prev, ch, cfg, cfg.sd_mask);
    case StarMode::Passive: return solve_star_passive(state, prev, ch, cfg);
  }
  throw std::logic_error("solve_star_block: unknown mode");
}

}  // namespace starisac
