#include "starisac/ao.hpp"

#include "starisac/fp.hpp"
#include "starisac/subproblems.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

namespace starisac {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

CVec random_phases(int n, Rng& rng) {
  std::uniform_real_distribution<Real> unif(0.0, 2.0 * std::numbers::pi_v<Real>);
  CVec phi(n);
  for (int i = 0; i < n; ++i) phi[i] = std::polar(1.0, unif(rng));
  return phi;
}

}  // namespace

std::pair<BeamformingState, StarState> initialize_ao(const ScenarioConfig& cfg,
                                                     const ChannelSet& ch, Rng& rng) {
  const ScenarioConfig eff = cfg.effective();
  const int M = eff.M;
  const int K = ch.users();
  const int beams = K + M;

  StarState star;
  star.phase_r = random_phases(eff.N, rng);
  star.phase_t = random_phases(eff.N, rng);
  if (cfg.mode == StarMode::Sd) {
    star.amp_r = RVec::Zero(eff.N);
    star.amp_t = RVec::Zero(eff.N);
    for (int n = 0; n < eff.N; ++n)
      (cfg.sd_mask[static_cast<std::size_t>(n)] == Side::Reflect ? star.amp_r : star.amp_t)[n] = 1.0;
  } else {
    star.amp_r = RVec::Ones(eff.N);
    star.amp_t = RVec::Ones(eff.N);
  }

  // matched-filter user beams plus isotropic radar beams at 0.9 P_B
  BeamformingState state;
  state.W.resize(M, beams);
  Real per_beam = 0.9 * eff.p_max_bs / static_cast<Real>(beams);
  for (int k = 0; k < K; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    CVec h = equivalent_channel(ch.h_d[uk], ch.f[uk], star.psi(ch.user_side[uk]), ch.G);
    Real norm = h.norm();
    state.W.col(k) = norm > 0 ? CVec(std::sqrt(per_beam) * h / norm)
                              : CVec(std::sqrt(per_beam) * CVec::Unit(M, 0));
  }
  for (int i = 0; i < M; ++i) state.W.col(K + i) = std::sqrt(per_beam) * CVec::Unit(M, i);

  if (cfg.mode == StarMode::Passive) {
    // strict interior of the per-element energy split
    Real amp = std::sqrt(0.45);
    star.amp_r = amp * star.amp_r;
    star.amp_t = amp * star.amp_t;
  } else {
    Real used = ris_power(state.W, star, ch.G, eff.sigma_v_sq);
    Real scale = used > 0 ? std::sqrt(0.9 * eff.p_max_ris / used) : 1.0;
    star.amp_r *= scale;
    star.amp_t *= scale;
  }

  state.u = ch.h_dt.normalized();
  state.gamma = update_gamma(state.W, star, ch, eff);
  state.rho = update_rho(state.gamma, state.W, star, ch, eff);
  return {std::move(state), std::move(star)};
}

AoTrace run_ao(const ScenarioConfig& cfg, const ChannelSet& ch, Rng& rng) {
  const ScenarioConfig eff = cfg.effective();
  AoTrace trace;
  auto [state, star] = initialize_ao(cfg, ch, rng);

  Real r_sum = 0;
  for (int t = 1; t <= cfg.q_max; ++t) {
    AoIteration it;
    it.iter = t;
    Real r_pre = r_sum;

    auto t0 = Clock::now();
    CVec rho_old = state.rho;
    state.gamma = update_gamma(state.W, star, ch, eff);
    it.fp_after_gamma = fp_objective(state.gamma, rho_old, state.W, star, ch, eff);
    state.rho = update_rho(state.gamma, state.W, star, ch, eff);
    it.fp_after_rho = fp_objective(state.gamma, state.rho, state.W, star, ch, eff);
    it.t_aux_ms = ms_since(t0);

    t0 = Clock::now();
    RadarFilterResult filter = solve_radar_filter(state.W, ch.h_dt, eff.sigma_z_sq);
    state.u = filter.u;
    it.t_u_ms = ms_since(t0);

    t0 = Clock::now();
    TransmitProblemData tp =
        assemble_transmit_problem(state, star, ch, eff, stack_beams(state.W));
    TransmitResult tw = solve_transmit_beamforming(tp);
    state.W = tw.W;
    it.w_fallback = tw.sca_infeasible;
    it.fp_after_w = fp_objective(state.gamma, state.rho, state.W, star, ch, eff);
    it.t_w_ms = ms_since(t0);

    t0 = Clock::now();
    StarUpdateResult su = solve_star_block(state, star, ch, eff);
    star = su.star;
    it.star_degenerate = su.degenerate;
    it.fp_after_star = fp_objective(state.gamma, state.rho, state.W, star, ch, eff);
    it.t_star_ms = ms_since(t0);

    r_sum = sum_rate(state.W, star, ch, eff);
    it.sum_rate_bits = r_sum;
    it.radar_snr = radar_snr_worst(state.u, state.W, ch.h_dt, eff.xi_sq, eff.sigma_z_sq);
    it.delta = r_sum > 0 ? std::abs(r_pre - r_sum) / r_sum
                         : std::numeric_limits<Real>::infinity();
    it.feas = check_feasibility(state, star, cfg, ch);

    trace.iterations.push_back(it);
    trace.delta_history.push_back(it.delta);
    if (it.delta < cfg.delta_th) {
      trace.converged = true;
      break;
    }
  }

  trace.iterations_used = static_cast<int>(trace.iterations.size());
  trace.final_sum_rate = r_sum;
  trace.final_radar_snr = trace.iterations.back().radar_snr;
  trace.state = std::move(state);
  trace.star = std::move(star);
  return trace;
}

void write_trace_csv(std::ostream& out, const AoTrace& trace) {
  out << "iter,fp_after_gamma,fp_after_rho,fp_after_w,fp_after_star,sum_rate_bits,radar_snr,"
         "delta,radar_snr_slack,bs_power_slack,ris_power_slack,amp_min,phase_deviation,"
         "w_fallback,star_degenerate,t_aux_ms,t_u_ms,t_w_ms,t_star_ms\n";
  char buf[512];
  for (const AoIteration& it : trace.iterations) {
    std::snprintf(buf, sizeof(buf),
                  "%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,"
                  "%d,%d,%.12g,%.12g,%.12g,%.12g\n",
                  it.iter, it.fp_after_gamma, it.fp_after_rho, it.fp_after_w, it.fp_after_star,
                  it.sum_rate_bits, it.radar_snr, it.delta, it.feas.radar_snr_slack,
                  it.feas.bs_power_slack, it.feas.ris_power_slack, it.feas.amp_min,
                  it.feas.phase_deviation, it.w_fallback ? 1 : 0, it.star_degenerate ? 1 : 0,
                  it.t_aux_ms, it.t_u_ms, it.t_w_ms, it.t_star_ms);
    out << buf;
  }
}

}  // namespace starisac
