#include "starisac/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace starisac {

Real user_sinr(int k, const CMat& W, const StarState& star, const ChannelSet& ch,
               Real sigma_k_sq, Real sigma_v_sq) {
  if (k < 0 || k >= ch.users()) throw std::out_of_range("user_sinr: user index");
  const auto uk = static_cast<std::size_t>(k);
  const CVec psi = star.psi(ch.user_side[uk]);
  const CVec h = equivalent_channel(ch.h_d[uk], ch.f[uk], psi, ch.G);

  const CVec gains = W.adjoint() * h;  // entry j = conj(h^H w_j)
  const Real signal = std::norm(gains[k]);
  Real interference = gains.squaredNorm() - signal;
  Real ris_noise = sigma_v_sq * psi.conjugate().cwiseProduct(ch.f[uk]).squaredNorm();
  return signal / (interference + ris_noise + sigma_k_sq);
}

Real sum_rate(const CMat& W, const StarState& star, const ChannelSet& ch,
              const ScenarioConfig& cfg) {
  Real rate = 0;
  for (int k = 0; k < ch.users(); ++k)
    rate += std::log2(1.0 + user_sinr(k, W, star, ch, cfg.sigma_k_sq, cfg.sigma_v_sq));
  return rate;
}

Real radar_snr_worst(const CVec& u, const CMat& W, const CVec& h_dt, Real xi_sq,
                     Real sigma_z_sq) {
  Real u_sq = u.squaredNorm();
  if (!(u_sq > 0)) throw std::invalid_argument("radar_snr_worst: zero filter vector");
  // H_t = h_dt h_dt^H is rank one, so u^H H_t W W^H H_t^H u factors.
  Real coupling = std::norm(u.dot(h_dt));  // |u^H h_dt|^2
  Real beam_gain = (W.adjoint() * h_dt).squaredNorm();
  return xi_sq * coupling * beam_gain / (sigma_z_sq * u_sq);
}

Real ris_power(const CMat& W, const StarState& star, const CMat& G, Real sigma_v_sq) {
  const CMat V = G * W;  // N x (K+M)
  const RVec row_energy = V.cwiseAbs2().rowwise().sum();
  const RVec amp_r_sq = star.amp_r.cwiseAbs2();
  const RVec amp_t_sq = star.amp_t.cwiseAbs2();
  Real signal = amp_r_sq.dot(row_energy) + amp_t_sq.dot(row_energy);
  Real noise = sigma_v_sq * (amp_r_sq.sum() + amp_t_sq.sum());
  return signal + noise;
}

FeasibilityReport check_feasibility(const BeamformingState& state, const StarState& star,
                                    const ScenarioConfig& cfg, const ChannelSet& ch,
                                    Real tol) {
  const ScenarioConfig eff = cfg.effective();
  FeasibilityReport rep;

  Real snr = radar_snr_worst(state.u, state.W, ch.h_dt, eff.xi_sq, eff.sigma_z_sq);
  rep.radar_snr_slack = (snr - eff.gamma_t) / std::max(eff.gamma_t, 1.0);
  rep.bs_power_slack = (eff.p_max_bs - state.W.squaredNorm()) / eff.p_max_bs;

  if (cfg.mode == StarMode::Passive) {
    // energy-splitting surrogate: |psi_r|^2 + |psi_t|^2 <= 1 per element
    RVec split = star.amp_r.cwiseAbs2() + star.amp_t.cwiseAbs2();
    rep.ris_power_slack = 1.0 - split.maxCoeff();
  } else {
    Real used = ris_power(state.W, star, ch.G, eff.sigma_v_sq);
    rep.ris_power_slack = (eff.p_max_ris - used) / eff.p_max_ris;
  }

  rep.amp_min = std::min(star.amp_r.minCoeff(), star.amp_t.minCoeff());
  rep.phase_deviation = std::max((star.phase_r.cwiseAbs() - RVec::Ones(star.phase_r.size())).cwiseAbs().maxCoeff(),
                                 (star.phase_t.cwiseAbs() - RVec::Ones(star.phase_t.size())).cwiseAbs().maxCoeff());

  Real amp_scale = std::max({1.0, star.amp_r.maxCoeff(), star.amp_t.maxCoeff()});
  rep.feasible = rep.radar_snr_slack >= -tol && rep.bs_power_slack >= -tol &&
                 rep.ris_power_slack >= -tol && rep.amp_min >= -tol * amp_scale &&
                 rep.phase_deviation <= 1e-10 + tol;
  return rep;
}

}  // namespace starisac
