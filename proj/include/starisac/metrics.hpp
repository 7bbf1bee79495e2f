#pragma once

#include "starisac/channels.hpp"
#include "starisac/scenario.hpp"
#include "starisac/state.hpp"
#include "starisac/types.hpp"

namespace starisac {

Real user_sinr(int k, const CMat& W, const StarState& star, const ChannelSet& ch,
               Real sigma_k_sq, Real sigma_v_sq);

/// Sum of log2(1 + SINR_k) over all users, bits/s/Hz.
Real sum_rate(const CMat& W, const StarState& star, const ChannelSet& ch,
              const ScenarioConfig& cfg);

/// Worst-case radar echo SNR for receive filter u (Rayleigh quotient of the
/// rank-one echo covariance against white noise).
Real radar_snr_worst(const CVec& u, const CMat& W, const CVec& h_dt, Real xi_sq,
                     Real sigma_z_sq);

/// Power consumed by the active STAR-RIS: amplified signal plus amplified
/// dynamic noise on both sides.
Real ris_power(const CMat& W, const StarState& star, const CMat& G, Real sigma_v_sq);

struct FeasibilityReport {
  Real radar_snr_slack = 0;   ///< (snr - gamma_t) / max(gamma_t, 1)
  Real bs_power_slack = 0;    ///< (P_B - ||W||_F^2) / P_B
  Real ris_power_slack = 0;   ///< active: (P_R - ris_power)/P_R; passive: per-element cap slack
  Real amp_min = 0;           ///< min over a_r, a_t entries
  Real phase_deviation = 0;   ///< max | |phase_n| - 1 |
  bool feasible = false;
};

/// Per-constraint slacks for the radar floor, both power budgets and the
/// STAR-RIS hardware constraints, at relative tolerance tol.
FeasibilityReport check_feasibility(const BeamformingState& state, const StarState& star,
                                    const ScenarioConfig& cfg, const ChannelSet& ch,
                                    Real tol = 1e-6);

}  // namespace starisac
