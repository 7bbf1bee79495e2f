#pragma once

#include <optional>

#include "starisac/channels.hpp"
#include "starisac/scenario.hpp"
#include "starisac/solvers/qcqp.hpp"
#include "starisac/state.hpp"
#include "starisac/types.hpp"

namespace starisac {

// ---------------------------------------------------------------------------
// radar receive filter
// ---------------------------------------------------------------------------

struct RadarFilterResult {
  CVec u;
  bool degenerate = false;  ///< the echo through W vanished; u defaults to the target direction
};

RadarFilterResult solve_radar_filter(const CMat& W, const CVec& h_dt, Real sigma_z_sq);

// ---------------------------------------------------------------------------
// DFBS transmit beamforming
// ---------------------------------------------------------------------------

/// Data of the stacked transmit subproblem in w = vec(W) (column-major).
/// The objective is w^H (Q_r + Q_t) w - 2 Re{(alpha_r + alpha_t)^H w}; the
/// radar floor uses the first-order expansion of w^H Y w at w_s.
struct TransmitProblemData {
  CVec alpha_r, alpha_t;  ///< stacked linear terms (zero-padded per side)
  CMat block_r, block_t;  ///< per-beam quadratic blocks (M x M); Q = I kron block
  CMat radar_block;       ///< per-beam block of Y
  Real eta = 0;           ///< radar floor threshold
  CMat ris_block;         ///< per-beam block of Xi_r + Xi_t
  Real ris_rhs = 0;       ///< RIS power budget minus the static noise draw
  bool include_ris_constraint = true;
  CVec w_s;               ///< expansion point
  Real p_max_bs = 0;
  int M = 0, beams = 0;

  CMat stacked_quad() const;        ///< Q_r + Q_t materialized
  CMat stacked_radar_quad() const;  ///< Y materialized
  CMat stacked_ris_quad() const;    ///< Xi_r + Xi_t materialized
};

TransmitProblemData assemble_transmit_problem(const BeamformingState& state,
                                              const StarState& star, const ChannelSet& ch,
                                              const ScenarioConfig& cfg, const CVec& w_s);

struct TransmitResult {
  CMat W;
  bool sca_infeasible = false;  ///< linearized radar floor unreachable; W is the fallback
  KktReport kkt;
};

TransmitResult solve_transmit_beamforming(const TransmitProblemData& data);

CVec stack_beams(const CMat& W);
CMat unstack_beams(const CVec& w, int M, int beams);

// ---------------------------------------------------------------------------
// STAR-RIS beamforming
// ---------------------------------------------------------------------------

/// x^H quad x - 2 Re{x^H lin}: the negated x-dependent part of the FP
/// objective for one side's coefficient vector, under the modulation
/// described in assemble_star_quadratic.
struct StarQuadraticData {
  CMat quad;
  CVec lin;
};

/// Builds the quadratic data for the variable x in
/// h_k^H = h_{d,k}^H + sum_n x_n c_{k,n} G(n,:), where c_k is the per-user
/// modulation of side `side` (conj(f_k) itself for the joint coefficient
/// problem, additionally phase- or amplitude-weighted for the split stages).
StarQuadraticData assemble_star_quadratic(Side side, const std::vector<CVec>& modulation,
                                          const BeamformingState& state, const ChannelSet& ch,
                                          const ScenarioConfig& cfg);

/// Per-element amplified power coefficients: pi_n = sum_j |(G w_j)_n|^2 + sigma_v^2.
RVec star_power_diagonal(const CMat& W, const CMat& G, Real sigma_v_sq);

struct StarUpdateResult {
  StarState star;
  bool degenerate = false;
  KktReport kkt;
};

StarUpdateResult solve_star_ued(const BeamformingState& state, const StarState& prev,
                                const ChannelSet& ch, const ScenarioConfig& cfg);

StarUpdateResult solve_star_eed(const BeamformingState& state, const StarState& prev,
                                const ChannelSet& ch, const ScenarioConfig& cfg);

StarUpdateResult solve_star_sd(const BeamformingState& state, const StarState& prev,
                               const ChannelSet& ch, const ScenarioConfig& cfg,
                               const std::vector<Side>& mask);

/// Energy-splitting passive baseline: joint coefficient optimization under
/// per-element |psi_r|^2 + |psi_t|^2 <= 1 caps, no amplification noise.
StarUpdateResult solve_star_passive(const BeamformingState& state, const StarState& prev,
                                    const ChannelSet& ch, const ScenarioConfig& cfg);

/// Dispatch on cfg.mode.
StarUpdateResult solve_star_block(const BeamformingState& state, const StarState& prev,
                                  const ChannelSet& ch, const ScenarioConfig& cfg);

}  // namespace starisac
