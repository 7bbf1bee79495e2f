#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "starisac/channels.hpp"
#include "starisac/metrics.hpp"
#include "starisac/scenario.hpp"
#include "starisac/state.hpp"
#include "starisac/types.hpp"

namespace starisac {

struct AoIteration {
  int iter = 0;
  Real fp_after_gamma = 0;
  Real fp_after_rho = 0;
  Real fp_after_w = 0;
  Real fp_after_star = 0;
  Real sum_rate_bits = 0;
  Real radar_snr = 0;
  Real delta = 0;
  FeasibilityReport feas;
  bool w_fallback = false;
  bool star_degenerate = false;
  Real t_aux_ms = 0, t_u_ms = 0, t_w_ms = 0, t_star_ms = 0;
};

struct AoTrace {
  std::vector<AoIteration> iterations;
  bool converged = false;
  int iterations_used = 0;
  Real final_sum_rate = 0;
  Real final_radar_snr = 0;
  std::vector<Real> delta_history;
  BeamformingState state;
  StarState star;
};

/// Matched-filter beams at 90% of the DFBS budget, random phases with
/// amplitudes scaled to 90% of the RIS budget, matched radar filter.
std::pair<BeamformingState, StarState> initialize_ao(const ScenarioConfig& cfg,
                                                     const ChannelSet& ch, Rng& rng);

/// Runs the block-coordinate loop for the configured mode until the relative
/// sum-rate change drops below delta_th or q_max iterations elapse.
AoTrace run_ao(const ScenarioConfig& cfg, const ChannelSet& ch, Rng& rng);

void write_trace_csv(std::ostream& out, const AoTrace& trace);

}  // namespace starisac
