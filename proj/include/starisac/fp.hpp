#pragma once

#include "starisac/channels.hpp"
#include "starisac/scenario.hpp"
#include "starisac/state.hpp"
#include "starisac/types.hpp"

namespace starisac {

/// Per-user decomposition of the quadratic-transform surrogate. The
/// surrogate works in natural log; conversion to bits happens in reporting.
struct FpObjectiveParts {
  RVec constant;   ///< log(1 + gamma_k) - gamma_k
  RVec linear;     ///< 2 sqrt(1+gamma_k) Re{rho_k^* h_k^H w_k}
  RVec quadratic;  ///< |rho_k|^2 (sum_j |h_k^H w_j|^2 + RIS noise + user noise)

  Real total() const { return constant.sum() + linear.sum() - quadratic.sum(); }
};

FpObjectiveParts fp_objective_parts(const RVec& gamma, const CVec& rho, const CMat& W,
                                    const StarState& star, const ChannelSet& ch,
                                    const ScenarioConfig& cfg);

Real fp_objective(const RVec& gamma, const CVec& rho, const CMat& W, const StarState& star,
                  const ChannelSet& ch, const ScenarioConfig& cfg);

/// Closed-form optimal SINR auxiliaries (gamma_k equals the user's SINR).
RVec update_gamma(const CMat& W, const StarState& star, const ChannelSet& ch,
                  const ScenarioConfig& cfg);

/// Closed-form optimal quadratic-transform auxiliaries; the denominator sums
/// over all beams including the user's own.
CVec update_rho(const RVec& gamma, const CMat& W, const StarState& star, const ChannelSet& ch,
                const ScenarioConfig& cfg);

}  // namespace starisac
