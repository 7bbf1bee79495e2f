#include "starisac/fp.hpp"

#include <cmath>
#include <stdexcept>

namespace starisac {

namespace {

struct UserTerms {
  Complex own_gain;  // h_k^H w_k
  Real total_power;  // sum_j |h_k^H w_j|^2 + sigma_v^2 ||f_k^H Psi||^2 + sigma_k^2
};

UserTerms user_terms(int k, const CMat& W, const StarState& star, const ChannelSet& ch,
                     const ScenarioConfig& cfg) {
  const auto uk = static_cast<std::size_t>(k);
  const CVec psi = star.psi(ch.user_side[uk]);
  const CVec h = equivalent_channel(ch.h_d[uk], ch.f[uk], psi, ch.G);
  const CVec gains = W.adjoint() * h;  // entry j = conj(h^H w_j)
  UserTerms t;
  t.own_gain = std::conj(gains[k]);
  t.total_power = gains.squaredNorm() +
                  cfg.sigma_v_sq * psi.conjugate().cwiseProduct(ch.f[uk]).squaredNorm() +
                  cfg.sigma_k_sq;
  return t;
}

}  // namespace

FpObjectiveParts fp_objective_parts(const RVec& gamma, const CVec& rho, const CMat& W,
                                    const StarState& star, const ChannelSet& ch,
                                    const ScenarioConfig& cfg) {
  const int K = ch.users();
  if (gamma.size() != K || rho.size() != K)
    throw std::invalid_argument("fp_objective: auxiliary length mismatch");
  FpObjectiveParts parts;
  parts.constant.resize(K);
  parts.linear.resize(K);
  parts.quadratic.resize(K);
  for (int k = 0; k < K; ++k) {
    if (gamma[k] < 0) throw std::invalid_argument("fp_objective: gamma must be >= 0");
    UserTerms t = user_terms(k, W, star, ch, cfg);
    parts.constant[k] = std::log1p(gamma[k]) - gamma[k];
    parts.linear[k] = 2.0 * std::sqrt(1.0 + gamma[k]) * std::real(std::conj(rho[k]) * t.own_gain);
    parts.quadratic[k] = std::norm(rho[k]) * t.total_power;
  }
  return parts;
}

Real fp_objective(const RVec& gamma, const CVec& rho, const CMat& W, const StarState& star,
                  const ChannelSet& ch, const ScenarioConfig& cfg) {
  return fp_objective_parts(gamma, rho, W, star, ch, cfg).total();
}

RVec update_gamma(const CMat& W, const StarState& star, const ChannelSet& ch,
                  const ScenarioConfig& cfg) {
  const int K = ch.users();
  RVec gamma(K);
  for (int k = 0; k < K; ++k) {
    UserTerms t = user_terms(k, W, star, ch, cfg);
    Real own = std::norm(t.own_gain);
    gamma[k] = own / (t.total_power - own);
  }
  return gamma;
}

CVec update_rho(const RVec& gamma, const CMat& W, const StarState& star, const ChannelSet& ch,
                const ScenarioConfig& cfg) {
  const int K = ch.users();
  if (gamma.size() != K) throw std::invalid_argument("update_rho: gamma length mismatch");
  CVec rho(K);
  for (int k = 0; k < K; ++k) {
    if (gamma[k] < 0) throw std::invalid_argument("update_rho: gamma must be >= 0");
    UserTerms t = user_terms(k, W, star, ch, cfg);
    rho[k] = std::sqrt(1.0 + gamma[k]) * t.own_gain / t.total_power;
  }
  return rho;
}

}  // namespace starisac
