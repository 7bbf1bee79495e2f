#pragma once

#include "starisac/types.hpp"

namespace starisac {

/// STAR-RIS operating state: nonnegative equivalent amplitudes and
/// unit-modulus phase factors per element, for both half-spaces.
struct StarState {
  RVec amp_r;    ///< a_r >= 0
  RVec amp_t;    ///< a_t >= 0
  CVec phase_r;  ///< |phase_r[n]| = 1
  CVec phase_t;  ///< |phase_t[n]| = 1

  CVec psi_r() const { return amp_r.cast<Complex>().cwiseProduct(phase_r); }
  CVec psi_t() const { return amp_t.cast<Complex>().cwiseProduct(phase_t); }
  CVec psi(Side side) const { return side == Side::Reflect ? psi_r() : psi_t(); }

  static StarState zeros(int n) {
    StarState s;
    s.amp_r = RVec::Zero(n);
    s.amp_t = RVec::Zero(n);
    s.phase_r = CVec::Ones(n);
    s.phase_t = CVec::Ones(n);
    return s;
  }

  /// Polar split of the stacked coefficient vectors: amp = |psi|,
  /// phase = exp(j arg psi); zero entries keep a unit phase.
  static StarState from_psi(const CVec& psi_r, const CVec& psi_t);
};

/// DFBS-side optimization state: transmit matrix, radar receive filter and
/// the fractional-programming auxiliaries.
struct BeamformingState {
  CMat W;      ///< M x (K + M), user beams first, then radar beams
  CVec u;      ///< radar receive filter, length M
  RVec gamma;  ///< SINR auxiliaries, length K, >= 0
  CVec rho;    ///< quadratic-transform auxiliaries, length K
};

inline StarState StarState::from_psi(const CVec& pr, const CVec& pt) {
  StarState s;
  auto split = [](const CVec& p, RVec& amp, CVec& phase) {
    amp = p.cwiseAbs();
    phase.resize(p.size());
    for (Eigen::Index n = 0; n < p.size(); ++n)
      phase[n] = amp[n] > 0 ? p[n] / amp[n] : Complex(1.0, 0.0);
  };
  split(pr, s.amp_r, s.phase_r);
  split(pt, s.amp_t, s.phase_t);
  return s;
}

}  // namespace starisac
