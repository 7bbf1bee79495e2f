#pragma once

#include <iosfwd>
#include <vector>

#include "starisac/scenario.hpp"
#include "starisac/types.hpp"

namespace starisac {

/// One realization of all propagation links.
struct ChannelSet {
  CMat G;                       ///< N x M, DFBS -> STAR-RIS
  std::vector<CVec> f;          ///< K vectors of length N, STAR-RIS -> user k
  std::vector<CVec> h_d;        ///< K vectors of length M, DFBS -> user k
  CVec h_dt;                    ///< length M, DFBS -> target
  std::vector<Side> user_side;  ///< K_r reflect tags then K_t transmit tags

  int users() const { return static_cast<int>(f.size()); }
};

/// Drawn locations for one Monte-Carlo trial (users ordered reflect-side
/// first, matching ChannelSet::user_side).
struct Positions {
  std::vector<Vec3> users;
  Vec3 target;
};

/// Linear power gain of the 37.3 + 22 log10(d) dB pathloss law.
Real pathloss_linear(Real distance_m);

/// Half-wavelength ULA steering vector; cos_axis is the cosine of the angle
/// between the propagation direction and the array axis.
CVec steering_vector(int n_elements, Real cos_axis);

/// LoS rank-one factor for a link whose endpoints see the unit direction
/// `dir` (arrays lie along the x axis at both ends).
CMat los_component(int rows, int cols, const Vec3& dir);

/// H = sqrt(pl) * (sqrt(k/(k+1)) H_los + sqrt(1/(k+1)) H_nlos), NLoS entries
/// i.i.d. circularly-symmetric complex Gaussian with unit variance.
CMat rician_channel(const CMat& h_los, Real kappa, Real pl_linear, Rng& rng);

Positions draw_positions(const ScenarioConfig& cfg, Rng& rng);

ChannelSet generate_channel_set(const ScenarioConfig& cfg, Rng& rng);
ChannelSet generate_channel_set(const ScenarioConfig& cfg, const Positions& pos, Rng& rng);

/// Equivalent DFBS->user channel h with h^H = h_d^H + f^H diag(psi) G.
template <class HD, class F, class Psi, class GMat>
CVec equivalent_channel(const Eigen::MatrixBase<HD>& h_d, const Eigen::MatrixBase<F>& f,
                        const Eigen::MatrixBase<Psi>& psi, const Eigen::MatrixBase<GMat>& G) {
  if (f.size() != psi.size() || G.rows() != f.size() || G.cols() != h_d.size())
    throw std::invalid_argument("equivalent_channel: dimension mismatch");
  return h_d + G.adjoint() * psi.conjugate().cwiseProduct(f.derived());
}

void dump_channel_set(std::ostream& out, const ChannelSet& cs);
ChannelSet load_channel_set(std::istream& in);

}  // namespace starisac
