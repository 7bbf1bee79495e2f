#include "starisac/channels.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace starisac {

namespace {

constexpr Real kMinDistance = 1e-9;

Complex draw_cn01(Rng& rng) {
  // unit-variance circularly-symmetric complex Gaussian
  std::normal_distribution<Real> n(0.0, std::numbers::sqrt2_v<Real> / 2.0);
  return {n(rng), n(rng)};
}

Vec3 unit_or_default(const Vec3& v) {
  Real norm = v.norm();
  if (norm < kMinDistance) return Vec3(1.0, 0.0, 0.0);
  return v / norm;
}

}  // namespace

Real pathloss_linear(Real distance_m) {
  if (!(distance_m > 0)) throw std::invalid_argument("pathloss_linear: distance must be positive");
  Real pl_db = 37.3 + 22.0 * std::log10(distance_m);
  return std::pow(10.0, -pl_db / 10.0);
}

CVec steering_vector(int n_elements, Real cos_axis) {
  if (n_elements < 1) throw std::invalid_argument("steering_vector: need at least one element");
  CVec a(n_elements);
  for (int m = 0; m < n_elements; ++m)
    a[m] = std::polar(1.0, std::numbers::pi_v<Real> * static_cast<Real>(m) * cos_axis);
  return a;
}

CMat los_component(int rows, int cols, const Vec3& dir) {
  CVec rx = steering_vector(rows, dir.x());
  CVec tx = steering_vector(cols, dir.x());
  return rx * tx.adjoint();
}

CMat rician_channel(const CMat& h_los, Real kappa, Real pl_linear, Rng& rng) {
  if (h_los.rows() < 1 || h_los.cols() < 1)
    throw std::invalid_argument("rician_channel: invalid dimensions");
  if (kappa < 0) throw std::invalid_argument("rician_channel: kappa must be >= 0");
  if (!(pl_linear > 0)) throw std::invalid_argument("rician_channel: pathloss must be positive");
  CMat h(h_los.rows(), h_los.cols());
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    for (Eigen::Index j = 0; j < h.cols(); ++j) h(i, j) = draw_cn01(rng);
  Real w_los = std::sqrt(kappa / (kappa + 1.0));
  Real w_nlos = std::sqrt(1.0 / (kappa + 1.0));
  return std::sqrt(pl_linear) * (w_los * h_los + w_nlos * h);
}

Positions draw_positions(const ScenarioConfig& cfg, Rng& rng) {
  std::uniform_real_distribution<Real> unif(0.0, 1.0);
  Positions pos;
  pos.users.reserve(static_cast<std::size_t>(cfg.users_total()));

  // Reflect side faces the DFBS; users live in the half-disc around the RIS
  // on their own side of it.
  Vec3 toward_bs = unit_or_default(cfg.bs_pos - cfg.ris_pos);
  Vec3 perp(-toward_bs.y(), toward_bs.x(), 0.0);

  auto draw_user = [&](Side side) {
    Real r = cfg.user_region_radius * std::sqrt(unif(rng));
    Real theta = (unif(rng) - 0.5) * std::numbers::pi_v<Real>;  // within the half-plane
    Vec3 axis = (side == Side::Reflect) ? toward_bs : Vec3(-toward_bs);
    return Vec3(cfg.ris_pos + r * (std::cos(theta) * axis + std::sin(theta) * perp));
  };
  for (int k = 0; k < cfg.K_r; ++k) pos.users.push_back(draw_user(Side::Reflect));
  for (int k = 0; k < cfg.K_t; ++k) pos.users.push_back(draw_user(Side::Transmit));

  Real r = cfg.target_region_radius * std::sqrt(unif(rng));
  Real theta = unif(rng) * 2.0 * std::numbers::pi_v<Real>;
  pos.target = cfg.bs_pos + r * Vec3(std::cos(theta), std::sin(theta), 0.0);
  return pos;
}

ChannelSet generate_channel_set(const ScenarioConfig& cfg, Rng& rng) {
  Positions pos = draw_positions(cfg, rng);
  return generate_channel_set(cfg, pos, rng);
}

ChannelSet generate_channel_set(const ScenarioConfig& cfg, const Positions& pos, Rng& rng) {
  if (static_cast<int>(pos.users.size()) != cfg.users_total())
    throw std::invalid_argument("generate_channel_set: position count mismatch");
  ChannelSet cs;
  const int K = cfg.users_total();

  auto link = [&](const Vec3& from, const Vec3& to, int rows, int cols) {
    Real d = std::max((to - from).norm(), kMinDistance);
    Vec3 dir = unit_or_default(to - from);
    return rician_channel(los_component(rows, cols, dir), cfg.kappa, pathloss_linear(d), rng);
  };

  cs.G = link(cfg.bs_pos, cfg.ris_pos, cfg.N, cfg.M);
  cs.f.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k)
    cs.f.push_back(link(cfg.ris_pos, pos.users[static_cast<std::size_t>(k)], cfg.N, 1).col(0));
  cs.h_d.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k)
    cs.h_d.push_back(link(cfg.bs_pos, pos.users[static_cast<std::size_t>(k)], cfg.M, 1).col(0));
  cs.h_dt = link(cfg.bs_pos, pos.target, cfg.M, 1).col(0);

  cs.user_side.assign(static_cast<std::size_t>(cfg.K_r), Side::Reflect);
  cs.user_side.insert(cs.user_side.end(), static_cast<std::size_t>(cfg.K_t), Side::Transmit);
  return cs;
}

namespace {

void write_cvec(std::ostream& out, const CVec& v) {
  char buf[64];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g", v[i].real(), v[i].imag());
    out << buf << (i + 1 == v.size() ? "" : " ");
  }
  out << "\n";
}

CVec read_cvec(std::istream& in, Eigen::Index n) {
  CVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Real re, im;
    if (!(in >> re >> im)) throw std::runtime_error("channel dump: truncated data");
    v[i] = Complex(re, im);
  }
  return v;
}

}  // namespace

void dump_channel_set(std::ostream& out, const ChannelSet& cs) {
  int K_r = 0;
  for (Side s : cs.user_side)
    if (s == Side::Reflect) ++K_r;
  out << "starisac-channels 1\n";
  out << "M " << cs.G.cols() << " N " << cs.G.rows() << " K_r " << K_r << " K_t "
      << cs.users() - K_r << "\n";
  for (Eigen::Index i = 0; i < cs.G.rows(); ++i) write_cvec(out, cs.G.row(i).transpose());
  for (const CVec& f : cs.f) write_cvec(out, f);
  for (const CVec& h : cs.h_d) write_cvec(out, h);
  write_cvec(out, cs.h_dt);
}

ChannelSet load_channel_set(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "starisac-channels" || version != 1)
    throw std::runtime_error("channel dump: bad header");
  std::string tag;
  Eigen::Index M, N;
  int K_r, K_t;
  if (!(in >> tag >> M) || tag != "M") throw std::runtime_error("channel dump: bad header");
  if (!(in >> tag >> N) || tag != "N") throw std::runtime_error("channel dump: bad header");
  if (!(in >> tag >> K_r) || tag != "K_r") throw std::runtime_error("channel dump: bad header");
  if (!(in >> tag >> K_t) || tag != "K_t") throw std::runtime_error("channel dump: bad header");
  if (M < 1 || N < 1 || K_r < 0 || K_t < 0) throw std::runtime_error("channel dump: bad dimensions");

  ChannelSet cs;
  cs.G.resize(N, M);
  for (Eigen::Index i = 0; i < N; ++i) cs.G.row(i) = read_cvec(in, M).transpose();
  const int K = K_r + K_t;
  for (int k = 0; k < K; ++k) cs.f.push_back(read_cvec(in, N));
  for (int k = 0; k < K; ++k) cs.h_d.push_back(read_cvec(in, M));
  cs.h_dt = read_cvec(in, M);
  cs.user_side.assign(static_cast<std::size_t>(K_r), Side::Reflect);
  cs.user_side.insert(cs.user_side.end(), static_cast<std::size_t>(K_t), Side::Transmit);
  return cs;
}

}  // namespace starisac
