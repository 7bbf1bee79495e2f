#pragma once

#include <map>
#include <string>
#include <vector>

#include "starisac/types.hpp"

namespace starisac {

enum class StarMode { Ued, Eed, Sd, Passive };
enum class UnitModulusMethod { Mm, Ccm };

std::string to_string(StarMode mode);
StarMode star_mode_from_string(const std::string& s);

/// Full experiment configuration. Values that arrive in dB/dBm at the
/// interface are converted to linear units exactly once, in build_scenario;
/// the original interface values are kept so a config serializes back
/// bit-identically.
struct ScenarioConfig {
  // dimensions
  int M = 8;    ///< DFBS tx/rx antennas
  int N = 128;  ///< STAR-RIS elements
  int K_r = 2;  ///< reflect-side users
  int K_t = 2;  ///< transmit-side users

  // geometry, meters (all heights zero; distances are planar)
  Vec3 bs_pos{0.0, 0.0, 0.0};
  Vec3 ris_pos{0.0, 15.0, 0.0};
  Real user_region_radius = 10.0;
  Real target_region_radius = 5.0;

  // interface units (kept for exact serialization round-trips)
  Real total_power_dbm = 26.0;
  Real bs_power_fraction = 0.5;
  Real gamma_t_db = 0.0;
  Real sigma_k_dbm = -80.0;
  Real sigma_v_dbm = -80.0;
  Real sigma_z_dbm = -80.0;

  // linear units, derived once
  Real p_max_bs = 0.0;    ///< DFBS power budget, watts
  Real p_max_ris = 0.0;   ///< active STAR-RIS power budget, watts
  Real gamma_t = 1.0;     ///< radar SNR floor, linear
  Real sigma_k_sq = 0.0;  ///< user noise power, watts
  Real sigma_v_sq = 0.0;  ///< STAR-RIS dynamic noise power, watts
  Real sigma_z_sq = 0.0;  ///< radar receiver noise power, watts

  Real xi_sq = 1.0;  ///< RCS second moment
  Real kappa = 1.0;  ///< Rician factor

  StarMode mode = StarMode::Ued;
  std::vector<Side> sd_mask;  ///< per-element side assignment (SD mode)
  bool sd_freeze_amplitudes = false;
  UnitModulusMethod um_solver = UnitModulusMethod::Mm;

  int q_max = 100;
  Real delta_th = 1e-3;
  std::uint64_t seed = 1;

  int users_total() const { return K_r + K_t; }
  int beams_total() const { return K_r + K_t + M; }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// Copy adjusted for the mode actually being optimized. For the passive
  /// baseline: no dynamic noise, full power budget at the DFBS, RIS power
  /// budget replaced by the per-element energy-splitting cap.
  ScenarioConfig effective() const;

  bool operator==(const ScenarioConfig&) const = default;
};

using KeyValueDoc = std::map<std::string, std::string>;

/// Parses "key = value" lines; '#' starts a comment. Throws on malformed
/// lines or duplicate keys.
KeyValueDoc parse_key_value_text(const std::string& text);

/// Builds and validates a config from a parsed document. Unknown keys are
/// an error; absent keys take the defaults above.
ScenarioConfig build_scenario(const KeyValueDoc& doc);

ScenarioConfig load_scenario_file(const std::string& path);

/// Emits the flat key-value document; build_scenario of the result compares
/// equal to the input.
std::string serialize_scenario(const ScenarioConfig& cfg);

}  // namespace starisac
