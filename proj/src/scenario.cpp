#include "starisac/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace starisac {

namespace {

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw std::invalid_argument("scenario: " + field + ": " + what);
}

Real parse_real(const std::string& field, const std::string& v) {
  try {
    std::size_t pos = 0;
    Real x = std::stod(v, &pos);
    if (pos != v.size()) fail(field, "trailing characters in '" + v + "'");
    return x;
  } catch (const std::invalid_argument&) {
    fail(field, "not a number: '" + v + "'");
  } catch (const std::out_of_range&) {
    fail(field, "out of range: '" + v + "'");
  }
}

int parse_int(const std::string& field, const std::string& v) {
  Real x = parse_real(field, v);
  auto i = static_cast<long long>(x);
  if (static_cast<Real>(i) != x) fail(field, "not an integer: '" + v + "'");
  return static_cast<int>(i);
}

bool parse_bool(const std::string& field, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(field, "expected true/false: '" + v + "'");
}

Vec3 parse_vec3(const std::string& field, const std::string& v) {
  Vec3 out;
  std::stringstream ss(v);
  std::string part;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(ss, part, ',')) fail(field, "expected three comma-separated values");
    out[i] = parse_real(field, trim(part));
  }
  if (std::getline(ss, part, ',')) fail(field, "expected exactly three values");
  return out;
}

std::vector<Side> parse_mask(const std::string& field, const std::string& v) {
  std::vector<Side> mask;
  mask.reserve(v.size());
  for (char c : v) {
    if (c == 'r')
      mask.push_back(Side::Reflect);
    else if (c == 't')
      mask.push_back(Side::Transmit);
    else
      fail(field, std::string("expected 'r'/'t' characters, got '") + c + "'");
  }
  return mask;
}

std::vector<Side> alternating_mask(int n) {
  std::vector<Side> mask(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) mask[static_cast<std::size_t>(i)] = (i % 2 == 0) ? Side::Reflect : Side::Transmit;
  return mask;
}

std::string format_real(Real x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

std::string to_string(StarMode mode) {
  switch (mode) {
    case StarMode::Ued: return "ued";
    case StarMode::Eed: return "eed";
    case StarMode::Sd: return "sd";
    case StarMode::Passive: return "passive";
  }
  return "?";
}

StarMode star_mode_from_string(const std::string& s) {
  if (s == "ued") return StarMode::Ued;
  if (s == "eed") return StarMode::Eed;
  if (s == "sd") return StarMode::Sd;
  if (s == "passive") return StarMode::Passive;
  fail("mode", "unknown mode '" + s + "'");
}

void ScenarioConfig::validate() const {
  if (M < 1) fail("M", "must be >= 1");
  if (N < 1) fail("N", "must be >= 1");
  if (K_r < 0) fail("K_r", "must be >= 0");
  if (K_t < 0) fail("K_t", "must be >= 0");
  if (K_r + K_t < 1) fail("K_r+K_t", "no users");
  if (!(p_max_bs > 0)) fail("p_max_bs", "must be positive");
  if (!(p_max_ris > 0)) fail("p_max_ris", "must be positive");
  if (!(sigma_k_sq > 0)) fail("sigma_k_sq", "must be positive");
  if (!(sigma_v_sq > 0)) fail("sigma_v_sq", "must be positive");
  if (!(sigma_z_sq > 0)) fail("sigma_z_sq", "must be positive");
  if (!(bs_power_fraction > 0) || !(bs_power_fraction < 1))
    fail("bs_power_fraction", "must be in (0, 1)");
  if (gamma_t < 0) fail("gamma_t", "must be >= 0");
  if (kappa < 0) fail("kappa", "must be >= 0");
  if (!(xi_sq > 0)) fail("xi_sq", "must be positive");
  if (!(user_region_radius > 0)) fail("user_region_radius", "must be positive");
  if (!(target_region_radius > 0)) fail("target_region_radius", "must be positive");
  if (q_max < 1) fail("q_max", "must be >= 1");
  if (!(delta_th >= 0)) fail("delta_th", "must be >= 0");
  if (mode == StarMode::Sd) {
    if (static_cast<int>(sd_mask.size()) != N) fail("sd_mask", "mask length must equal N");
    auto n_r = std::count(sd_mask.begin(), sd_mask.end(), Side::Reflect);
    auto n_t = static_cast<long>(sd_mask.size()) - n_r;
    if (K_r > 0 && n_r == 0) fail("sd_mask", "reflect users present but no reflect elements");
    if (K_t > 0 && n_t == 0) fail("sd_mask", "transmit users present but no transmit elements");
  }
}

ScenarioConfig ScenarioConfig::effective() const {
  ScenarioConfig eff = *this;
  if (mode == StarMode::Passive) {
    eff.sigma_v_sq = 0.0;
    eff.p_max_bs = p_max_bs + p_max_ris;  // whole budget transmitted by the DFBS
  }
  return eff;
}

KeyValueDoc parse_key_value_text(const std::string& text) {
  KeyValueDoc doc;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("scenario: line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("scenario: line " + std::to_string(lineno) + ": empty key");
    if (value.empty()) fail(key, "missing value");
    if (doc.count(key)) fail(key, "duplicate key");
    doc[key] = value;
  }
  return doc;
}

ScenarioConfig build_scenario(const KeyValueDoc& doc) {
  ScenarioConfig cfg;
  bool have_mask = false;
  for (const auto& [key, value] : doc) {
    if (key == "M") cfg.M = parse_int(key, value);
    else if (key == "N") cfg.N = parse_int(key, value);
    else if (key == "K_r") cfg.K_r = parse_int(key, value);
    else if (key == "K_t") cfg.K_t = parse_int(key, value);
    else if (key == "bs_pos") cfg.bs_pos = parse_vec3(key, value);
    else if (key == "ris_pos") cfg.ris_pos = parse_vec3(key, value);
    else if (key == "user_region_radius") cfg.user_region_radius = parse_real(key, value);
    else if (key == "target_region_radius") cfg.target_region_radius = parse_real(key, value);
    else if (key == "total_power_dbm") cfg.total_power_dbm = parse_real(key, value);
    else if (key == "bs_power_fraction") cfg.bs_power_fraction = parse_real(key, value);
    else if (key == "gamma_t_db") cfg.gamma_t_db = parse_real(key, value);
    else if (key == "sigma_k_dbm") cfg.sigma_k_dbm = parse_real(key, value);
    else if (key == "sigma_v_dbm") cfg.sigma_v_dbm = parse_real(key, value);
    else if (key == "sigma_z_dbm") cfg.sigma_z_dbm = parse_real(key, value);
    else if (key == "xi_sq") cfg.xi_sq = parse_real(key, value);
    else if (key == "kappa") cfg.kappa = parse_real(key, value);
    else if (key == "mode") cfg.mode = star_mode_from_string(value);
    else if (key == "sd_mask") { cfg.sd_mask = parse_mask(key, value); have_mask = true; }
    else if (key == "sd_freeze_amplitudes") cfg.sd_freeze_amplitudes = parse_bool(key, value);
    else if (key == "um_solver") {
      if (value == "mm") cfg.um_solver = UnitModulusMethod::Mm;
      else if (value == "ccm") cfg.um_solver = UnitModulusMethod::Ccm;
      else fail(key, "expected mm or ccm");
    }
    else if (key == "q_max") cfg.q_max = parse_int(key, value);
    else if (key == "delta_th") cfg.delta_th = parse_real(key, value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_real(key, value));
    else fail(key, "unknown key");
  }

  // dB/dBm -> linear, exactly once
  Real p_total = dbm_to_watts(cfg.total_power_dbm);
  cfg.p_max_bs = cfg.bs_power_fraction * p_total;
  cfg.p_max_ris = (1.0 - cfg.bs_power_fraction) * p_total;
  cfg.gamma_t = db_to_linear(cfg.gamma_t_db);
  cfg.sigma_k_sq = dbm_to_watts(cfg.sigma_k_dbm);
  cfg.sigma_v_sq = dbm_to_watts(cfg.sigma_v_dbm);
  cfg.sigma_z_sq = dbm_to_watts(cfg.sigma_z_dbm);

  if (cfg.mode == StarMode::Sd && !have_mask) cfg.sd_mask = alternating_mask(cfg.N);
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("scenario: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return build_scenario(parse_key_value_text(ss.str()));
}

std::string serialize_scenario(const ScenarioConfig& cfg) {
  std::ostringstream out;
  out << "M = " << cfg.M << "\n";
  out << "N = " << cfg.N << "\n";
  out << "K_r = " << cfg.K_r << "\n";
  out << "K_t = " << cfg.K_t << "\n";
  out << "bs_pos = " << format_real(cfg.bs_pos[0]) << "," << format_real(cfg.bs_pos[1]) << ","
      << format_real(cfg.bs_pos[2]) << "\n";
  out << "ris_pos = " << format_real(cfg.ris_pos[0]) << "," << format_real(cfg.ris_pos[1]) << ","
      << format_real(cfg.ris_pos[2]) << "\n";
  out << "user_region_radius = " << format_real(cfg.user_region_radius) << "\n";
  out << "target_region_radius = " << format_real(cfg.target_region_radius) << "\n";
  out << "total_power_dbm = " << format_real(cfg.total_power_dbm) << "\n";
  out << "bs_power_fraction = " << format_real(cfg.bs_power_fraction) << "\n";
  out << "gamma_t_db = " << format_real(cfg.gamma_t_db) << "\n";
  out << "sigma_k_dbm = " << format_real(cfg.sigma_k_dbm) << "\n";
  out << "sigma_v_dbm = " << format_real(cfg.sigma_v_dbm) << "\n";
  out << "sigma_z_dbm = " << format_real(cfg.sigma_z_dbm) << "\n";
  out << "xi_sq = " << format_real(cfg.xi_sq) << "\n";
  out << "kappa = " << format_real(cfg.kappa) << "\n";
  out << "mode = " << to_string(cfg.mode) << "\n";
  if (!cfg.sd_mask.empty()) {
    out << "sd_mask = ";
    for (Side s : cfg.sd_mask) out << (s == Side::Reflect ? 'r' : 't');
    out << "\n";
  }
  out << "sd_freeze_amplitudes = " << (cfg.sd_freeze_amplitudes ? "true" : "false") << "\n";
  out << "um_solver = " << (cfg.um_solver == UnitModulusMethod::Mm ? "mm" : "ccm") << "\n";
  out << "q_max = " << cfg.q_max << "\n";
  out << "delta_th = " << format_real(cfg.delta_th) << "\n";
  out << "seed = " << cfg.seed << "\n";
  return out.str();
}

}  // namespace starisac
