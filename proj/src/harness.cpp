#include "starisac/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace starisac {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
// reserved point index for the per-trial position stream
constexpr std::uint64_t kPositionPoint = 0xFFFFFFFF00000000ULL;

std::uint64_t splitmix_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void parallel_tasks(int jobs, std::size_t count, const std::function<void(std::size_t)>& fn) {
  unsigned hw = std::thread::hardware_concurrency();
  int n_threads = jobs > 0 ? jobs : static_cast<int>(hw ? hw : 1);
  n_threads = std::min<int>(n_threads, static_cast<int>(count ? count : 1));
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t)
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  for (auto& th : pool) th.join();
}

std::string format_real(Real x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

}  // namespace

std::string to_string(SweepParam p) {
  switch (p) {
    case SweepParam::TotalPowerDbm: return "total_power_dbm";
    case SweepParam::GammaTDb: return "gamma_t_db";
    case SweepParam::NElements: return "n_elements";
    case SweepParam::RisBsDistanceM: return "ris_bs_distance_m";
    case SweepParam::Iterations: return "iterations";
  }
  return "?";
}

SweepParam sweep_param_from_string(const std::string& s) {
  if (s == "total_power_dbm") return SweepParam::TotalPowerDbm;
  if (s == "gamma_t_db") return SweepParam::GammaTDb;
  if (s == "n_elements") return SweepParam::NElements;
  if (s == "ris_bs_distance_m") return SweepParam::RisBsDistanceM;
  if (s == "iterations") return SweepParam::Iterations;
  throw std::invalid_argument("sweep: unknown parameter '" + s + "'");
}

void SweepSpec::validate() const {
  if (values.empty()) throw std::invalid_argument("sweep: empty value list");
  if (modes.empty()) throw std::invalid_argument("sweep: empty mode list");
  if (trials < 1) throw std::invalid_argument("sweep: trials must be >= 1");
  base.validate();
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t point, std::uint64_t trial) {
  std::uint64_t z = splitmix_finalize(base + kGolden * (point + 1));
  return splitmix_finalize(z + kGolden * (trial + 1));
}

ScenarioConfig apply_sweep_value(const ScenarioConfig& base, SweepParam param, Real value) {
  ScenarioConfig cfg = base;
  switch (param) {
    case SweepParam::TotalPowerDbm: {
      cfg.total_power_dbm = value;
      Real p_total = dbm_to_watts(value);
      cfg.p_max_bs = cfg.bs_power_fraction * p_total;
      cfg.p_max_ris = (1.0 - cfg.bs_power_fraction) * p_total;
      break;
    }
    case SweepParam::GammaTDb:
      cfg.gamma_t_db = value;
      cfg.gamma_t = db_to_linear(value);
      break;
    case SweepParam::NElements: {
      cfg.N = static_cast<int>(value);
      if (!cfg.sd_mask.empty() || cfg.mode == StarMode::Sd) {
        cfg.sd_mask.resize(static_cast<std::size_t>(cfg.N));
        for (int n = 0; n < cfg.N; ++n)
          cfg.sd_mask[static_cast<std::size_t>(n)] = (n % 2 == 0) ? Side::Reflect : Side::Transmit;
      }
      break;
    }
    case SweepParam::RisBsDistanceM: {
      Vec3 dir = cfg.ris_pos - cfg.bs_pos;
      Real norm = dir.norm();
      if (norm > 0)
        cfg.ris_pos = cfg.bs_pos + (value / norm) * dir;
      else
        cfg.ris_pos = cfg.bs_pos + Vec3(0.0, value, 0.0);
      break;
    }
    case SweepParam::Iterations:
      cfg.q_max = static_cast<int>(value);
      cfg.delta_th = 0.0;
      break;
  }
  return cfg;
}

namespace {

ScenarioConfig task_config(const SweepSpec& spec, Real value, StarMode mode) {
  ScenarioConfig cfg = apply_sweep_value(spec.base, spec.param, value);
  cfg.mode = mode;
  if (mode == StarMode::Sd && static_cast<int>(cfg.sd_mask.size()) != cfg.N) {
    cfg.sd_mask.resize(static_cast<std::size_t>(cfg.N));
    for (int n = 0; n < cfg.N; ++n)
      cfg.sd_mask[static_cast<std::size_t>(n)] = (n % 2 == 0) ? Side::Reflect : Side::Transmit;
  }
  cfg.validate();
  return cfg;
}

ChannelSet task_channels(const SweepSpec& spec, const ScenarioConfig& cfg, std::size_t point,
                         int trial, Rng& rng) {
  if (spec.positions_per_trial) {
    Rng pos_rng(derive_seed(spec.base.seed, kPositionPoint, static_cast<std::uint64_t>(trial)));
    Positions pos = draw_positions(cfg, pos_rng);
    return generate_channel_set(cfg, pos, rng);
  }
  (void)point;
  return generate_channel_set(cfg, rng);
}

}  // namespace

SweepResults run_sweep(const SweepSpec& spec) {
  spec.validate();
  struct Task {
    std::size_t point;
    Real value;
    StarMode mode;
    int trial;
  };
  std::vector<Task> tasks;
  for (std::size_t p = 0; p < spec.values.size(); ++p)
    for (StarMode mode : spec.modes)
      for (int trial = 0; trial < spec.trials; ++trial)
        tasks.push_back({p, spec.values[p], mode, trial});

  SweepResults results;
  results.param = spec.param;
  results.rows.resize(tasks.size());

  parallel_tasks(spec.jobs, tasks.size(), [&](std::size_t i) {
    const Task& task = tasks[i];
    TrialRow row;
    row.value = task.value;
    row.mode = task.mode;
    row.trial = task.trial;
    row.seed = derive_seed(spec.base.seed, task.point, static_cast<std::uint64_t>(task.trial));
    auto t0 = std::chrono::steady_clock::now();
    try {
      ScenarioConfig cfg = task_config(spec, task.value, task.mode);
      cfg.seed = row.seed;
      Rng rng(row.seed);
      ChannelSet ch = task_channels(spec, cfg, task.point, task.trial, rng);
      AoTrace trace = run_ao(cfg, ch, rng);
      row.sum_rate = trace.final_sum_rate;
      row.radar_snr = trace.final_radar_snr;
      row.iterations = trace.iterations_used;
      row.converged = trace.converged;
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    row.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    results.rows[i] = std::move(row);
  });

  results.summary = summarize(spec.param, results.rows);
  return results;
}

Real quantile_sorted(const std::vector<Real>& sorted, Real p) {
  if (sorted.empty()) return 0;
  if (sorted.size() == 1) return sorted.front();
  Real pos = p * static_cast<Real>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(pos);
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  Real frac = pos - static_cast<Real>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

std::vector<SummaryRow> summarize(SweepParam param, const std::vector<TrialRow>& rows) {
  (void)param;
  // group in first-seen order, which is the deterministic task order
  std::vector<SummaryRow> out;
  std::vector<std::pair<Real, StarMode>> keys;
  for (const TrialRow& row : rows) {
    std::pair<Real, StarMode> key{row.value, row.mode};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (const auto& [value, mode] : keys) {
    std::vector<Real> rates;
    for (const TrialRow& row : rows)
      if (!row.failed && row.value == value && row.mode == mode) rates.push_back(row.sum_rate);
    std::sort(rates.begin(), rates.end());
    SummaryRow s;
    s.value = value;
    s.mode = mode;
    s.n_ok = static_cast<int>(rates.size());
    if (!rates.empty()) {
      s.q1 = quantile_sorted(rates, 0.25);
      s.median = quantile_sorted(rates, 0.5);
      s.q3 = quantile_sorted(rates, 0.75);
    }
    out.push_back(s);
  }
  return out;
}

void write_sweep_outputs(const std::string& out_dir, const SweepResults& results) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string param = to_string(results.param);

  std::ofstream res(fs::path(out_dir) / "results.csv");
  res << "param,value,mode,trial,seed,converged,iterations,sum_rate_bits,radar_snr,failed,error\n";
  for (const TrialRow& row : results.rows) {
    res << param << ',' << format_real(row.value) << ',' << to_string(row.mode) << ','
        << row.trial << ',' << row.seed << ',' << (row.converged ? 1 : 0) << ','
        << row.iterations << ',' << format_real(row.sum_rate) << ','
        << format_real(row.radar_snr) << ',' << (row.failed ? 1 : 0) << ',' << row.error << '\n';
  }

  std::ofstream sum(fs::path(out_dir) / "summary.csv");
  sum << "param,value,mode,n_ok,q1,median,q3\n";
  for (const SummaryRow& s : results.summary) {
    sum << param << ',' << format_real(s.value) << ',' << to_string(s.mode) << ',' << s.n_ok
        << ',' << format_real(s.q1) << ',' << format_real(s.median) << ',' << format_real(s.q3)
        << '\n';
  }

  std::ofstream tim(fs::path(out_dir) / "timing.csv");
  tim << "param,value,mode,trial,wall_ms\n";
  for (const TrialRow& row : results.rows)
    tim << param << ',' << format_real(row.value) << ',' << to_string(row.mode) << ','
        << row.trial << ',' << format_real(row.wall_ms) << '\n';
}

std::vector<ConvergenceRow> run_convergence(const SweepSpec& spec) {
  spec.validate();
  int q = static_cast<int>(*std::max_element(spec.values.begin(), spec.values.end()));
  struct Task {
    StarMode mode;
    int trial;
  };
  std::vector<Task> tasks;
  for (StarMode mode : spec.modes)
    for (int trial = 0; trial < spec.trials; ++trial) tasks.push_back({mode, trial});

  std::vector<std::vector<ConvergenceRow>> per_task(tasks.size());
  parallel_tasks(spec.jobs, tasks.size(), [&](std::size_t i) {
    const Task& task = tasks[i];
    ScenarioConfig cfg = task_config(spec, static_cast<Real>(q), task.mode);
    cfg = apply_sweep_value(cfg, SweepParam::Iterations, static_cast<Real>(q));
    std::uint64_t seed = derive_seed(spec.base.seed, 0, static_cast<std::uint64_t>(task.trial));
    cfg.seed = seed;
    Rng rng(seed);
    ChannelSet ch = task_channels(spec, cfg, 0, task.trial, rng);
    AoTrace trace = run_ao(cfg, ch, rng);
    for (const AoIteration& it : trace.iterations)
      per_task[i].push_back({task.mode, task.trial, it.iter, it.sum_rate_bits, it.fp_after_star});
  });

  std::vector<ConvergenceRow> rows;
  for (auto& part : per_task) rows.insert(rows.end(), part.begin(), part.end());
  return rows;
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out << "mode,trial,iter,sum_rate_bits,fp_objective\n";
  for (const ConvergenceRow& row : rows)
    out << to_string(row.mode) << ',' << row.trial << ',' << row.iter << ','
        << format_real(row.sum_rate) << ',' << format_real(row.fp_objective) << '\n';
}

SweepSpec build_sweep_spec(const KeyValueDoc& doc, const std::string& spec_dir) {
  SweepSpec spec;
  bool have_base = false;
  for (const auto& [key, value] : doc) {
    if (key == "sweep_param") spec.param = sweep_param_from_string(value);
    else if (key == "values") {
      std::stringstream ss(value);
      std::string part;
      while (std::getline(ss, part, ',')) spec.values.push_back(std::stod(part));
    } else if (key == "modes") {
      std::stringstream ss(value);
      std::string part;
      while (std::getline(ss, part, ',')) spec.modes.push_back(star_mode_from_string(part));
    } else if (key == "trials") spec.trials = std::stoi(value);
    else if (key == "positions_per_trial")
      spec.positions_per_trial = (value == "true" || value == "1");
    else if (key == "jobs") spec.jobs = std::stoi(value);
    else if (key == "base_config") {
      std::filesystem::path p(value);
      if (p.is_relative() && !spec_dir.empty()) p = std::filesystem::path(spec_dir) / p;
      spec.base = load_scenario_file(p.string());
      have_base = true;
    } else
      throw std::invalid_argument("sweep: unknown key '" + key + "'");
  }
  if (!have_base) spec.base = build_scenario({});
  spec.validate();
  return spec;
}

SweepSpec load_sweep_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("sweep: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return build_sweep_spec(parse_key_value_text(ss.str()),
                          std::filesystem::path(path).parent_path().string());
}

}  // namespace starisac
