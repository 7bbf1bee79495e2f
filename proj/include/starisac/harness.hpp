#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "starisac/ao.hpp"
#include "starisac/scenario.hpp"
#include "starisac/types.hpp"

namespace starisac {

enum class SweepParam { TotalPowerDbm, GammaTDb, NElements, RisBsDistanceM, Iterations };

std::string to_string(SweepParam p);
SweepParam sweep_param_from_string(const std::string& s);

struct SweepSpec {
  SweepParam param = SweepParam::TotalPowerDbm;
  std::vector<Real> values;
  std::vector<StarMode> modes;
  int trials = 20;
  ScenarioConfig base;
  /// When set, user/target positions are drawn once per trial index and
  /// reused at every sweep point; otherwise every (point, trial) pair draws
  /// fresh positions.
  bool positions_per_trial = false;
  int jobs = 0;  ///< worker threads; 0 means hardware concurrency

  void validate() const;
};

/// Deterministic per-task seed: two splitmix64 finalization rounds over the
/// base seed, the point index and the trial index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t point, std::uint64_t trial);

/// Copy of `base` with the swept parameter applied (derived linear fields
/// recomputed; the SD mask is re-derived when N changes).
ScenarioConfig apply_sweep_value(const ScenarioConfig& base, SweepParam param, Real value);

struct TrialRow {
  Real value = 0;
  StarMode mode = StarMode::Ued;
  int trial = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  Real sum_rate = 0;
  Real radar_snr = 0;
  int iterations = 0;
  bool converged = false;
  double wall_ms = 0;
};

struct SummaryRow {
  Real value = 0;
  StarMode mode = StarMode::Ued;
  int n_ok = 0;
  Real q1 = 0, median = 0, q3 = 0;
};

struct SweepResults {
  SweepParam param = SweepParam::TotalPowerDbm;
  std::vector<TrialRow> rows;
  std::vector<SummaryRow> summary;
};

SweepResults run_sweep(const SweepSpec& spec);

/// Linear-interpolation quantile of a sorted sample (numpy default).
Real quantile_sorted(const std::vector<Real>& sorted, Real p);

std::vector<SummaryRow> summarize(SweepParam param, const std::vector<TrialRow>& rows);

/// Writes results.csv and summary.csv (deterministic given spec and seed)
/// plus timing.csv (wall clock, not covered by the determinism contract).
void write_sweep_outputs(const std::string& out_dir, const SweepResults& results);

struct ConvergenceRow {
  StarMode mode = StarMode::Ued;
  int trial = 0;
  int iter = 0;
  Real sum_rate = 0;
  Real fp_objective = 0;
};

/// Iteration-versus-sum-rate curves: runs max(spec.values) iterations with
/// the convergence test disabled, one run per (mode, trial).
std::vector<ConvergenceRow> run_convergence(const SweepSpec& spec);

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);

SweepSpec load_sweep_spec(const std::string& path);
SweepSpec build_sweep_spec(const KeyValueDoc& doc, const std::string& spec_dir);

}  // namespace starisac
