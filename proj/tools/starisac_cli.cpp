// Command-line front end: single AO runs, Monte-Carlo sweeps and a quick
// self-test of the numerical kernels.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "starisac/ao.hpp"
#include "starisac/channels.hpp"
#include "starisac/fp.hpp"
#include "starisac/harness.hpp"
#include "starisac/metrics.hpp"
#include "starisac/scenario.hpp"
#include "starisac/solvers/qcqp.hpp"
#include "starisac/solvers/rayleigh.hpp"
#include "starisac/solvers/unit_modulus.hpp"
#include "starisac/subproblems.hpp"

namespace {

using namespace starisac;

int cmd_run(const std::string& config_path, const std::string& mode_override,
            std::int64_t seed_override, const std::string& trace_path,
            const std::string& dump_path, bool quiet) {
  ScenarioConfig cfg = config_path.empty() ? build_scenario({}) : load_scenario_file(config_path);
  if (!mode_override.empty()) {
    cfg.mode = star_mode_from_string(mode_override);
    if (cfg.mode == StarMode::Sd && static_cast<int>(cfg.sd_mask.size()) != cfg.N) {
      cfg.sd_mask.resize(static_cast<std::size_t>(cfg.N));
      for (int n = 0; n < cfg.N; ++n)
        cfg.sd_mask[static_cast<std::size_t>(n)] = (n % 2 == 0) ? Side::Reflect : Side::Transmit;
    }
    cfg.validate();
  }
  if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);

  Rng rng(cfg.seed);
  ChannelSet ch = generate_channel_set(cfg, rng);
  if (!dump_path.empty()) {
    std::ofstream out(dump_path);
    if (!out) throw std::runtime_error("cannot open '" + dump_path + "'");
    dump_channel_set(out, ch);
  }

  AoTrace trace = run_ao(cfg, ch, rng);
  if (!trace_path.empty()) {
    std::ofstream out(trace_path);
    if (!out) throw std::runtime_error("cannot open '" + trace_path + "'");
    write_trace_csv(out, trace);
  }

  if (!quiet) {
    std::printf("mode             %s\n", to_string(cfg.mode).c_str());
    std::printf("seed             %llu\n", static_cast<unsigned long long>(cfg.seed));
    std::printf("iterations       %d (%s)\n", trace.iterations_used,
                trace.converged ? "converged" : "iteration cap");
    std::printf("sum rate         %.12g bits/s/Hz\n", trace.final_sum_rate);
    std::printf("radar snr        %.12g dB\n", linear_to_db(trace.final_radar_snr));
    const FeasibilityReport& f = trace.iterations.back().feas;
    std::printf("feasible         %s (slacks: snr %.3g, bs %.3g, ris %.3g)\n",
                f.feasible ? "yes" : "NO", f.radar_snr_slack, f.bs_power_slack,
                f.ris_power_slack);
  }
  return 0;
}

int cmd_sweep(const std::string& spec_path, const std::string& out_dir, int jobs) {
  SweepSpec spec = load_sweep_spec(spec_path);
  if (jobs > 0) spec.jobs = jobs;
  std::filesystem::create_directories(out_dir);

  if (spec.param == SweepParam::Iterations) {
    auto rows = run_convergence(spec);
    std::ofstream out(std::filesystem::path(out_dir) / "convergence.csv");
    write_convergence_csv(out, rows);
    std::printf("wrote %s/convergence.csv (%zu rows)\n", out_dir.c_str(), rows.size());
    return 0;
  }

  SweepResults results = run_sweep(spec);
  write_sweep_outputs(out_dir, results);
  std::size_t failed = 0;
  for (const TrialRow& row : results.rows)
    if (row.failed) ++failed;
  std::printf("wrote %s/{results,summary,timing}.csv (%zu rows, %zu failed)\n", out_dir.c_str(),
              results.rows.size(), failed);
  return failed == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// selftest: quick property checks over the numerical kernels
// ---------------------------------------------------------------------------

CMat random_cmat(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<Real> n(0.0, 1.0);
  CMat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(n(rng), n(rng));
  return m;
}

struct SelftestContext {
  int failures = 0;
  void check(const char* name, bool ok) {
    std::printf("[%s] %s\n", ok ? "ok" : "FAIL", name);
    if (!ok) ++failures;
  }
};

ScenarioConfig selftest_config() {
  KeyValueDoc doc{{"M", "2"}, {"N", "8"},         {"K_r", "1"},  {"K_t", "1"},
                  {"mode", "ued"},  {"q_max", "8"}, {"seed", "7"}};
  return build_scenario(doc);
}

void selftest_basics(SelftestContext& t) {
  t.check("pathloss at 1 m", std::abs(pathloss_linear(1.0) - std::pow(10.0, -3.73)) < 1e-18);
  t.check("26 dBm in watts",
          std::abs(dbm_to_watts(26.0) - std::pow(10.0, 2.6 - 3.0)) < 1e-14);

  Rng rng(1);
  const Real pl = 0.5;
  Real acc = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    CMat h = rician_channel(CMat::Ones(1, 1), 0.0, pl, rng);
    acc += std::norm(h(0, 0));
  }
  t.check("rician NLoS variance", std::abs(acc / draws - pl) < 0.05 * pl);
}

void selftest_fp(SelftestContext& t) {
  ScenarioConfig cfg = selftest_config();
  Rng rng(11);
  ChannelSet ch = generate_channel_set(cfg, rng);
  auto [state, star] = initialize_ao(cfg, ch, rng);
  RVec gamma = update_gamma(state.W, star, ch, cfg);
  CVec rho = update_rho(gamma, state.W, star, ch, cfg);
  Real fp = fp_objective(gamma, rho, state.W, star, ch, cfg);
  Real rate_nats = sum_rate(state.W, star, ch, cfg) * std::numbers::ln2_v<Real>;
  t.check("fp objective equals log sum rate at closed-form auxiliaries",
          std::abs(fp - rate_nats) <= 1e-8 * std::max(1.0, std::abs(rate_nats)));
}

void selftest_rayleigh(SelftestContext& t) {
  Rng rng(3);
  CMat A = random_cmat(5, 5, rng);
  CMat C = A * A.adjoint();
  CMat B = random_cmat(5, 5, rng);
  CMat E = B * B.adjoint() + 0.5 * CMat::Identity(5, 5);
  CVec u = max_generalized_rayleigh(C, E);
  Real quotient = std::real(u.dot(C * u)) / std::real(u.dot(E * u));
  Real residual = (C * u - quotient * (E * u)).norm();
  t.check("generalized rayleigh residual", residual <= 1e-8 * C.norm());
}

void selftest_qcqp(SelftestContext& t) {
  Rng rng(5);
  CVec c = random_cmat(4, 1, rng).col(0);
  c *= 2.0 / c.norm();
  QcqpProblem prob;
  prob.objective.Q = CMat::Identity(4, 4);
  prob.objective.b = c;  // ||x - c||^2 up to a constant
  prob.ball_constraints.push_back(1.0);
  QcqpResult res = solve_qcqp(prob, CVec::Zero(4));
  t.check("qcqp projection onto ball", (res.x - c / c.norm()).norm() < 1e-6);
}

void selftest_unit_modulus(SelftestContext& t) {
  Rng rng(9);
  CMat A = random_cmat(6, 6, rng);
  CMat omega = A * A.adjoint();
  CVec mu = random_cmat(6, 1, rng).col(0);
  CVec phi0 = CVec::Ones(6);
  auto mm = minimize_unit_modulus_mm(omega, mu, phi0);
  auto ccm = minimize_unit_modulus_ccm(omega, mu, phi0);
  Real scale = std::max({1.0, std::abs(mm.objective), std::abs(ccm.objective)});
  t.check("mm/ccm objective agreement", std::abs(mm.objective - ccm.objective) <= 1e-3 * scale);
}

void selftest_ao(SelftestContext& t) {
  ScenarioConfig cfg = selftest_config();
  Rng rng(cfg.seed);
  ChannelSet ch = generate_channel_set(cfg, rng);
  AoTrace trace = run_ao(cfg, ch, rng);
  bool monotone = true;
  Real prev = -std::numeric_limits<Real>::infinity();
  for (const AoIteration& it : trace.iterations) {
    Real tol = 1e-9 * std::max(1.0, std::abs(prev));
    if (it.fp_after_rho < prev - tol || it.fp_after_w < it.fp_after_rho - tol ||
        it.fp_after_star < it.fp_after_w - tol)
      monotone = false;
    prev = it.fp_after_star;
  }
  t.check("ao surrogate monotone", monotone);
  t.check("ao final iterate feasible", trace.iterations.back().feas.feasible);
}

int cmd_selftest() {
  SelftestContext t;
  selftest_basics(t);
  selftest_fp(t);
  selftest_rayleigh(t);
  selftest_qcqp(t);
  selftest_unit_modulus(t);
  selftest_ao(t);
  std::printf("%s\n", t.failures == 0 ? "selftest passed" : "selftest FAILED");
  return t.failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"active STAR-RIS assisted ISAC beamforming simulator"};
  app.require_subcommand(1);

  std::string config_path, mode_override, trace_path, dump_path;
  std::int64_t seed_override = -1;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "single alternating-optimization run");
  run->add_option("--config", config_path, "scenario config file");
  run->add_option("--mode", mode_override, "ued | eed | sd | passive");
  run->add_option("--seed", seed_override, "RNG seed override");
  run->add_option("--trace", trace_path, "per-iteration trace CSV output");
  run->add_option("--dump-channels", dump_path, "channel realization dump file");
  run->add_flag("--quiet", quiet, "suppress the summary printout");

  std::string spec_path, out_dir = "sweep_out";
  int jobs = 0;
  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo parameter sweep");
  sweep->add_option("--spec", spec_path, "sweep spec file")->required();
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--jobs", jobs, "worker threads (default: hardware)");

  auto* selftest = app.add_subcommand("selftest", "run the built-in property checks");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed())
      return cmd_run(config_path, mode_override, seed_override, trace_path, dump_path, quiet);
    if (sweep->parsed()) return cmd_sweep(spec_path, out_dir, jobs);
    if (selftest->parsed()) return cmd_selftest();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
