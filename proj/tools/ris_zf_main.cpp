// ris-zf: Monte-Carlo simulator for zero-forcing precoding on the
// RIS-aided broadcast channel.
//
//   ris-zf run   --config cfg.json --sweep {power|elements} ...
//   ris-zf check          quick self-test of the numerical kernels
//
// Exit codes: 0 success, 1 partial failure (some trial failed), 2 config
// or I/O error.

#include <cmath>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "riszf/harness.hpp"
#include "riszf/linalg.hpp"
#include "riszf/rng.hpp"

namespace {

using namespace riszf;

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int run_command(const std::string& config_path, const std::string& sweep_kind,
                int trials, std::uint64_t seed, const std::string& algorithms,
                const std::string& out_path, const std::string& format,
                int threads, bool timing) {
  SimConfig cfg = load_config(config_path);

  SweepSpec spec;
  spec.base = cfg.scenario;
  spec.trials = trials;
  spec.master_seed = seed;
  spec.threads = threads;
  spec.timing = timing;
  spec.algorithms = split_csv(algorithms);
  if (sweep_kind == "power") {
    spec.axis = SweepAxis::kPtxDbm;
    spec.values = cfg.power_dbm;
    if (spec.values.empty()) {
      throw ConfigError("config has no sweep.power_dbm values");
    }
  } else if (sweep_kind == "elements") {
    spec.axis = SweepAxis::kNRis;
    spec.values = cfg.elements;
    if (spec.values.empty()) {
      throw ConfigError("config has no sweep.elements values");
    }
  } else {
    throw ConfigError("--sweep must be 'power' or 'elements'");
  }

  const SweepOutcome outcome = run_sweep(spec);
  if (out_path.empty() || out_path == "-") {
    if (format == "csv") {
      emit_csv(outcome, std::cout);
    } else if (format == "json") {
      emit_json(outcome, std::cout);
    } else {
      throw ConfigError("unknown output format '" + format + "'");
    }
  } else {
    emit_file(outcome, format, out_path);
  }
  if (outcome.failures > 0) {
    std::cerr << outcome.failures << " trial(s) failed; output is partial\n";
    return 1;
  }
  return 0;
}

struct CheckReport {
  int passed = 0;
  int failed = 0;
  void note(const std::string& name, bool ok) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
    if (ok) {
      ++passed;
    } else {
      ++failed;
    }
  }
};

int check_command() {
  CheckReport report;
  ScenarioConfig cfg;
  cfg.n_bs = 4;
  cfg.n_ris = 16;
  cfg.n_users = 3;
  const double ptx = dbm_to_watt(cfg.ptx_dbm);

  {  // Gram identity of the composite channel decomposition
    bool ok = true;
    for (std::uint64_t t = 0; t < 10 && ok; ++t) {
      const auto ch = draw_realization(cfg, 7, t);
      const auto cache = build_subspace_cache(ch);
      Rng rng(11, t);
      CVec theta(cfg.n_ris);
      for (int n = 0; n < cfg.n_ris; ++n) {
        theta(n) = std::polar(1.0, 2 * M_PI * rng.uniform());
      }
      std::vector<int> order = {0, 2};
      const CMat hc = composite_matrix(ch, order, theta);
      CVec theta_bar(cfg.n_ris + 1);
      theta_bar << theta, Complex(1.0, 0.0);
      const CMat c = build_c(ch, order);
      CMat d(2, cfg.n_ris + 1);
      d.row(0) = cache.d_rows.row(0);
      d.row(1) = cache.d_rows.row(2);
      const CVec q = d * theta_bar;
      const CMat lhs = hc * hc.adjoint();
      const CMat rhs = c + q * q.adjoint();
      ok = (lhs - rhs).norm() <= 1e-9 * lhs.norm();
    }
    report.note("gram identity", ok);
  }

  {  // inversion-lemma trace equals the dense inverse trace
    bool ok = true;
    for (std::uint64_t t = 0; t < 10 && ok; ++t) {
      const auto ch = draw_realization(cfg, 13, t);
      const auto cache = build_subspace_cache(ch);
      std::vector<int> order = {0, 1};
      const auto alloc = Allocation::make(ch, cache, order);
      Rng rng(17, t);
      CVec theta_bar(cfg.n_ris + 1);
      for (int n = 0; n <= cfg.n_ris; ++n) {
        theta_bar(n) = std::polar(1.0, 2 * M_PI * rng.uniform());
      }
      CMat d(2, cfg.n_ris + 1);
      d.row(0) = cache.d_rows.row(0);
      d.row(1) = cache.d_rows.row(1);
      const RVec w = RVec::Ones(2);
      const double fast = frob_pinv_weighted(alloc.c, d, theta_bar, w);
      const CVec q = d * theta_bar;
      const CMat gram = alloc.c + q * q.adjoint();
      const double dense = gram.inverse().diagonal().real().sum();
      ok = std::abs(fast - dense) <= 1e-8 * std::max(1.0, std::abs(dense));
    }
    report.note("inversion lemma", ok);
  }

  {  // QR compression reproduces the Gram products
    bool ok = true;
    for (std::uint64_t t = 0; t < 5 && ok; ++t) {
      const auto ch = draw_realization(cfg, 19, t);
      const auto cache = build_subspace_cache(ch);
      std::vector<int> order = {1, 2};
      const auto alloc = Allocation::make(ch, cache, order);
      CMat d(2, cfg.n_ris + 1);
      d.row(0) = cache.d_rows.row(1);
      d.row(1) = cache.d_rows.row(2);
      const CMat dense = d * d.adjoint();
      const CMat packed = alloc.r_cols.adjoint() * alloc.r_cols;
      ok = (dense - packed).norm() <= 1e-9 * std::max(1.0, dense.norm());
    }
    report.note("subspace compression", ok);
  }

  {  // waterfilling KKT conditions
    bool ok = true;
    Rng rng(23);
    for (int t = 0; t < 200 && ok; ++t) {
      const int n = 1 + static_cast<int>(rng.uniform() * 6);
      RVec gains(n);
      for (int j = 0; j < n; ++j) gains(j) = 0.05 + 10.0 * rng.uniform();
      const double budget = 0.1 + 5.0 * rng.uniform();
      const RVec powers = waterfill(gains, budget);
      ok = std::abs(powers.sum() - budget) <= 1e-10 * budget;
      double level = -1.0;
      for (int j = 0; j < n && ok; ++j) {
        if (powers(j) > 0.0) {
          const double mu = powers(j) + 1.0 / gains(j);
          if (level < 0.0) level = mu;
          ok = std::abs(mu - level) <= 1e-9 * std::max(1.0, level);
        }
      }
      for (int j = 0; j < n && ok; ++j) {
        if (powers(j) == 0.0) ok = 1.0 / gains(j) >= level - 1e-9;
      }
    }
    report.note("waterfilling kkt", ok);
  }

  {  // elementwise sweep never increases the weighted objective
    bool ok = true;
    for (std::uint64_t t = 0; t < 10 && ok; ++t) {
      const auto ch = draw_realization(cfg, 29, t);
      const auto cache = build_subspace_cache(ch);
      std::vector<int> order = {0, 1};
      const auto alloc = Allocation::make(ch, cache, order);
      CMat d(2, cfg.n_ris + 1);
      d.row(0) = cache.d_rows.row(0);
      d.row(1) = cache.d_rows.row(1);
      Rng rng(31, t);
      CVec theta_bar(cfg.n_ris + 1);
      for (int n = 0; n < cfg.n_ris; ++n) {
        theta_bar(n) = std::polar(1.0, 2 * M_PI * rng.uniform());
      }
      theta_bar(cfg.n_ris) = 1.0;
      RVec gamma(2);
      gamma << 0.4, 1.7;
      const double before = frob_pinv_weighted(alloc.c, d, theta_bar, gamma);
      const CVec swept = elementwise_sweep(alloc.c, d, theta_bar, gamma);
      const double after = frob_pinv_weighted(alloc.c, d, swept, gamma);
      ok = after <= before + 1e-9 * std::abs(before);
    }
    report.note("sweep monotonicity", ok);
  }

  {  // dead surface reduces every algorithm to the direct baseline
    bool ok = true;
    for (std::uint64_t t = 0; t < 3 && ok; ++t) {
      auto ch = draw_realization(cfg, 37, t);
      ch.a.setZero();
      const auto cache = build_subspace_cache(ch);
      const double direct = lisa_direct(ch, ptx).se;
      ok = std::abs(greedy_ris_lisa(ch, cache, ptx).se - direct) <= 1e-9 &&
           std::abs(add_one_ris_lisa(ch, cache, ptx).se - direct) <= 1e-9 &&
           std::abs(random_phase_baseline(ch, ptx, 5).se - direct) <= 1e-9;
    }
    report.note("dead-surface reduction", ok);
  }

  {  // draw determinism
    const auto c1 = draw_realization(cfg, 41, 3);
    const auto c2 = draw_realization(cfg, 41, 3);
    report.note("draw determinism", c1.h_direct == c2.h_direct &&
                                        c1.h_ris_user == c2.h_ris_user &&
                                        c1.a == c2.a && c1.b == c2.b);
  }

  std::cout << report.passed << " passed, " << report.failed << " failed\n";
  return report.failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zero-forcing simulator for the RIS-aided broadcast channel"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "execute a Monte-Carlo sweep");
  std::string config_path;
  std::string sweep_kind = "power";
  int trials = 100;
  std::uint64_t seed = 1;
  std::string algorithms = "direct,random,greedy,addone";
  std::string out_path;
  std::string format = "csv";
  int threads = 0;
  bool timing = false;
  run->add_option("--config", config_path, "JSON config file")->required();
  run->add_option("--sweep", sweep_kind, "sweep axis: power | elements");
  run->add_option("--trials", trials, "Monte-Carlo trials per sweep point");
  run->add_option("--seed", seed, "master seed");
  run->add_option("--algorithms", algorithms,
                  "comma list of direct,random,greedy,addone");
  run->add_option("--out", out_path, "output path ('-' for stdout)");
  run->add_option("--format", format, "csv | json");
  run->add_option("--threads", threads, "worker threads (0 = hardware)");
  run->add_flag("--timing", timing,
                "record wall time per algorithm (breaks byte-level "
                "reproducibility of the output)");

  auto* check = app.add_subcommand("check", "run the quick self-test");

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) {
      return check_command();
    }
    return run_command(config_path, sweep_kind, trials, seed, algorithms,
                       out_path, format, threads, timing);
  } catch (const riszf::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
