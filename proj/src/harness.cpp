#include "riszf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "riszf/rng.hpp"

namespace riszf {

namespace {

using nlohmann::json;

constexpr std::uint64_t kPhaseSalt = 0x7068617365ULL;  // "phase"

const std::vector<std::string> kAlgorithms = {"direct", "random", "greedy",
                                              "addone"};

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void reject_unknown_keys(const json& obj, const std::string& scope,
                         const std::vector<std::string>& known) {
  for (const auto& item : obj.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw ConfigError("unknown key '" + item.key() + "' in " + scope);
    }
  }
}

Vec3 parse_vec3(const json& j, const std::string& name) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError(name + " must be an array of 3 numbers");
  }
  return Vec3{j.at(0).get<double>(), j.at(1).get<double>(),
              j.at(2).get<double>()};
}

}  // namespace

bool valid_algorithm(const std::string& name) {
  return std::find(kAlgorithms.begin(), kAlgorithms.end(), name) !=
         kAlgorithms.end();
}

std::string axis_name(SweepAxis axis) {
  return axis == SweepAxis::kPtxDbm ? "ptx_dbm" : "n_ris";
}

void SweepSpec::validate() const {
  if (values.empty()) throw ConfigError("sweep values must be nonempty");
  if (!std::is_sorted(values.begin(), values.end())) {
    throw ConfigError("sweep values must be sorted ascending");
  }
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (algorithms.empty()) {
    // An empty algorithm list is allowed and yields a header-only table.
  }
  for (const auto& alg : algorithms) {
    if (!valid_algorithm(alg)) {
      throw ConfigError("unknown algorithm '" + alg + "'");
    }
  }
  base.validate();
  if (axis == SweepAxis::kNRis) {
    for (double v : values) {
      if (v < 0.0 || v != std::floor(v)) {
        throw ConfigError("element counts must be nonnegative integers");
      }
    }
  }
}

std::vector<TrialResult> run_trial(const ScenarioConfig& cfg,
                                   std::uint64_t seed, std::uint64_t trial,
                                   const std::vector<std::string>& algorithms,
                                   double ptx_dbm, bool timing) {
  const ChannelRealization ch = draw_realization(cfg, seed, trial);
  const double ptx = dbm_to_watt(ptx_dbm);
  const std::uint64_t phase_seed = substream_seed(seed, trial, kPhaseSalt);

  const bool wants_cache =
      std::find(algorithms.begin(), algorithms.end(), "greedy") !=
          algorithms.end() ||
      std::find(algorithms.begin(), algorithms.end(), "addone") !=
          algorithms.end();
  SubspaceCache cache;
  if (wants_cache) cache = build_subspace_cache(ch);

  std::vector<TrialResult> results;
  results.reserve(algorithms.size());
  for (const auto& alg : algorithms) {
    TrialResult tr;
    tr.algorithm = alg;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      AlgorithmResult res;
      if (alg == "direct") {
        res = lisa_direct(ch, ptx);
      } else if (alg == "random") {
        res = random_phase_baseline(ch, ptx, phase_seed);
      } else if (alg == "greedy") {
        res = greedy_ris_lisa(ch, cache, ptx);
      } else if (alg == "addone") {
        res = add_one_ris_lisa(ch, cache, ptx);
      } else {
        throw ConfigError("unknown algorithm '" + alg + "'");
      }
      tr.se = res.se;
      tr.users = static_cast<int>(res.order.size());
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      tr.failed = true;
    }
    if (timing) {
      const auto t1 = std::chrono::steady_clock::now();
      tr.ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
    results.push_back(std::move(tr));
  }
  return results;
}

SweepOutcome run_sweep(const SweepSpec& spec) {
  spec.validate();
  const auto n_values = spec.values.size();
  const auto n_trials = static_cast<std::size_t>(spec.trials);

  // results[value_index][trial] — slots are disjoint, so workers write
  // without synchronization and reduction order is fixed.
  std::vector<std::vector<std::vector<TrialResult>>> results(n_values);
  for (auto& per_value : results) per_value.resize(n_trials);

  struct Job {
    std::size_t value_idx;
    std::size_t trial;
  };
  std::vector<Job> jobs;
  jobs.reserve(n_values * n_trials);
  for (std::size_t vi = 0; vi < n_values; ++vi) {
    for (std::size_t t = 0; t < n_trials; ++t) jobs.push_back({vi, t});
  }

  int threads = spec.threads;
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  threads = std::min<int>(threads, static_cast<int>(jobs.size()));

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      const Job job = jobs[j];
      ScenarioConfig cfg = spec.base;
      double ptx_dbm = cfg.ptx_dbm;
      if (spec.axis == SweepAxis::kPtxDbm) {
        ptx_dbm = spec.values[job.value_idx];
      } else {
        cfg.n_ris = static_cast<int>(spec.values[job.value_idx]);
      }
      results[job.value_idx][job.trial] =
          run_trial(cfg, spec.master_seed, job.trial, spec.algorithms,
                    ptx_dbm, spec.timing);
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SweepOutcome outcome;
  std::vector<std::string> algs = spec.algorithms;
  std::sort(algs.begin(), algs.end());
  for (std::size_t vi = 0; vi < n_values; ++vi) {
    for (const auto& alg : algs) {
      SweepRecord rec;
      rec.axis = axis_name(spec.axis);
      rec.axis_value = spec.values[vi];
      rec.algorithm = alg;
      double sum = 0.0, sum_sq = 0.0, users = 0.0, ms = 0.0;
      int ok = 0;
      for (std::size_t t = 0; t < n_trials; ++t) {
        for (const auto& tr : results[vi][t]) {
          if (tr.algorithm != alg) continue;
          if (tr.failed) {
            ++outcome.failures;
            continue;
          }
          sum += tr.se;
          sum_sq += tr.se * tr.se;
          users += tr.users;
          ms += tr.ms;
          ++ok;
        }
      }
      rec.trials = ok;
      if (ok > 0) {
        rec.mean_se = sum / ok;
        rec.mean_users = users / ok;
        rec.mean_ms = ms / ok;
        if (ok > 1) {
          const double var =
              std::max(0.0, (sum_sq - sum * sum / ok) / (ok - 1));
          rec.std_se = std::sqrt(var);
        }
      }
      outcome.records.push_back(std::move(rec));
    }
  }
  return outcome;
}

void emit_csv(const SweepOutcome& outcome, std::ostream& os) {
  os << "axis,axis_value,algorithm,mean_se,std_se,mean_users,trials,mean_ms\n";
  for (const auto& r : outcome.records) {
    os << r.axis << ',' << format_double(r.axis_value) << ',' << r.algorithm
       << ',' << format_double(r.mean_se) << ',' << format_double(r.std_se)
       << ',' << format_double(r.mean_users) << ',' << r.trials << ','
       << format_double(r.mean_ms) << '\n';
  }
}

void emit_json(const SweepOutcome& outcome, std::ostream& os) {
  json arr = json::array();
  for (const auto& r : outcome.records) {
    arr.push_back({{"axis", r.axis},
                   {"axis_value", r.axis_value},
                   {"algorithm", r.algorithm},
                   {"mean_se", r.mean_se},
                   {"std_se", r.std_se},
                   {"mean_users", r.mean_users},
                   {"trials", r.trials},
                   {"mean_ms", r.mean_ms}});
  }
  os << arr.dump(2) << '\n';
}

void emit_file(const SweepOutcome& outcome, const std::string& format,
               const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open output path '" + path + "'");
  if (format == "csv") {
    emit_csv(outcome, os);
  } else if (format == "json") {
    emit_json(outcome, os);
  } else {
    throw ConfigError("unknown output format '" + format + "'");
  }
  os.flush();
  if (!os) throw ConfigError("failed writing output path '" + path + "'");
}

SimConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  reject_unknown_keys(root, "config", {"scenario", "sweep"});

  SimConfig cfg;
  if (root.contains("scenario")) {
    const json& s = root["scenario"];
    reject_unknown_keys(
        s, "scenario",
        {"n_bs", "n_ris", "n_users", "bs_pos", "ris_pos", "user_center",
         "user_radius", "user_height", "alpha_d", "alpha_r", "alpha_s",
         "beta_d", "beta_r", "beta_s", "extra_loss_db", "penalized_fraction",
         "noise_dbm", "ptx_dbm"});
    ScenarioConfig& sc = cfg.scenario;
    try {
      if (s.contains("n_bs")) sc.n_bs = s["n_bs"].get<int>();
      if (s.contains("n_ris")) sc.n_ris = s["n_ris"].get<int>();
      if (s.contains("n_users")) sc.n_users = s["n_users"].get<int>();
      if (s.contains("bs_pos")) sc.bs_pos = parse_vec3(s["bs_pos"], "bs_pos");
      if (s.contains("ris_pos")) sc.ris_pos = parse_vec3(s["ris_pos"], "ris_pos");
      if (s.contains("user_center")) {
        sc.user_center = parse_vec3(s["user_center"], "user_center");
      }
      if (s.contains("user_radius")) sc.user_radius = s["user_radius"].get<double>();
      if (s.contains("user_height")) sc.user_height = s["user_height"].get<double>();
      if (s.contains("alpha_d")) sc.alpha_d = s["alpha_d"].get<double>();
      if (s.contains("alpha_r")) sc.alpha_r = s["alpha_r"].get<double>();
      if (s.contains("alpha_s")) sc.alpha_s = s["alpha_s"].get<double>();
      if (s.contains("beta_d")) sc.beta_d = s["beta_d"].get<double>();
      if (s.contains("beta_r")) sc.beta_r = s["beta_r"].get<double>();
      if (s.contains("beta_s")) sc.beta_s = s["beta_s"].get<double>();
      if (s.contains("extra_loss_db")) sc.extra_loss_db = s["extra_loss_db"].get<double>();
      if (s.contains("penalized_fraction")) {
        sc.penalized_fraction = s["penalized_fraction"].get<double>();
      }
      if (s.contains("noise_dbm")) sc.noise_dbm = s["noise_dbm"].get<double>();
      if (s.contains("ptx_dbm")) sc.ptx_dbm = s["ptx_dbm"].get<double>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad scenario value: ") + e.what());
    }
    cfg.scenario.validate();
  }
  if (root.contains("sweep")) {
    const json& s = root["sweep"];
    reject_unknown_keys(s, "sweep", {"power_dbm", "elements"});
    try {
      if (s.contains("power_dbm")) {
        cfg.power_dbm = s["power_dbm"].get<std::vector<double>>();
      }
      if (s.contains("elements")) {
        cfg.elements = s["elements"].get<std::vector<double>>();
      }
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad sweep value: ") + e.what());
    }
  }
  return cfg;
}

SimConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

}  // namespace riszf
