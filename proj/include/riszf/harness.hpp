#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "riszf/alloc.hpp"
#include "riszf/channel.hpp"

namespace riszf {

enum class SweepAxis { kPtxDbm, kNRis };

std::string axis_name(SweepAxis axis);

struct SweepSpec {
  SweepAxis axis = SweepAxis::kPtxDbm;
  std::vector<double> values;  // nonempty, sorted ascending
  int trials = 1;
  std::vector<std::string> algorithms;  // direct | random | greedy | addone
  ScenarioConfig base;
  std::uint64_t master_seed = 0;
  int threads = 1;     // 0 = hardware concurrency
  bool timing = false; // when false, mean_ms is reported as 0 so output
                       // stays byte-reproducible
  void validate() const;
};

struct TrialResult {
  std::string algorithm;
  double se = 0.0;
  int users = 0;
  double ms = 0.0;
  bool failed = false;
};

// One Monte-Carlo draw, all requested algorithms on the identical
// realization.  Failures are recorded per algorithm, not thrown.
std::vector<TrialResult> run_trial(const ScenarioConfig& cfg,
                                   std::uint64_t seed, std::uint64_t trial,
                                   const std::vector<std::string>& algorithms,
                                   double ptx_dbm, bool timing = false);

struct SweepRecord {
  std::string axis;
  double axis_value = 0.0;
  std::string algorithm;
  double mean_se = 0.0;
  double std_se = 0.0;
  double mean_users = 0.0;
  int trials = 0;  // trials that succeeded
  double mean_ms = 0.0;
};

struct SweepOutcome {
  std::vector<SweepRecord> records;  // sorted by (axis_value, algorithm)
  int failures = 0;
};

// Deterministic given (spec.base, master_seed) regardless of thread
// count: per-trial substreams are keyed by trial index and reduced in
// index order.
SweepOutcome run_sweep(const SweepSpec& spec);

void emit_csv(const SweepOutcome& outcome, std::ostream& os);
void emit_json(const SweepOutcome& outcome, std::ostream& os);
// Writes the chosen format; throws ConfigError on unwritable paths.
void emit_file(const SweepOutcome& outcome, const std::string& format,
               const std::string& path);

// JSON configuration: {"scenario": {...}, "sweep": {"power_dbm": [...],
// "elements": [...]}}.  Unknown keys are rejected.
struct SimConfig {
  ScenarioConfig scenario;
  std::vector<double> power_dbm;
  std::vector<double> elements;
};
SimConfig load_config(const std::string& path);
SimConfig parse_config(const std::string& json_text);

bool valid_algorithm(const std::string& name);

}  // namespace riszf
