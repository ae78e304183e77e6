#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riszf/phase_opt.hpp"

namespace riszf {

struct AlgorithmResult {
  std::string algorithm;
  std::vector<int> order;
  CVec theta;  // empty for the direct-only baseline
  PowerAllocation power;
  double se = 0.0;
  int iterations = 0;
};

struct SelectResult {
  int user = -1;
  double metric = 0.0;
};

// Greedy selection metric over the remaining candidates: extend the
// allocation by each candidate, evaluate the relaxed inverse-Gram-trace
// bound (pseudoinverse variant at full antenna load) and keep the lowest
// value, ties broken by lowest user index.  Returns nullopt when every
// candidate is degenerate.
std::optional<SelectResult> select_next_user(const Allocation& alloc,
                                             const SubspaceCache& cache,
                                             const ChannelRealization& ch,
                                             std::vector<int> candidates);

// Complete greedy search with relaxed evaluation, explicit phase
// finalization, and a conventional zero-forcing precoder at the end.
AlgorithmResult greedy_ris_lisa(const ChannelRealization& ch,
                                const SubspaceCache& cache, double ptx);
AlgorithmResult greedy_ris_lisa(const ChannelRealization& ch, double ptx);

// Direct-channel-only greedy zero-forcing allocation.
AlgorithmResult lisa_direct(const ChannelRealization& ch, double ptx);

// Two-candidate search exploiting that the surface adds at most one user
// on top of the direct-channel allocation.
AlgorithmResult add_one_ris_lisa(const ChannelRealization& ch,
                                 const SubspaceCache& cache, double ptx);
AlgorithmResult add_one_ris_lisa(const ChannelRealization& ch, double ptx);

// Uniformly random phases, then the direct-style greedy allocation on
// the resulting composite channel.
AlgorithmResult random_phase_baseline(const ChannelRealization& ch, double ptx,
                                      std::uint64_t seed);

namespace detail {

// Greedy zero-forcing allocation on an explicit channel matrix:
// candidates are ranked by the inverse-Gram trace and the allocation
// stops when the waterfilled spectral efficiency no longer improves.
struct LisaOutcome {
  std::vector<int> order;
  PowerAllocation power;
  double se = 0.0;
};
LisaOutcome lisa_on_matrix(const CMat& h_all, double ptx);

// Final reporting path shared by every algorithm: pseudoinverse-column
// gains on the explicit (composite) channel, waterfilling, and removal
// of zero-power streams until stable.
struct ZfReport {
  std::vector<int> order;
  PowerAllocation power;
  double se = 0.0;
};
ZfReport zf_report(const ChannelRealization& ch, std::vector<int> order,
                   const CVec& theta, double ptx);

}  // namespace detail

}  // namespace riszf
