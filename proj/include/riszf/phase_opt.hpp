#pragma once

#include <vector>

#include "riszf/zf_core.hpp"

namespace riszf {

// Phase configuration, either as subspace coordinates of the relaxed
// optimizer (||u||^2 = n_ris + 1) or as an explicit unit-modulus vector
// with trailing entry pinned to 1.
struct PhaseState {
  enum class Mode { kRelaxedSubspace, kExplicit };
  Mode mode = Mode::kRelaxedSubspace;
  CVec u;          // n_users
  CVec theta_bar;  // n_ris + 1
  CVec v;          // i, principal direction of the latest relaxed step
};

// Alternating-optimization bookkeeping for one allocation.
struct EvalState {
  RVec gains_prev;   // gains of the accepted iterate
  RVec gamma_tilde;  // per-stream weight diag for the next phase step
  double se = 0.0;
  int iterations = 0;
};

// Spectral-norm-relaxed value of the inverse-Gram trace minimized over
// the phase vector: tr(C^{-1}) - lambda_max(A) with
// A = C^{-1} - (C + (n_ris+1) R^H R)^{-1}.
struct RelaxedMetricResult {
  double metric;
  CMat a_mat;
};
RelaxedMetricResult relaxed_metric(const CMat& c_mat, const CMat& rr,
                                   int n_ris);

// Same objective when C has exactly one null eigenvalue (full antenna
// load).  Only the metric value; no eigenvector of the phase problem is
// formed.
double singular_relaxed_metric(const CMat& c_mat, const CMat& r_cols,
                               int n_ris);

// One weighted relaxed phase step: minimizes the weighted inverse-Gram
// trace over the norm-constrained subspace vector and reports the
// channel gains at the optimizer.  ris_active is false when the update
// direction carries no energy (then gains fall back to diag(C^{-1})).
struct SubspaceStep {
  double objective;
  RVec gains;
  CVec v;  // unit principal direction (zero when !ris_active)
  bool ris_active = true;
};
SubspaceStep subspace_eval_step(const CMat& c_mat, const CMat& rr,
                                const RVec& gamma_tilde, int n_ris);

// Subspace coordinates of the relaxed optimizer reconstructed from the
// principal direction v of the preceding step; ||u|| = sqrt(n_ris + 1).
CVec recover_u(const CMat& c_mat, const CMat& r_cols, const RVec& gamma_tilde,
               const CVec& v, int n_ris);

// Relaxed phase step for the singular base case (one null eigenvalue).
// Returns the closed-form optimizer in subspace coordinates.
struct SingularStep {
  double objective;
  CVec u;
  RVec gains;
};
SingularStep singular_relaxed_step(const CMat& c_mat, const CMat& r_cols,
                                   const RVec& gamma_tilde, int n_ris);

// Waterfilling: powers = max(0, mu - 1/gain) with mu meeting the budget.
RVec waterfill(const RVec& gains, double ptx);

// Elementwise projection onto unit modulus followed by the global phase
// rotation that pins the trailing entry to exactly 1.  Zero entries map
// to phase 0.
CVec project_to_unit_modulus(const CVec& raw);
CVec project_theta(const CMat& q_mat, const CVec& u);

// One pass of per-element closed-form phase updates on the explicit
// vector; the weighted inverse-Gram trace never increases.  The trailing
// entry stays 1.
CVec elementwise_sweep(const CMat& c_mat, const CMat& d_rows,
                       const CVec& theta_bar, const RVec& gamma_tilde);

// Channel gains at an explicit phase vector (equal to the inverse
// squared column norms of the composite pseudoinverse).
RVec gains_explicit(const CMat& c_mat, const CMat& d_rows,
                    const CVec& theta_bar);

// Full relaxed alternating optimization of one allocation: phase step,
// waterfilling, removal of zero-power users, until the spectral
// efficiency settles.  Throws DegenerateAllocation when no iterate is
// feasible.
struct EvalOutcome {
  double se = 0.0;
  std::vector<int> order;  // surviving users
  EvalState state;
  PowerAllocation power;
  PhaseState phase;
};
// se_trace, when given, receives every iterate's spectral efficiency
// together with the active user count (diagnostic hook for the
// monotonicity suites).  A drop in `users` marks a deallocation restart:
// the weight matrix re-initializes there and a fresh monotone chain
// begins.
struct EvalTracePoint {
  double se;
  int users;
};
EvalOutcome evaluate_allocation(const Allocation& alloc,
                                const SubspaceCache& cache,
                                const ChannelRealization& ch, double ptx,
                                std::vector<EvalTracePoint>* se_trace = nullptr);

// Explicit-dimension refinement: project the relaxed phases onto unit
// modulus, then alternate one elementwise sweep with waterfilling until
// the spectral efficiency settles.
struct FinalizeOutcome {
  CVec theta;  // n_ris
  std::vector<int> order;
  PowerAllocation power;
  double se = 0.0;
  int iterations = 0;
};
FinalizeOutcome finalize_phases(const EvalOutcome& eval,
                                const SubspaceCache& cache,
                                const ChannelRealization& ch, double ptx);

namespace detail {

// Extremum of (a1 + 2 Re(b1 z)) / (a2 + 2 Re(b2 z)) over unit-modulus z.
// Stationary points satisfy Im(z (a2 b1 - a1 b2)) = -2 Im(b1 conj(b2));
// the two circle solutions plus alignment fallbacks are evaluated and
// the best feasible one returned.  `current` is always a candidate, so
// the chosen value never regresses.
Complex best_unit_phase(double a1, Complex b1, double a2, Complex b2,
                        Complex current, bool maximize);

}  // namespace detail

}  // namespace riszf
