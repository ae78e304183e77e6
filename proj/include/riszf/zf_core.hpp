#pragma once

#include <span>
#include <vector>

#include "riszf/channel.hpp"
#include "riszf/types.hpp"

namespace riszf {

// Per-user reflected/direct coefficient rows stacked over all users:
// row k = [h_{r,k}^H diag(a), h_{d,k}^H b], shape n_users x (n_ris + 1).
CMat build_d_columns(const ChannelRealization& ch);

// Gram base of the allocated direct channels with the rank-one
// station-surface direction projected out:
// H_d,sel (I - b b^H) H_d,sel^H.  PSD by construction.
CMat build_c(const ChannelRealization& ch, std::span<const int> order);

// Thin QR of the stacked coefficient rows, computed once per
// realization.  Selecting columns of r for the allocated users
// reproduces their Gram products without touching the n_ris dimension.
struct SubspaceCache {
  CMat d_rows;  // n_users x (n_ris + 1)
  CMat q;       // (n_ris + 1) x n_users, Q^H Q = I
  CMat r;       // n_users x n_users, upper triangular
  int n_ris = 0;
};

SubspaceCache build_subspace_cache(const ChannelRealization& ch);

// An ordered user selection with its cached Gram blocks.
struct Allocation {
  std::vector<int> order;
  CMat c;       // i x i
  CMat r_cols;  // n_users x i, columns of the cached R

  int size() const { return static_cast<int>(order.size()); }

  static Allocation make(const ChannelRealization& ch,
                         const SubspaceCache& cache, std::vector<int> order);
};

// Per-stream channel gains and transmit powers under a total budget.
struct PowerAllocation {
  RVec gains;   // lambda_j, noise-normalized
  RVec powers;  // gamma_j >= 0, sum <= ptx
  double ptx = 0.0;
};

// Composite channel of the selected users at an explicit unit-modulus
// phase vector.  Throws DomainError when theta is not unit-modulus.
CMat composite_matrix(const ChannelRealization& ch, std::span<const int> order,
                      const CVec& theta);

// tr((C + D tb tb^H D^H)^{-1} diag(weights)) evaluated through the
// matrix inversion lemma; with unit weights this is the squared
// Frobenius norm of the composite pseudoinverse.  d_or_r may be the
// explicit coefficient rows or their subspace compression, as long as
// d_or_r * theta_bar is the rank-one update direction.
// Throws SingularBase when cond(C) exceeds kCondLimit.
double frob_pinv_weighted(const CMat& c_mat, const CMat& d_or_r,
                          const CVec& theta_bar, const RVec& weights);

// Zero-forcing precoder with unit-norm columns rescaled by the gains
// and powers: H^+ diag(lambda)^{1/2} diag(gamma)^{1/2}, where
// lambda_j = 1 / ||H^+ e_j||^2.  Throws DegenerateAllocation for a
// rank-deficient channel.
CMat zf_precoder(const CMat& h_c, const PowerAllocation& power);

// Sum spectral efficiency in bits/s/Hz.
double sum_se(const PowerAllocation& power);

namespace detail {

// Eigendecomposition-based inverse of a Hermitian PSD matrix with a
// conditioning gate: throws SingularBase when cond exceeds kCondLimit.
struct CheckedInverse {
  CMat inv;
  RVec eigenvalues;  // descending
};
CheckedInverse invert_psd_checked(const CMat& c);

}  // namespace detail

}  // namespace riszf
