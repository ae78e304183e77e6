#pragma once

#include "riszf/types.hpp"

namespace riszf::linalg {

// Full Hermitian eigendecomposition, eigenvalues sorted descending.
// Eigenvector column j pairs with eigenvalues[j].
struct HermitianEig {
  RVec eigenvalues;
  CMat eigenvectors;
};

// The input is symmetrized as (A + A^H)/2 before factorization.
// Throws DimensionError for non-square input.
HermitianEig hermitian_evd(const CMat& a);

// Eigenvalues only (descending), no vectors.
RVec hermitian_eigenvalues(const CMat& a);

struct ThinQr {
  CMat q;  // m x n, Q^H Q = I
  CMat r;  // n x n, upper triangular
};

// Thin QR factorization of an m x n matrix, m >= n.
ThinQr thin_qr(const CMat& m);

// Moore-Penrose pseudoinverse via SVD.  Singular values below
// 1e-12 * sigma_max are treated as zero.
CMat pseudoinverse(const CMat& m);

struct EigPair {
  double value;
  CVec vector;  // unit norm
};

// Largest eigenpair of A * diag(g) for Hermitian PSD A and strictly
// positive g, computed through the Hermitian similarity transform
// diag(g)^{1/2} A diag(g)^{1/2}.  Throws DomainError if any g <= 0.
EigPair principal_eigpair_psd_weighted(const CMat& a, const RVec& g);

}  // namespace riszf::linalg
