#include "riszf/zf_core.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "riszf/linalg.hpp"
#include "riszf/ops_count.hpp"

namespace riszf {

namespace {

CMat select_rows(const CMat& m, std::span<const int> order) {
  CMat out(static_cast<Eigen::Index>(order.size()), m.cols());
  for (std::size_t j = 0; j < order.size(); ++j) {
    out.row(static_cast<Eigen::Index>(j)) = m.row(order[j]);
  }
  return out;
}

void check_order(std::span<const int> order, int n_users) {
  if (order.empty()) throw DomainError("allocation order must be non-empty");
  std::vector<bool> seen(static_cast<std::size_t>(n_users), false);
  for (int u : order) {
    if (u < 0 || u >= n_users) throw DomainError("user index out of range");
    if (seen[static_cast<std::size_t>(u)]) {
      throw DomainError("duplicate user in allocation order");
    }
    seen[static_cast<std::size_t>(u)] = true;
  }
}

}  // namespace

CMat build_d_columns(const ChannelRealization& ch) {
  const int k = ch.n_users();
  const int nr = ch.n_ris();
  CMat d(k, nr + 1);
  ops::add(static_cast<std::uint64_t>(k) * (nr + 1));
  for (int u = 0; u < k; ++u) {
    d.row(u).head(nr) = ch.h_ris_user.row(u).cwiseProduct(ch.a.transpose());
    d(u, nr) = ch.h_direct.row(u) * ch.b;
  }
  return d;
}

CMat build_c(const ChannelRealization& ch, std::span<const int> order) {
  check_order(order, ch.n_users());
  const auto i = static_cast<Eigen::Index>(order.size());
  const CMat h_sel = select_rows(ch.h_direct, order);
  const CVec m = h_sel * ch.b;
  // Project the b direction out of every row, then form the Gram product
  // so the result is PSD by construction.
  const CMat x = h_sel - m * ch.b.adjoint();
  ops::add(static_cast<std::uint64_t>(i) * i * ch.n_bs());
  return x * x.adjoint();
}

SubspaceCache build_subspace_cache(const ChannelRealization& ch) {
  const int k = ch.n_users();
  const int nr = ch.n_ris();
  if (nr + 1 < k) {
    throw ConfigError("subspace cache requires n_ris + 1 >= n_users");
  }
  SubspaceCache cache;
  cache.d_rows = build_d_columns(ch);
  auto qr = linalg::thin_qr(cache.d_rows.adjoint());
  cache.q = std::move(qr.q);
  cache.r = std::move(qr.r);
  cache.n_ris = nr;
  return cache;
}

Allocation Allocation::make(const ChannelRealization& ch,
                            const SubspaceCache& cache,
                            std::vector<int> order) {
  Allocation alloc;
  alloc.c = build_c(ch, order);
  alloc.r_cols.resize(cache.r.rows(), static_cast<Eigen::Index>(order.size()));
  for (std::size_t j = 0; j < order.size(); ++j) {
    alloc.r_cols.col(static_cast<Eigen::Index>(j)) = cache.r.col(order[j]);
  }
  ops::add(static_cast<std::uint64_t>(order.size()) * cache.r.rows());
  alloc.order = std::move(order);
  return alloc;
}

CMat composite_matrix(const ChannelRealization& ch, std::span<const int> order,
                      const CVec& theta) {
  check_order(order, ch.n_users());
  if (theta.size() != ch.n_ris()) {
    throw DimensionError("composite_matrix: theta size mismatch");
  }
  for (Eigen::Index n = 0; n < theta.size(); ++n) {
    if (std::abs(std::abs(theta(n)) - 1.0) > 1e-12) {
      throw DomainError("composite_matrix: theta must be unit-modulus");
    }
  }
  const CMat h_d = select_rows(ch.h_direct, order);
  const CMat h_r = select_rows(ch.h_ris_user, order);
  const CVec g = h_r * theta.cwiseProduct(ch.a);
  return h_d + g * ch.b.adjoint();
}

namespace detail {

CheckedInverse invert_psd_checked(const CMat& c) {
  auto evd = linalg::hermitian_evd(c);
  const auto n = c.rows();
  const double max_eig = evd.eigenvalues(0);
  const double min_eig = evd.eigenvalues(n - 1);
  if (!(max_eig > 0.0) || min_eig <= max_eig / kCondLimit) {
    throw SingularBase("gram base matrix is numerically singular");
  }
  ops::add(static_cast<std::uint64_t>(n) * n * n);
  CheckedInverse out;
  out.inv = evd.eigenvectors *
            evd.eigenvalues.cwiseInverse().asDiagonal() *
            evd.eigenvectors.adjoint();
  out.eigenvalues = std::move(evd.eigenvalues);
  return out;
}

}  // namespace detail

double frob_pinv_weighted(const CMat& c_mat, const CMat& d_or_r,
                          const CVec& theta_bar, const RVec& weights) {
  if ((weights.array() <= 0.0).any()) {
    throw DomainError("frob_pinv_weighted: weights must be > 0");
  }
  if (d_or_r.cols() != theta_bar.size() || d_or_r.rows() != c_mat.rows() ||
      weights.size() != c_mat.rows()) {
    throw DimensionError("frob_pinv_weighted: shape mismatch");
  }
  const CMat cinv = detail::invert_psd_checked(c_mat).inv;
  const CVec q = d_or_r * theta_bar;
  const CVec cq = cinv * q;
  ops::add(static_cast<std::uint64_t>(c_mat.rows()) * c_mat.rows() * 3);
  const double base = (weights.array() * cinv.diagonal().real().array()).sum();
  const double num = (weights.array() * cq.cwiseAbs2().array()).sum();
  const double den = 1.0 + std::real(q.dot(cq));
  return base - num / den;
}

CMat zf_precoder(const CMat& h_c, const PowerAllocation& power) {
  const auto i = h_c.rows();
  if (power.powers.size() != i) {
    throw DimensionError("zf_precoder: power allocation size mismatch");
  }
  Eigen::JacobiSVD<CMat> svd(h_c, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVec& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= 1e-10 * sv(0)) {
    throw DegenerateAllocation("zf_precoder: rank-deficient composite channel");
  }
  const CMat pinv =
      svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().adjoint();
  CMat p_eff(h_c.cols(), i);
  for (Eigen::Index j = 0; j < i; ++j) {
    const double col_norm2 = pinv.col(j).squaredNorm();
    const double lambda = 1.0 / col_norm2;
    p_eff.col(j) = pinv.col(j) * std::sqrt(lambda * power.powers(j));
  }
  return p_eff;
}

double sum_se(const PowerAllocation& power) {
  if (power.gains.size() != power.powers.size()) {
    throw DimensionError("sum_se: gains/powers size mismatch");
  }
  double se = 0.0;
  for (Eigen::Index j = 0; j < power.gains.size(); ++j) {
    const double snr = power.gains(j) * power.powers(j);
    if (snr < 0.0) throw DomainError("sum_se: negative stream SNR");
    se += std::log1p(snr);
  }
  return se / std::log(2.0);
}

}  // namespace riszf
