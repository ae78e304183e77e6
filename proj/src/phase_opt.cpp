#include "riszf/phase_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>

#include "riszf/linalg.hpp"
#include "riszf/ops_count.hpp"

namespace riszf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_weights(const RVec& gamma_tilde, Eigen::Index n) {
  if (gamma_tilde.size() != n) {
    throw DimensionError("weight vector size mismatch");
  }
  if ((gamma_tilde.array() <= 0.0).any()) {
    throw DomainError("weights must be strictly positive");
  }
}

// Inverse of C + beta * R^H R via Cholesky; the sum is Hermitian
// positive definite whenever C passes the conditioning gate.
CMat inverse_shifted(const CMat& c, const CMat& rr, double beta) {
  const auto n = c.rows();
  ops::add(static_cast<std::uint64_t>(n) * n * n);
  const CMat shifted = c + beta * rr;
  Eigen::LLT<CMat> llt(shifted);
  if (llt.info() != Eigen::Success) {
    throw DegenerateAllocation("shifted gram base is not positive definite");
  }
  return llt.solve(CMat::Identity(n, n));
}

struct SingularParts {
  CVec w;        // null direction of the weighted base
  CMat pinv;     // pseudoinverse of the weighted base
  double trace_pinv = 0.0;
};

// Weighted base C~ = G^{-1/2} C G^{-1/2} must have exactly one null
// eigenvalue for the pseudoinverse reformulation to apply.
SingularParts split_singular_base(const CMat& c_weighted) {
  auto evd = linalg::hermitian_evd(c_weighted);
  const auto n = c_weighted.rows();
  const double trace = evd.eigenvalues.sum();
  const double tol = 1e-10 * trace + 1e-300;
  int nulls = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (evd.eigenvalues(j) < tol) ++nulls;
  }
  if (nulls != 1) {
    throw DegenerateAllocation(
        "singular path requires exactly one null eigenvalue");
  }
  SingularParts parts;
  parts.w = evd.eigenvectors.col(n - 1);
  RVec inv = RVec::Zero(n);
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    inv(j) = 1.0 / evd.eigenvalues(j);
    parts.trace_pinv += inv(j);
  }
  parts.pinv = evd.eigenvectors * inv.asDiagonal() * evd.eigenvectors.adjoint();
  ops::add(static_cast<std::uint64_t>(n) * n * n);
  return parts;
}

struct SingularCore {
  double objective;
  CVec u;
  double reach;  // z^H N0^{-1} z, energy reaching the null direction
};

SingularCore singular_core(const CMat& c_mat, const CMat& r_cols,
                           const RVec& gamma_tilde, int n_ris) {
  const auto i = c_mat.rows();
  check_weights(gamma_tilde, i);
  if (r_cols.cols() != i) {
    throw DimensionError("singular step: r_cols shape mismatch");
  }
  const double beta = static_cast<double>(n_ris) + 1.0;
  const RVec g_isqrt = gamma_tilde.array().rsqrt();
  const CMat c_w = 0.5 * (g_isqrt.asDiagonal() * c_mat * g_isqrt.asDiagonal() +
                          (g_isqrt.asDiagonal() * c_mat * g_isqrt.asDiagonal())
                              .adjoint());
  const SingularParts parts = split_singular_base(c_w);

  const auto k = r_cols.rows();
  const CMat r_w = r_cols * g_isqrt.asDiagonal();  // k x i
  const CMat m_u = r_w * parts.pinv * r_w.adjoint();
  const CVec z = r_w * parts.w;
  ops::add(static_cast<std::uint64_t>(k) * k * i + k * i * i);

  CMat n0 = m_u;
  n0.diagonal().array() += 1.0 / beta;
  Eigen::LLT<CMat> llt(0.5 * (n0 + n0.adjoint()));
  if (llt.info() != Eigen::Success) {
    throw DegenerateAllocation("singular step: subspace system not PD");
  }
  const CVec x = llt.solve(z);
  ops::add(static_cast<std::uint64_t>(k) * k * k);
  const double reach = std::real(z.dot(x));
  if (!(reach > 1e-300)) {
    throw DegenerateAllocation(
        "singular step: null direction unreachable through the surface");
  }
  SingularCore core;
  core.reach = reach;
  core.objective = parts.trace_pinv + 1.0 / reach;
  core.u = x * (std::sqrt(beta) / x.norm());
  return core;
}

}  // namespace

RelaxedMetricResult relaxed_metric(const CMat& c_mat, const CMat& rr,
                                   int n_ris) {
  const auto i = c_mat.rows();
  if (rr.rows() != i || rr.cols() != i) {
    throw DimensionError("relaxed_metric: shape mismatch");
  }
  const double beta = static_cast<double>(n_ris) + 1.0;
  const auto cinv = detail::invert_psd_checked(c_mat);
  const CMat binv = inverse_shifted(c_mat, rr, beta);
  RelaxedMetricResult out;
  out.a_mat = 0.5 * ((cinv.inv - binv) + (cinv.inv - binv).adjoint());
  const RVec eigs = linalg::hermitian_eigenvalues(out.a_mat);
  const double lam_max = eigs(0);
  if (eigs(i - 1) < -1e-10 * (1.0 + std::abs(lam_max))) {
    throw DegenerateAllocation("relaxed_metric: update matrix is not PSD");
  }
  out.metric = cinv.inv.diagonal().real().sum() - std::max(lam_max, 0.0);
  return out;
}

double singular_relaxed_metric(const CMat& c_mat, const CMat& r_cols,
                               int n_ris) {
  const RVec ones = RVec::Ones(c_mat.rows());
  return singular_core(c_mat, r_cols, ones, n_ris).objective;
}

SubspaceStep subspace_eval_step(const CMat& c_mat, const CMat& rr,
                                const RVec& gamma_tilde, int n_ris) {
  const auto i = c_mat.rows();
  check_weights(gamma_tilde, i);
  if (rr.rows() != i || rr.cols() != i) {
    throw DimensionError("subspace_eval_step: shape mismatch");
  }
  const double beta = static_cast<double>(n_ris) + 1.0;
  const auto cinv = detail::invert_psd_checked(c_mat);
  const CMat binv = inverse_shifted(c_mat, rr, beta);
  const CMat a_mat = 0.5 * ((cinv.inv - binv) + (cinv.inv - binv).adjoint());

  const RVec cinv_diag = cinv.inv.diagonal().real();
  const double base = (gamma_tilde.array() * cinv_diag.array()).sum();

  const auto pair = linalg::principal_eigpair_psd_weighted(a_mat, gamma_tilde);
  if (pair.value < -1e-10 * (1.0 + std::abs(base))) {
    throw DegenerateAllocation("subspace step: update matrix is not PSD");
  }
  const double mu = std::max(pair.value, 0.0);

  SubspaceStep step;
  step.objective = base - mu;

  if (mu <= 1e-13 * std::max(base, 1e-300)) {
    // The surface contributes nothing along any direction; gains reduce
    // to the plain inverse diagonal.
    step.ris_active = false;
    step.v = CVec::Zero(i);
    step.gains = cinv_diag.cwiseInverse();
    return step;
  }
  step.v = pair.vector;

  // Exact gains at the relaxed optimizer: the rank-one correction of the
  // inverse is reconstructed from the principal direction, all within
  // the compressed Gram blocks.
  const CVec gv = gamma_tilde.asDiagonal() * step.v;
  const CVec w = binv * gv;
  const CVec rw = rr * w;
  ops::add(static_cast<std::uint64_t>(i) * i * 4);
  const double u0_norm2 = std::real(w.dot(rw));
  if (!(u0_norm2 > 1e-300)) {
    throw DegenerateAllocation("subspace step: degenerate update direction");
  }
  const double scale = beta / u0_norm2;
  const CVec cinv_rw = cinv.inv * rw;
  const CVec y = cinv_rw * std::sqrt(scale);
  const double s = std::real(rw.dot(cinv_rw)) * scale;

  step.gains.resize(i);
  for (Eigen::Index j = 0; j < i; ++j) {
    const double den = cinv_diag(j) - std::norm(y(j)) / (1.0 + s);
    if (!(den > 0.0)) {
      throw DegenerateAllocation("subspace step: non-positive channel gain");
    }
    step.gains(j) = 1.0 / den;
  }
  return step;
}

CVec recover_u(const CMat& c_mat, const CMat& r_cols, const RVec& gamma_tilde,
               const CVec& v, int n_ris) {
  const auto i = c_mat.rows();
  check_weights(gamma_tilde, i);
  if (v.size() != i || r_cols.cols() != i) {
    throw DimensionError("recover_u: shape mismatch");
  }
  const double beta = static_cast<double>(n_ris) + 1.0;
  const CMat rr = r_cols.adjoint() * r_cols;
  const CMat binv = inverse_shifted(c_mat, rr, beta);
  const CVec u0 = r_cols * (binv * (gamma_tilde.asDiagonal() * v));
  const double norm = u0.norm();
  if (!(norm > 1e-300)) {
    throw DegenerateAllocation("recover_u: degenerate direction");
  }
  return u0 * (std::sqrt(beta) / norm);
}

SingularStep singular_relaxed_step(const CMat& c_mat, const CMat& r_cols,
                                   const RVec& gamma_tilde, int n_ris) {
  const auto core = singular_core(c_mat, r_cols, gamma_tilde, n_ris);
  SingularStep step;
  step.objective = core.objective;
  step.u = core.u;

  // Gains from the now-invertible updated Gram matrix.
  const auto i = c_mat.rows();
  const CVec q_u = r_cols.adjoint() * core.u;
  CMat gram = c_mat + q_u * q_u.adjoint();
  auto evd = linalg::hermitian_evd(gram);
  if (!(evd.eigenvalues(i - 1) > evd.eigenvalues(0) * 1e-14)) {
    throw DegenerateAllocation("singular step: updated gram not invertible");
  }
  const CMat ginv = evd.eigenvectors *
                    evd.eigenvalues.cwiseInverse().asDiagonal() *
                    evd.eigenvectors.adjoint();
  step.gains.resize(i);
  for (Eigen::Index j = 0; j < i; ++j) {
    const double den = std::real(ginv(j, j));
    if (!(den > 0.0)) {
      throw DegenerateAllocation("singular step: non-positive channel gain");
    }
    step.gains(j) = 1.0 / den;
  }
  return step;
}

RVec waterfill(const RVec& gains, double ptx) {
  const auto n = gains.size();
  if (n == 0) throw DomainError("waterfill: empty gains");
  if ((gains.array() <= 0.0).any()) {
    throw DomainError("waterfill: gains must be > 0");
  }
  if (!(ptx > 0.0)) throw DomainError("waterfill: budget must be > 0");

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  const RVec inv_gain = gains.cwiseInverse();
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return inv_gain(a) < inv_gain(b);
  });

  RVec prefix(n);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    acc += inv_gain(idx[static_cast<std::size_t>(j)]);
    prefix(j) = acc;
  }

  // Largest active set whose water level clears its worst stream.
  Eigen::Index active = 1;
  double mu = ptx + prefix(0);
  for (Eigen::Index k = n; k >= 1; --k) {
    const double level = (ptx + prefix(k - 1)) / static_cast<double>(k);
    if (level > inv_gain(idx[static_cast<std::size_t>(k - 1)])) {
      active = k;
      mu = level;
      break;
    }
  }

  RVec powers = RVec::Zero(n);
  for (Eigen::Index j = 0; j < active; ++j) {
    const auto which = idx[static_cast<std::size_t>(j)];
    powers(which) = mu - inv_gain(which);
  }
  return powers;
}

CVec project_to_unit_modulus(const CVec& raw) {
  const auto n = raw.size();
  if (n == 0) throw DimensionError("project_to_unit_modulus: empty vector");
  CVec out(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out(j) = std::polar(1.0, std::arg(raw(j)));
  }
  const Complex rot = std::conj(out(n - 1));
  out *= rot;
  out(n - 1) = 1.0;
  return out;
}

CVec project_theta(const CMat& q_mat, const CVec& u) {
  if (q_mat.cols() != u.size()) {
    throw DimensionError("project_theta: shape mismatch");
  }
  return project_to_unit_modulus(q_mat * u);
}

namespace detail {

Complex best_unit_phase(double a1, Complex b1, double a2, Complex b2,
                        Complex current, bool maximize) {
  const auto ratio = [&](Complex z) -> double {
    const double num = a1 + 2.0 * std::real(b1 * z);
    const double den = a2 + 2.0 * std::real(b2 * z);
    if (den <= 1e-300) return maximize ? -kInf : kInf;
    return num / den;
  };

  Complex best = current / std::max(std::abs(current), 1e-300);
  double best_val = ratio(best);

  const auto consider = [&](Complex z) {
    const double m = std::abs(z);
    if (!(m > 0.0)) return;
    z /= m;
    const double val = ratio(z);
    if (maximize ? (val > best_val) : (val < best_val)) {
      best_val = val;
      best = z;
    }
  };

  const Complex g = a2 * b1 - a1 * b2;
  const double y0 = -2.0 * std::imag(b1 * std::conj(b2));
  const double g2 = std::norm(g);
  if (g2 > 0.0) {
    const double x = std::sqrt(std::max(0.0, g2 - y0 * y0));
    consider(Complex(x, y0) / g);
    consider(Complex(-x, y0) / g);
  }
  // Alignment fallbacks cover the degenerate stationarity cases.
  if (std::abs(b1) > 0.0) {
    consider(std::conj(b1) / std::abs(b1));
    consider(-std::conj(b1) / std::abs(b1));
  }
  if (std::abs(b2) > 0.0) {
    consider(std::conj(b2) / std::abs(b2));
    consider(-std::conj(b2) / std::abs(b2));
  }
  return best;
}

}  // namespace detail

namespace {

void check_theta_bar(const CVec& theta_bar, Eigen::Index cols) {
  if (theta_bar.size() != cols) {
    throw DimensionError("theta_bar size mismatch");
  }
  for (Eigen::Index j = 0; j < theta_bar.size(); ++j) {
    if (std::abs(std::abs(theta_bar(j)) - 1.0) > 1e-9) {
      throw DomainError("theta_bar must be unit-modulus");
    }
  }
  if (std::abs(theta_bar(theta_bar.size() - 1) - Complex(1.0, 0.0)) > 1e-9) {
    throw DomainError("theta_bar must end with 1");
  }
}

CVec sweep_regular(const CMat& cinv, const CMat& d_rows, CVec theta_bar,
                   const RVec& gamma_tilde) {
  const CMat f1 = cinv * gamma_tilde.asDiagonal() * cinv;
  const CMat& f2 = cinv;
  CVec t = d_rows * theta_bar;
  const auto n_elems = d_rows.cols() - 1;  // trailing coordinate is pinned
  for (Eigen::Index n = 0; n < n_elems; ++n) {
    const CVec dn = d_rows.col(n);
    const Complex old = theta_bar(n);
    const CVec s = t - old * dn;
    const CVec f1dn = f1 * dn;
    const CVec f2dn = f2 * dn;
    const double a1 = std::real(s.dot(f1 * s)) + std::real(dn.dot(f1dn));
    const Complex b1 = s.dot(f1dn);
    const double a2 =
        1.0 + std::real(s.dot(f2 * s)) + std::real(dn.dot(f2dn));
    const Complex b2 = s.dot(f2dn);
    const Complex next =
        detail::best_unit_phase(a1, b1, a2, b2, old, /*maximize=*/true);
    t += (next - old) * dn;
    theta_bar(n) = next;
  }
  return theta_bar;
}

CVec sweep_singular(const CMat& c_mat, const CMat& d_rows, CVec theta_bar,
                    const RVec& gamma_tilde) {
  const RVec g_isqrt = gamma_tilde.array().rsqrt();
  const CMat c_w =
      0.5 * (g_isqrt.asDiagonal() * c_mat * g_isqrt.asDiagonal() +
             (g_isqrt.asDiagonal() * c_mat * g_isqrt.asDiagonal()).adjoint());
  const SingularParts parts = split_singular_base(c_w);
  const CMat d_w = g_isqrt.asDiagonal() * d_rows;
  CVec t = d_w * theta_bar;
  const auto n_elems = d_rows.cols() - 1;
  for (Eigen::Index n = 0; n < n_elems; ++n) {
    const CVec dn = d_w.col(n);
    const Complex old = theta_bar(n);
    const CVec s = t - old * dn;
    const CVec pdn = parts.pinv * dn;
    const double a1 =
        1.0 + std::real(s.dot(parts.pinv * s)) + std::real(dn.dot(pdn));
    const Complex b1 = s.dot(pdn);
    const Complex c0 = parts.w.dot(s);
    const Complex c1 = parts.w.dot(dn);
    const double a2 = std::norm(c0) + std::norm(c1);
    const Complex b2 = std::conj(c0) * c1;
    const Complex next =
        detail::best_unit_phase(a1, b1, a2, b2, old, /*maximize=*/false);
    t += (next - old) * dn;
    theta_bar(n) = next;
  }
  return theta_bar;
}

}  // namespace

CVec elementwise_sweep(const CMat& c_mat, const CMat& d_rows,
                       const CVec& theta_bar, const RVec& gamma_tilde) {
  check_theta_bar(theta_bar, d_rows.cols());
  check_weights(gamma_tilde, c_mat.rows());
  if (d_rows.rows() != c_mat.rows()) {
    throw DimensionError("elementwise_sweep: shape mismatch");
  }
  try {
    const CMat cinv = detail::invert_psd_checked(c_mat).inv;
    return sweep_regular(cinv, d_rows, theta_bar, gamma_tilde);
  } catch (const SingularBase&) {
    return sweep_singular(c_mat, d_rows, theta_bar, gamma_tilde);
  }
}

RVec gains_explicit(const CMat& c_mat, const CMat& d_rows,
                    const CVec& theta_bar) {
  check_theta_bar(theta_bar, d_rows.cols());
  const auto i = c_mat.rows();
  const CVec q = d_rows * theta_bar;
  try {
    const CMat cinv = detail::invert_psd_checked(c_mat).inv;
    const CVec cq = cinv * q;
    const double den = 1.0 + std::real(q.dot(cq));
    RVec gains(i);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double d = std::real(cinv(j, j)) - std::norm(cq(j)) / den;
      if (!(d > 0.0)) {
        throw DegenerateAllocation("gains_explicit: non-positive gain");
      }
      gains(j) = 1.0 / d;
    }
    return gains;
  } catch (const SingularBase&) {
    CMat gram = c_mat + q * q.adjoint();
    auto evd = linalg::hermitian_evd(gram);
    if (!(evd.eigenvalues(i - 1) > evd.eigenvalues(0) * 1e-14)) {
      throw DegenerateAllocation("gains_explicit: gram not invertible");
    }
    const CMat ginv = evd.eigenvectors *
                      evd.eigenvalues.cwiseInverse().asDiagonal() *
                      evd.eigenvectors.adjoint();
    return ginv.diagonal().real().cwiseInverse();
  }
}

namespace {

CVec neutral_u(const SubspaceCache& cache) {
  return cache.q.adjoint() * CVec::Ones(cache.q.rows());
}

struct RebuiltBlocks {
  CMat c;
  CMat r_cols;
  CMat rr;
};

RebuiltBlocks rebuild_blocks(const ChannelRealization& ch,
                             const SubspaceCache& cache,
                             const std::vector<int>& order) {
  RebuiltBlocks blocks;
  blocks.c = build_c(ch, order);
  blocks.r_cols.resize(cache.r.rows(),
                       static_cast<Eigen::Index>(order.size()));
  for (std::size_t j = 0; j < order.size(); ++j) {
    blocks.r_cols.col(static_cast<Eigen::Index>(j)) = cache.r.col(order[j]);
  }
  blocks.rr = blocks.r_cols.adjoint() * blocks.r_cols;
  return blocks;
}

}  // namespace

EvalOutcome evaluate_allocation(const Allocation& alloc,
                                const SubspaceCache& cache,
                                const ChannelRealization& ch, double ptx,
                                std::vector<EvalTracePoint>* se_trace) {
  if (!(ptx > 0.0)) throw DomainError("evaluate_allocation: ptx must be > 0");
  if (alloc.order.empty()) {
    throw DomainError("evaluate_allocation: empty allocation");
  }
  constexpr int kMaxIters = 500;
  constexpr double kRelTol = 1e-8;

  std::vector<int> order = alloc.order;
  CMat c = alloc.c;
  CMat r_cols = alloc.r_cols;
  CMat rr = r_cols.adjoint() * r_cols;
  RVec gamma_tilde =
      RVec::Constant(alloc.size(), ptx / static_cast<double>(alloc.size()));

  EvalOutcome best;
  best.se = -kInf;
  bool have_best = false;
  double se_prev = -kInf;
  int iter = 0;

  for (; iter < kMaxIters; ++iter) {
    const auto i = static_cast<Eigen::Index>(order.size());
    RVec gains;
    CVec u;
    CVec v;
    try {
      try {
        SubspaceStep step =
            subspace_eval_step(c, rr, gamma_tilde, cache.n_ris);
        gains = std::move(step.gains);
        v = std::move(step.v);
        u = step.ris_active
                ? recover_u(c, r_cols, gamma_tilde, v, cache.n_ris)
                : neutral_u(cache);
      } catch (const SingularBase&) {
        SingularStep step =
            singular_relaxed_step(c, r_cols, gamma_tilde, cache.n_ris);
        gains = std::move(step.gains);
        u = std::move(step.u);
        v = CVec::Zero(i);
      }
    } catch (const DegenerateAllocation&) {
      if (have_best) break;
      throw;
    }

    const RVec powers = waterfill(gains, ptx);
    PowerAllocation pa{gains, powers, ptx};
    const double se = sum_se(pa);
    if (se_trace != nullptr) {
      se_trace->push_back({se, static_cast<int>(order.size())});
    }

    std::vector<int> survivors;
    std::vector<Eigen::Index> kept;
    for (Eigen::Index j = 0; j < i; ++j) {
      if (powers(j) > 0.0) {
        survivors.push_back(order[static_cast<std::size_t>(j)]);
        kept.push_back(j);
      }
    }

    if (se > best.se) {
      // Record the active streams of this iterate; zero-power users carry
      // no spectral efficiency and drop out of the snapshot.
      best.se = se;
      best.order = survivors;
      best.power.gains.resize(static_cast<Eigen::Index>(kept.size()));
      best.power.powers.resize(static_cast<Eigen::Index>(kept.size()));
      for (std::size_t j = 0; j < kept.size(); ++j) {
        best.power.gains(static_cast<Eigen::Index>(j)) = gains(kept[j]);
        best.power.powers(static_cast<Eigen::Index>(j)) = powers(kept[j]);
      }
      best.power.ptx = ptx;
      best.state.gains_prev = best.power.gains;
      best.state.gamma_tilde =
          best.power.gains.cwiseProduct(best.power.powers);
      best.state.se = se;
      best.phase.mode = PhaseState::Mode::kRelaxedSubspace;
      best.phase.u = u;
      best.phase.v = v;
      have_best = true;
    }

    if (static_cast<Eigen::Index>(survivors.size()) < i) {
      // Users that received no power leave the allocation; the blocks are
      // rebuilt and the weights restart at the scaled identity.
      order = std::move(survivors);
      auto blocks = rebuild_blocks(ch, cache, order);
      c = std::move(blocks.c);
      r_cols = std::move(blocks.r_cols);
      rr = std::move(blocks.rr);
      gamma_tilde =
          RVec::Constant(static_cast<Eigen::Index>(order.size()),
                         ptx / static_cast<double>(order.size()));
      se_prev = se;
      continue;
    }

    if (std::isfinite(se_prev) &&
        std::abs(se - se_prev) <= kRelTol * std::max(1.0, std::abs(se_prev))) {
      ++iter;
      break;
    }
    se_prev = se;
    gamma_tilde = gains.cwiseProduct(powers);
  }

  if (!have_best) {
    throw DegenerateAllocation("evaluate_allocation: no feasible iterate");
  }
  best.state.iterations = iter;
  return best;
}

FinalizeOutcome finalize_phases(const EvalOutcome& eval,
                                const SubspaceCache& cache,
                                const ChannelRealization& ch, double ptx) {
  constexpr int kMaxIters = 200;
  constexpr double kSeTol = 1e-6;

  std::vector<int> order = eval.order;
  if (order.empty()) {
    throw DomainError("finalize_phases: empty allocation");
  }
  CMat c = build_c(ch, order);
  CMat d_alloc(static_cast<Eigen::Index>(order.size()), cache.d_rows.cols());
  for (std::size_t j = 0; j < order.size(); ++j) {
    d_alloc.row(static_cast<Eigen::Index>(j)) = cache.d_rows.row(order[j]);
  }

  RVec gamma_tilde = eval.state.gamma_tilde;
  CVec theta_bar = project_theta(cache.q, eval.phase.u);

  FinalizeOutcome out;
  double se_prev = -kInf;
  int iter = 0;
  for (; iter < kMaxIters; ++iter) {
    theta_bar = elementwise_sweep(c, d_alloc, theta_bar, gamma_tilde);
    RVec gains = gains_explicit(c, d_alloc, theta_bar);
    RVec powers = waterfill(gains, ptx);
    PowerAllocation pa{gains, powers, ptx};
    const double se = sum_se(pa);

    std::vector<int> survivors;
    std::vector<Eigen::Index> kept;
    for (Eigen::Index j = 0; j < powers.size(); ++j) {
      if (powers(j) > 0.0) {
        survivors.push_back(order[static_cast<std::size_t>(j)]);
        kept.push_back(j);
      }
    }
    if (survivors.size() < order.size()) {
      order = std::move(survivors);
      if (order.empty()) {
        throw DegenerateAllocation("finalize_phases: all users deallocated");
      }
      c = build_c(ch, order);
      CMat d_new(static_cast<Eigen::Index>(order.size()), d_alloc.cols());
      RVec g_new(static_cast<Eigen::Index>(order.size()));
      for (std::size_t j = 0; j < kept.size(); ++j) {
        d_new.row(static_cast<Eigen::Index>(j)) = d_alloc.row(kept[j]);
        g_new(static_cast<Eigen::Index>(j)) =
            gains(kept[j]) * powers(kept[j]);
      }
      d_alloc = std::move(d_new);
      gamma_tilde = std::move(g_new);
      se_prev = se;
      continue;
    }

    out.power = std::move(pa);
    out.se = se;
    if (std::isfinite(se_prev) && std::abs(se - se_prev) < kSeTol) {
      ++iter;
      break;
    }
    se_prev = se;
    gamma_tilde = gains.cwiseProduct(powers);
  }

  if (out.power.powers.size() != static_cast<Eigen::Index>(order.size())) {
    // The iteration cap landed on a removal step; settle the surviving set.
    const RVec gains = gains_explicit(c, d_alloc, theta_bar);
    const RVec powers = waterfill(gains, ptx);
    out.power = PowerAllocation{gains, powers, ptx};
    out.se = sum_se(out.power);
  }

  out.theta = theta_bar.head(cache.n_ris);
  out.order = std::move(order);
  out.iterations = iter;
  return out;
}

}  // namespace riszf
