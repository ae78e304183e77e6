#include "riszf/alloc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "riszf/linalg.hpp"
#include "riszf/ops_count.hpp"
#include "riszf/rng.hpp"

namespace riszf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CMat select_rows(const CMat& m, const std::vector<int>& order) {
  CMat out(static_cast<Eigen::Index>(order.size()), m.cols());
  for (std::size_t j = 0; j < order.size(); ++j) {
    out.row(static_cast<Eigen::Index>(j)) = m.row(order[j]);
  }
  return out;
}

std::vector<int> complement(const std::vector<int>& order, int n_users) {
  std::vector<bool> used(static_cast<std::size_t>(n_users), false);
  for (int u : order) used[static_cast<std::size_t>(u)] = true;
  std::vector<int> out;
  for (int u = 0; u < n_users; ++u) {
    if (!used[static_cast<std::size_t>(u)]) out.push_back(u);
  }
  return out;
}

// Inverse-Gram diagonal gains of an explicit channel; throws
// DegenerateAllocation when the Gram matrix is numerically singular.
RVec pinv_column_gains(const CMat& h) {
  const auto i = h.rows();
  const CMat gram = h * h.adjoint();
  auto evd = linalg::hermitian_evd(gram);
  if (!(evd.eigenvalues(i - 1) > evd.eigenvalues(0) * 1e-14) ||
      !(evd.eigenvalues(0) > 0.0)) {
    throw DegenerateAllocation("gram matrix is rank deficient");
  }
  const CMat ginv = evd.eigenvectors *
                    evd.eigenvalues.cwiseInverse().asDiagonal() *
                    evd.eigenvectors.adjoint();
  RVec gains(i);
  for (Eigen::Index j = 0; j < i; ++j) {
    const double d = std::real(ginv(j, j));
    if (!(d > 0.0)) throw DegenerateAllocation("non-positive gram diagonal");
    gains(j) = 1.0 / d;
  }
  return gains;
}

double inverse_gram_trace(const CMat& h) {
  const CMat gram = h * h.adjoint();
  const RVec eigs = linalg::hermitian_eigenvalues(gram);
  const auto i = eigs.size();
  if (!(eigs(i - 1) > eigs(0) * 1e-14) || !(eigs(0) > 0.0)) {
    return kInf;
  }
  return eigs.cwiseInverse().sum();
}

AlgorithmResult dead_ris_fallback(const ChannelRealization& ch, double ptx,
                                  std::string name) {
  AlgorithmResult out = lisa_direct(ch, ptx);
  out.algorithm = std::move(name);
  out.theta = CVec::Ones(ch.n_ris());
  return out;
}

}  // namespace

namespace detail {

LisaOutcome lisa_on_matrix(const CMat& h_all, double ptx) {
  const int k = static_cast<int>(h_all.rows());
  const int n_bs = static_cast<int>(h_all.cols());
  const int max_users = std::min(k, n_bs);

  LisaOutcome best;
  best.se = 0.0;
  std::vector<int> order;

  while (static_cast<int>(order.size()) < max_users) {
    int pick = -1;
    double pick_metric = kInf;
    for (int cand : complement(order, k)) {
      std::vector<int> trial = order;
      trial.push_back(cand);
      const double metric = inverse_gram_trace(select_rows(h_all, trial));
      if (metric < pick_metric) {
        pick_metric = metric;
        pick = cand;
      }
    }
    if (pick < 0 || !std::isfinite(pick_metric)) break;

    std::vector<int> trial = order;
    trial.push_back(pick);
    RVec gains;
    try {
      gains = pinv_column_gains(select_rows(h_all, trial));
    } catch (const DegenerateAllocation&) {
      break;
    }
    const RVec powers = waterfill(gains, ptx);
    PowerAllocation pa{gains, powers, ptx};
    const double se = sum_se(pa);
    if (se <= best.se) break;

    order = std::move(trial);
    best.order = order;
    best.power = std::move(pa);
    best.se = se;
  }
  return best;
}

ZfReport zf_report(const ChannelRealization& ch, std::vector<int> order,
                   const CVec& theta, double ptx) {
  ZfReport rep;
  if (order.empty()) return rep;
  while (true) {
    const CMat h = theta.size() > 0
                       ? composite_matrix(ch, order, theta)
                       : select_rows(ch.h_direct, order);
    const RVec gains = pinv_column_gains(h);
    const RVec powers = waterfill(gains, ptx);
    std::vector<int> survivors;
    for (Eigen::Index j = 0; j < powers.size(); ++j) {
      if (powers(j) > 0.0) survivors.push_back(order[static_cast<std::size_t>(j)]);
    }
    if (survivors.size() == order.size()) {
      rep.order = std::move(order);
      rep.power = PowerAllocation{gains, powers, ptx};
      rep.se = sum_se(rep.power);
      return rep;
    }
    order = std::move(survivors);
    if (order.empty()) return rep;
  }
}

}  // namespace detail

std::optional<SelectResult> select_next_user(const Allocation& alloc,
                                             const SubspaceCache& cache,
                                             const ChannelRealization& ch,
                                             std::vector<int> candidates) {
  if (candidates.empty()) {
    throw DomainError("select_next_user: no candidates");
  }
  std::sort(candidates.begin(), candidates.end());
  const int n_bs = ch.n_bs();

  std::optional<SelectResult> best;
  for (int cand : candidates) {
    std::vector<int> trial = alloc.order;
    trial.push_back(cand);
    if (static_cast<int>(trial.size()) > n_bs) break;

    double metric = kInf;
    try {
      Allocation ext = Allocation::make(ch, cache, trial);
      if (static_cast<int>(trial.size()) == n_bs) {
        metric = singular_relaxed_metric(ext.c, ext.r_cols, cache.n_ris);
      } else {
        const CMat rr = ext.r_cols.adjoint() * ext.r_cols;
        ops::add(static_cast<std::uint64_t>(rr.rows()) * rr.rows() *
                 ext.r_cols.rows());
        try {
          metric = relaxed_metric(ext.c, rr, cache.n_ris).metric;
        } catch (const SingularBase&) {
          metric = singular_relaxed_metric(ext.c, ext.r_cols, cache.n_ris);
        }
      }
    } catch (const DegenerateAllocation&) {
      continue;
    }
    if (!std::isfinite(metric)) continue;
    if (!best || metric < best->metric) {
      best = SelectResult{cand, metric};
    }
  }
  return best;
}

AlgorithmResult lisa_direct(const ChannelRealization& ch, double ptx) {
  const auto lisa = detail::lisa_on_matrix(ch.h_direct, ptx);
  auto rep = detail::zf_report(ch, lisa.order, CVec(), ptx);
  AlgorithmResult out;
  out.algorithm = "direct";
  out.order = std::move(rep.order);
  out.power = std::move(rep.power);
  out.se = rep.se;
  return out;
}

AlgorithmResult greedy_ris_lisa(const ChannelRealization& ch,
                                const SubspaceCache& cache, double ptx) {
  if (ch.a.norm() == 0.0) {
    return dead_ris_fallback(ch, ptx, "greedy");
  }
  const int max_users = std::min(ch.n_users(), ch.n_bs());

  std::vector<int> order;
  double se_prev = 0.0;
  std::optional<EvalOutcome> accepted;
  int iterations = 0;

  while (static_cast<int>(order.size()) < max_users) {
    const auto candidates = complement(order, ch.n_users());
    if (candidates.empty()) break;
    std::optional<SelectResult> sel;
    if (order.empty()) {
      sel = select_next_user(Allocation{}, cache, ch, candidates);
    } else {
      sel = select_next_user(Allocation::make(ch, cache, order), cache, ch,
                             candidates);
    }
    if (!sel) break;

    std::vector<int> trial = order;
    trial.push_back(sel->user);
    EvalOutcome eval;
    try {
      eval = evaluate_allocation(Allocation::make(ch, cache, trial), cache,
                                 ch, ptx);
    } catch (const DegenerateAllocation&) {
      break;
    }
    iterations += eval.state.iterations;
    if (eval.se > se_prev) {
      se_prev = eval.se;
      order = eval.order;
      accepted = std::move(eval);
    } else {
      break;
    }
  }

  if (!accepted) {
    return dead_ris_fallback(ch, ptx, "greedy");
  }
  const auto fin = finalize_phases(*accepted, cache, ch, ptx);
  auto rep = detail::zf_report(ch, fin.order, fin.theta, ptx);
  AlgorithmResult out;
  out.algorithm = "greedy";
  out.order = std::move(rep.order);
  out.theta = fin.theta;
  out.power = std::move(rep.power);
  out.se = rep.se;
  out.iterations = iterations + fin.iterations;
  return out;
}

AlgorithmResult greedy_ris_lisa(const ChannelRealization& ch, double ptx) {
  return greedy_ris_lisa(ch, build_subspace_cache(ch), ptx);
}

AlgorithmResult add_one_ris_lisa(const ChannelRealization& ch,
                                 const SubspaceCache& cache, double ptx) {
  if (ch.a.norm() == 0.0) {
    return dead_ris_fallback(ch, ptx, "addone");
  }
  const auto direct = detail::lisa_on_matrix(ch.h_direct, ptx);
  const std::vector<int>& pi_d = direct.order;
  const int i_d = static_cast<int>(pi_d.size());
  const int max_users = std::min(ch.n_users(), ch.n_bs());

  std::vector<std::vector<int>> candidate_orders;

  // Candidate A: drop the worst (last-allocated) direct user, then
  // reselect with the surface metric; the full joint metric is the reason
  // for removing before adding.
  {
    std::vector<int> base(pi_d.begin(),
                          pi_d.empty() ? pi_d.end() : pi_d.end() - 1);
    const auto cands = complement(base, ch.n_users());
    std::optional<SelectResult> sel;
    if (!cands.empty()) {
      sel = base.empty()
                ? select_next_user(Allocation{}, cache, ch, cands)
                : select_next_user(Allocation::make(ch, cache, base), cache,
                                   ch, cands);
    }
    if (sel) {
      base.push_back(sel->user);
      candidate_orders.push_back(std::move(base));
    }
  }

  // Candidate B: one more user on top of the direct allocation.
  if (i_d >= 1 && i_d < max_users) {
    const auto cands = complement(pi_d, ch.n_users());
    if (!cands.empty()) {
      auto sel =
          select_next_user(Allocation::make(ch, cache, pi_d), cache, ch, cands);
      if (sel) {
        std::vector<int> ext = pi_d;
        ext.push_back(sel->user);
        candidate_orders.push_back(std::move(ext));
      }
    }
  }

  std::optional<EvalOutcome> winner;
  int iterations = 0;
  for (auto& cand_order : candidate_orders) {
    try {
      EvalOutcome eval = evaluate_allocation(
          Allocation::make(ch, cache, cand_order), cache, ch, ptx);
      iterations += eval.state.iterations;
      if (!winner || eval.se > winner->se) winner = std::move(eval);
    } catch (const DegenerateAllocation&) {
      continue;
    }
  }

  if (!winner) {
    AlgorithmResult out = lisa_direct(ch, ptx);
    out.algorithm = "addone";
    out.theta = CVec::Ones(ch.n_ris());
    return out;
  }
  const auto fin = finalize_phases(*winner, cache, ch, ptx);
  auto rep = detail::zf_report(ch, fin.order, fin.theta, ptx);
  AlgorithmResult out;
  out.algorithm = "addone";
  out.order = std::move(rep.order);
  out.theta = fin.theta;
  out.power = std::move(rep.power);
  out.se = rep.se;
  out.iterations = iterations + fin.iterations;
  return out;
}

AlgorithmResult add_one_ris_lisa(const ChannelRealization& ch, double ptx) {
  return add_one_ris_lisa(ch, build_subspace_cache(ch), ptx);
}

AlgorithmResult random_phase_baseline(const ChannelRealization& ch, double ptx,
                                      std::uint64_t seed) {
  Rng rng(seed);
  const int nr = ch.n_ris();
  CVec theta(nr);
  for (int n = 0; n < nr; ++n) {
    theta(n) = std::polar(1.0, 2.0 * M_PI * rng.uniform());
  }

  std::vector<int> all_users(static_cast<std::size_t>(ch.n_users()));
  for (int u = 0; u < ch.n_users(); ++u) all_users[static_cast<std::size_t>(u)] = u;
  const CMat h_all = nr > 0 ? composite_matrix(ch, all_users, theta)
                            : ch.h_direct;

  const auto lisa = detail::lisa_on_matrix(h_all, ptx);
  auto rep = detail::zf_report(ch, lisa.order, theta, ptx);
  AlgorithmResult out;
  out.algorithm = "random";
  out.order = std::move(rep.order);
  out.theta = std::move(theta);
  out.power = std::move(rep.power);
  out.se = rep.se;
  return out;
}

}  // namespace riszf
