#include "riszf/channel.hpp"

#include <cmath>

#include "riszf/rng.hpp"

namespace riszf {

namespace {

double distance(const Vec3& p, const Vec3& q) {
  const double dx = p.x - q.x;
  const double dy = p.y - q.y;
  const double dz = p.z - q.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

void ScenarioConfig::validate() const {
  if (n_bs < 1) throw ConfigError("n_bs must be >= 1");
  if (n_users < 1) throw ConfigError("n_users must be >= 1");
  if (n_ris < 0) throw ConfigError("n_ris must be >= 0");
  if (n_ris + 1 < n_users) {
    throw ConfigError("n_ris + 1 must be >= n_users");
  }
  if (!(user_radius > 0.0)) throw ConfigError("user_radius must be > 0");
  if (!(beta_d > 0.0 && beta_r > 0.0 && beta_s > 0.0)) {
    throw ConfigError("path-loss exponents must be > 0");
  }
  if (penalized_fraction < 0.0 || penalized_fraction > 1.0) {
    throw ConfigError("penalized_fraction must lie in [0, 1]");
  }
}

double path_loss_db(double d_m, double alpha_db, double beta) {
  if (!(d_m > 0.0)) {
    throw DomainError("path_loss_db: distance must be > 0");
  }
  return alpha_db + beta * 10.0 * std::log10(d_m);
}

CVec ula_steering(int n, double angle_rad) {
  if (n < 0) throw DomainError("ula_steering: negative element count");
  CVec v(n);
  const double step = M_PI * std::sin(angle_rad);
  for (int m = 0; m < n; ++m) {
    v(m) = std::polar(1.0, step * m);
  }
  return v;
}

ChannelRealization draw_realization(const ScenarioConfig& cfg,
                                    std::uint64_t seed, std::uint64_t trial) {
  cfg.validate();
  Rng rng(seed, trial);

  const int k = cfg.n_users;
  const int nb = cfg.n_bs;
  const int nr = cfg.n_ris;
  const double sigma = std::pow(10.0, (cfg.noise_dbm - 30.0) / 20.0);
  const int n_penalized =
      static_cast<int>(std::ceil(cfg.penalized_fraction * k));

  ChannelRealization ch;
  ch.h_direct.resize(k, nb);
  ch.h_ris_user.resize(k, nr);

  for (int u = 0; u < k; ++u) {
    // Uniform draw in the user disc; height is fixed.
    const double radius = cfg.user_radius * std::sqrt(rng.uniform());
    const double angle = 2.0 * M_PI * rng.uniform();
    const Vec3 pos{cfg.user_center.x + radius * std::cos(angle),
                   cfg.user_center.y + radius * std::sin(angle),
                   cfg.user_height};

    double direct_db = path_loss_db(distance(pos, cfg.bs_pos), cfg.alpha_d, cfg.beta_d);
    if (u < n_penalized) direct_db += cfg.extra_loss_db;
    const double direct_var = db_to_linear(-direct_db);
    const double ris_var =
        db_to_linear(-path_loss_db(distance(pos, cfg.ris_pos), cfg.alpha_r, cfg.beta_r));

    for (int m = 0; m < nb; ++m) {
      ch.h_direct(u, m) = rng.cnormal(direct_var) / sigma;
    }
    for (int m = 0; m < nr; ++m) {
      ch.h_ris_user(u, m) = rng.cnormal(ris_var);
    }
  }

  // Pure line-of-sight station-surface link, boresight arrays.  The full
  // gain sqrt(n_bs * loss) sits in a; b stays unit norm.
  const double los_db =
      path_loss_db(distance(cfg.bs_pos, cfg.ris_pos), cfg.alpha_s, cfg.beta_s);
  const double los_amp = std::sqrt(db_to_linear(-los_db) * nb);
  ch.a = (los_amp / sigma) * ula_steering(nr, 0.0);
  ch.b = ula_steering(nb, 0.0) / std::sqrt(static_cast<double>(nb));
  return ch;
}

}  // namespace riszf
