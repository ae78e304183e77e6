#pragma once

#include <cstdint>

#include "riszf/types.hpp"

namespace riszf {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// Simulation scenario: a base station with n_bs antennas serves n_users
// single-antenna users, assisted by a reflecting surface with n_ris
// elements.  Path loss follows alpha + beta * 10 * log10(d / 1m) on every
// link.  The first ceil(penalized_fraction * n_users) users suffer
// extra_loss_db of additional direct-channel loss.
struct ScenarioConfig {
  int n_bs = 8;
  int n_ris = 128;
  int n_users = 4;

  Vec3 bs_pos{0.0, 0.0, 10.0};
  Vec3 ris_pos{100.0, 0.0, 10.0};
  Vec3 user_center{95.0, 10.0, 1.5};
  double user_radius = 5.0;
  double user_height = 1.5;

  double alpha_d = 30.0;
  double alpha_r = 30.0;
  double alpha_s = 30.0;
  double beta_d = 3.7;
  double beta_r = 3.2;
  double beta_s = 2.2;

  double extra_loss_db = 20.0;
  double penalized_fraction = 0.5;

  double noise_dbm = -100.0;
  double ptx_dbm = 20.0;

  // Throws ConfigError when a field is out of range.
  void validate() const;
};

// One Monte-Carlo draw.  Rows of h_direct and h_ris_user are the
// conjugated channel vectors of each user.  The rank-one station-surface
// channel is a * b^H with ||b|| = 1; its array gain and path loss live in
// a.  Noise normalization (division by the noise standard deviation) is
// folded into h_direct and a, so downstream noise power is 1 and the
// transmit power budget is the only SNR knob.
struct ChannelRealization {
  CMat h_direct;    // n_users x n_bs
  CMat h_ris_user;  // n_users x n_ris
  CVec a;           // n_ris
  CVec b;           // n_bs, unit norm

  int n_users() const { return static_cast<int>(h_direct.rows()); }
  int n_bs() const { return static_cast<int>(h_direct.cols()); }
  int n_ris() const { return static_cast<int>(a.size()); }
};

// alpha + beta * 10 * log10(d / 1m); throws DomainError for d <= 0.
double path_loss_db(double d_m, double alpha_db, double beta);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

// Half-wavelength uniform linear array response, entry m = exp(j*pi*m*sin(angle)).
CVec ula_steering(int n, double angle_rad);

// Deterministic function of (cfg, seed, trial).
ChannelRealization draw_realization(const ScenarioConfig& cfg,
                                    std::uint64_t seed, std::uint64_t trial);

}  // namespace riszf
