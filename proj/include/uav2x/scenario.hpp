#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "uav2x/errors.hpp"
#include "uav2x/geometry.hpp"
#include "uav2x/params.hpp"
#include "uav2x/propagation.hpp"
#include "uav2x/rng.hpp"

namespace uav2x {

struct UavState {
  int id = 0;
  Vec3 position;
  Vec3 direction;                 // unit trajectory direction
  double trajectory_length = 0.0; // L_i
  double progress = 0.0;          // distance already traveled
  double cache_bits = 0.0;        // buffered sensed + relayed data
};

struct CuState {
  int id = 0;
  Vec3 position;  // fixed across slots
};

// Per-slot network state: geometry plus the transmission-mode partition and
// the U2U pairing.
struct ScenarioState {
  std::vector<UavState> uavs;
  std::vector<CuState> cus;
  double bs_height = 25.0;
  int slot = 0;
  std::vector<int> u2i_set;     // sorted ascending
  std::vector<int> u2u_set;     // sorted ascending
  std::map<int, int> pairing;   // xi: U2U transmitter -> its U2I relay
};

inline UavState advance_position(const UavState& u, double speed, double v_max) {
  if (!(speed >= 0.0) || speed > v_max)
    throw std::domain_error("speed outside [0, v_max]");
  UavState out = u;
  out.position = u.position + u.direction * speed;
  out.progress = u.progress + speed;
  return out;
}

inline ScenarioState generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.rng_seed);
  ScenarioState s;
  s.bs_height = cfg.bs_height;
  s.uavs.reserve(cfg.n_uavs);
  for (int i = 0; i < cfg.n_uavs; ++i) {
    UavState u;
    u.id = i;
    u.position.x = rng.uniform(-cfg.area_x / 2.0, cfg.area_x / 2.0);
    u.position.y = rng.uniform(-cfg.area_y / 2.0, cfg.area_y / 2.0);
    u.position.z = rng.uniform(0.0, cfg.h_max);
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    u.direction = {std::cos(phi), std::sin(phi), 0.0};
    u.trajectory_length = cfg.trajectory_length;
    s.uavs.push_back(u);
  }
  s.cus.reserve(cfg.n_cus);
  for (int i = 0; i < cfg.n_cus; ++i) {
    CuState c;
    c.id = i;
    c.position.x = rng.uniform(-cfg.area_x / 2.0, cfg.area_x / 2.0);
    c.position.y = rng.uniform(-cfg.area_y / 2.0, cfg.area_y / 2.0);
    c.position.z = cfg.cu_height;
    s.cus.push_back(c);
  }
  return s;
}

// Interference-free U2I SNR in dB, the quantity the BS can evaluate from a
// beacon before any allocation exists.
inline double beacon_snr_db(const UavState& u, double bs_height, const ChannelParams& p) {
  return p.tx_power_dbm - u2i_avg_pathloss_db(u.position, bs_height, p) - p.noise_dbm;
}

namespace detail {

// Pair every U2U UAV with its nearest U2I UAV; ties go to the lowest index.
inline void pair_u2u(ScenarioState& s) {
  s.pairing.clear();
  if (!s.u2u_set.empty() && s.u2i_set.empty())
    throw InfeasibleError("categorization: U2U UAVs exist but no U2I UAV can relay");
  for (int tx : s.u2u_set) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int rx : s.u2i_set) {
      const double d = distance_uav_uav(s.uavs[tx].position, s.uavs[rx].position);
      if (d < best_d) {
        best_d = d;
        best = rx;
      }
    }
    s.pairing[tx] = best;
  }
}

}  // namespace detail

// Threshold categorization: UAVs at or above the SNR threshold perform U2I,
// the rest U2U.
inline ScenarioState categorize_and_pair(ScenarioState s, const ChannelParams& p,
                                         double snr_threshold_db) {
  s.u2i_set.clear();
  s.u2u_set.clear();
  for (const UavState& u : s.uavs) {
    if (beacon_snr_db(u, s.bs_height, p) >= snr_threshold_db)
      s.u2i_set.push_back(u.id);
    else
      s.u2u_set.push_back(u.id);
  }
  detail::pair_u2u(s);
  return s;
}

// Forced categorization: label exactly n_l UAVs, the ones with the lowest
// beacon SNR, as U2U. Ties go to the lower index.
inline ScenarioState categorize_force_nl(ScenarioState s, const ChannelParams& p, int n_l) {
  const int n = static_cast<int>(s.uavs.size());
  if (n_l > n) throw ConfigError("forced U2U count exceeds number of UAVs");
  std::vector<std::pair<double, int>> snr;
  snr.reserve(n);
  for (const UavState& u : s.uavs)
    snr.emplace_back(beacon_snr_db(u, s.bs_height, p), u.id);
  std::sort(snr.begin(), snr.end());  // ascending SNR, then index
  s.u2i_set.clear();
  s.u2u_set.clear();
  for (int i = 0; i < n; ++i) {
    if (i < n_l)
      s.u2u_set.push_back(snr[i].second);
    else
      s.u2i_set.push_back(snr[i].second);
  }
  std::sort(s.u2i_set.begin(), s.u2i_set.end());
  std::sort(s.u2u_set.begin(), s.u2u_set.end());
  detail::pair_u2u(s);
  return s;
}

inline ScenarioState categorize(ScenarioState s, const ChannelParams& p, const AlgoParams& a) {
  if (a.mode_selection == ModeSelection::threshold)
    return categorize_and_pair(std::move(s), p, a.snr_threshold_db);
  return categorize_force_nl(std::move(s), p, a.n_l_target);
}

}  // namespace uav2x
