#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "uav2x/errors.hpp"

namespace uav2x {

inline double dbm_to_w(double dbm) { return std::pow(10.0, dbm / 10.0) / 1000.0; }
inline double w_to_dbm(double w) { return 10.0 * std::log10(w * 1000.0); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Propagation constants shared by all link types.
struct ChannelParams {
  double carrier_hz = 1e9;       // f
  double eta_los_db = 1.0;       // excess LoS attenuation
  double eta_nlos_db = 20.0;     // excess NLoS attenuation
  double a_env = 12.0;           // environment constant of the LoS probability
  double b_env = 0.135;
  double alpha = 2.0;            // air-to-air pathloss exponent
  double gain_g_db = -31.5;      // amplifier/antenna gain of a U2U link
  double noise_dbm = -96.0;      // AWGN variance per subchannel
  double tx_power_dbm = 23.0;    // transmit power per subchannel (UAV or CU)
  double fading_gain = 1.0;      // small-scale power gain of U2U links

  double tx_power_w() const { return dbm_to_w(tx_power_dbm); }
  double noise_w() const { return dbm_to_w(noise_dbm); }
  double gain_g() const { return db_to_linear(gain_g_db); }

  void validate() const {
    if (!(alpha > 0.0)) throw ConfigError("channel.alpha must be > 0");
    if (!(b_env > 0.0)) throw ConfigError("channel.b_env must be > 0");
    if (!std::isfinite(noise_dbm) || !std::isfinite(tx_power_dbm))
      throw ConfigError("channel.noise_dbm and channel.tx_power_dbm must be finite");
    if (!(carrier_hz > 0.0)) throw ConfigError("channel.carrier_hz must be > 0");
    if (!(fading_gain >= 0.0)) throw ConfigError("channel.fading_gain must be >= 0");
  }
};

struct ScenarioConfig {
  int n_uavs = 20;
  int n_cus = 5;
  int n_subchannels = 10;
  double area_x = 2000.0;            // meters, centered on the BS
  double area_y = 2000.0;
  double h_max = 200.0;              // maximum UAV altitude
  double bs_height = 25.0;           // H
  double cu_height = 1.5;            // fixed CU terminal height
  double v_max = 10.0;               // meters per slot
  int horizon_T = 50;                // slots
  double trajectory_length = 300.0;  // L_i, same for every UAV
  std::uint64_t rng_seed = 1;

  void validate() const {
    if (n_uavs < 0 || n_cus < 0 || n_subchannels < 0)
      throw ConfigError("scenario counts must be >= 0");
    if (!(v_max > 0.0)) throw ConfigError("scenario.v_max must be > 0");
    if (horizon_T <= 0) throw ConfigError("scenario.horizon_T must be > 0");
    if (trajectory_length < 0.0) throw ConfigError("scenario.trajectory_length must be >= 0");
    if (static_cast<double>(horizon_T) * v_max < trajectory_length)
      throw ConfigError(
          "scenario.horizon_T * v_max < trajectory_length: no UAV can finish its "
          "trajectory, every instance is infeasible");
  }

  // Advisory check, not an error: a hover ceiling at or below the BS antenna
  // makes every elevation angle clamp to zero.
  bool h_max_below_bs() const { return h_max <= bs_height; }
};

enum class ModeSelection { threshold, force_nl };

// Knobs of the per-slot decision algorithms.
struct AlgoParams {
  double snr_threshold_db = 10.0;     // gamma_th for U2I/U2U categorization
  ModeSelection mode_selection = ModeSelection::force_nl;
  int n_l_target = 5;                 // forced U2U count in force_nl mode
  double r_min = 10.0;                // minimum aggregate U2U rate R_0, bits/s/Hz
  int chi_max = 2;                    // per-link subchannel cap
  double eps = 0.1;                   // convergence threshold of the iterative loop
  int max_iter = 50;
  double v0 = -1.0;                   // initial speed; negative means v_max / 2
  std::uint64_t bnb_node_budget = 1000000;
  double delta_v = 0.01;              // speed grid resolution as a fraction of v_max
  double refine_tol = 1e-7;           // golden-section tolerance, meters/slot
  double f_sense = 20.0;              // sensed bits per UAV per slot (rate units)
  double capacity_scale = 1.0;        // bits delivered per rate unit per slot

  double initial_speed(double v_max) const { return v0 < 0.0 ? v_max / 2.0 : v0; }

  void validate() const {
    if (chi_max < 1) throw ConfigError("algo.chi_max must be >= 1");
    if (r_min < 0.0) throw ConfigError("algo.r_min must be >= 0");
    if (max_iter < 1) throw ConfigError("algo.max_iter must be >= 1");
    if (!(delta_v > 0.0)) throw ConfigError("algo.delta_v must be > 0");
    if (!(refine_tol > 0.0)) throw ConfigError("algo.refine_tol must be > 0");
    if (n_l_target < 0) throw ConfigError("algo.n_l_target must be >= 0");
    if (f_sense < 0.0) throw ConfigError("algo.f_sense must be >= 0");
    if (capacity_scale < 0.0) throw ConfigError("algo.capacity_scale must be >= 0");
  }
};

struct SimConfig {
  ScenarioConfig scenario;
  ChannelParams channel;
  AlgoParams algo;

  void validate() const {
    scenario.validate();
    channel.validate();
    algo.validate();
  }
};

}  // namespace uav2x
