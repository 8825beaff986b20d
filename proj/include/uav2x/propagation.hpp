#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "uav2x/geometry.hpp"
#include "uav2x/params.hpp"

namespace uav2x {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

// Distance-independent free-space constant, logs base 10.
inline double free_space_pathloss_db(double f_hz) {
  if (!(f_hz > 0.0)) throw std::domain_error("carrier frequency must be > 0");
  return 20.0 * std::log10(f_hz) + 20.0 * std::log10(4.0 * std::numbers::pi / kSpeedOfLight);
}

// Probability of a LoS connection as a function of the elevation angle in
// degrees. Strictly increasing in the angle.
inline double los_probability(double elevation_deg, double a_env, double b_env) {
  return 1.0 / (1.0 + a_env * std::exp(-b_env * (elevation_deg - a_env)));
}

// Elevation of the air terminal seen from the ground terminal, clamped to
// [0, 90] degrees; the model is unspecified below the ground terminal.
inline double elevation_deg(const Vec3& air, const Vec3& ground) {
  const double d = distance_uav_uav(air, ground);
  if (d <= 0.0) throw std::domain_error("zero distance in elevation computation");
  const double s = std::clamp((air.z - ground.z) / d, 0.0, 1.0);
  return std::asin(s) * 180.0 / std::numbers::pi;
}

// LoS/NLoS-averaged air-to-ground pathloss between a UAV and a ground
// terminal (BS antenna or CU), in dB. Distance in meters.
inline double air_to_ground_pathloss_db(const Vec3& uav_pos, const Vec3& ground_pos,
                                        const ChannelParams& p) {
  const double d = distance_uav_uav(uav_pos, ground_pos);
  if (d <= 0.0) throw std::domain_error("zero distance in air-to-ground pathloss");
  const double base = free_space_pathloss_db(p.carrier_hz) + 20.0 * std::log10(d);
  const double p_los = los_probability(elevation_deg(uav_pos, ground_pos), p.a_env, p.b_env);
  return p_los * (base + p.eta_los_db) + (1.0 - p_los) * (base + p.eta_nlos_db);
}

inline double u2i_avg_pathloss_db(const Vec3& uav_pos, double bs_height,
                                  const ChannelParams& p) {
  return air_to_ground_pathloss_db(uav_pos, Vec3{0.0, 0.0, bs_height}, p);
}

inline double u2i_received_power_w(const Vec3& uav_pos, double bs_height,
                                   const ChannelParams& p) {
  return p.tx_power_w() / db_to_linear(u2i_avg_pathloss_db(uav_pos, bs_height, p));
}

// Macrocell pathloss of a CU uplink, in dB. Frequency enters in MHz, the
// distance in meters.
inline double cu_pathloss_db(const Vec3& cu_pos, double bs_height, const ChannelParams& p) {
  const double d = distance_to_bs(cu_pos, bs_height);
  if (d <= 0.0) throw std::domain_error("zero distance in CU pathloss");
  const double f_mhz = p.carrier_hz / 1e6;
  return -55.9 + 38.0 * std::log10(d) + (24.5 + 1.5 * f_mhz / 925.0) * std::log10(f_mhz);
}

inline double cu_received_power_w(const Vec3& cu_pos, double bs_height,
                                  const ChannelParams& p) {
  return p.tx_power_w() / db_to_linear(cu_pathloss_db(cu_pos, bs_height, p));
}

// Air-to-air received power of an established U2U link over distance d.
inline double u2u_received_power_w(double d, const ChannelParams& p) {
  if (!(d > 0.0)) throw std::domain_error("U2U distance must be > 0");
  return p.tx_power_w() * p.gain_g() * std::pow(d, -p.alpha) * p.fading_gain;
}

// Interference of a UAV transmitter at an airborne receiver: the same
// air-to-air law as the wanted link, amplifier/antenna gain included.
// Fading applies to U2U transmissions only. Infinite at zero distance
// (receiver transmitting on the same subchannel it listens on).
inline double uav_interference_power_w(double d, const ChannelParams& p, bool u2u_transmitter) {
  if (d <= 0.0) return std::numeric_limits<double>::infinity();
  const double fade = u2u_transmitter ? p.fading_gain : 1.0;
  return p.tx_power_w() * p.gain_g() * std::pow(d, -p.alpha) * fade;
}

inline double rate_bps_hz(double sinr) { return std::log2(1.0 + sinr); }

}  // namespace uav2x
