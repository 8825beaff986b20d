#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "uav2x/alloc_u2i.hpp"
#include "uav2x/alloc_u2u.hpp"
#include "uav2x/channel.hpp"
#include "uav2x/engine.hpp"
#include "uav2x/errors.hpp"
#include "uav2x/params.hpp"

namespace uav2x {

namespace detail {

using nlohmann::json;

// Strict field reader: every key in the section must be known.
class SectionReader {
 public:
  SectionReader(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("config section '" + name_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    known_.push_back(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + name_ + "." + key + "' has the wrong type");
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      bool ok = false;
      for (const char* k : known_)
        if (it.key() == k) ok = true;
      if (!ok) throw ConfigError("unknown config key '" + name_ + "." + it.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::vector<const char*> known_;
};

}  // namespace detail

inline SimConfig sim_config_from_json(const nlohmann::json& j) {
  SimConfig cfg;
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "scenario" && it.key() != "channel" && it.key() != "algo")
      throw ConfigError("unknown config section '" + it.key() + "'");

  if (j.contains("scenario")) {
    detail::SectionReader r(j.at("scenario"), "scenario");
    r.get("n_uavs", cfg.scenario.n_uavs);
    r.get("n_cus", cfg.scenario.n_cus);
    r.get("n_subchannels", cfg.scenario.n_subchannels);
    r.get("area_x", cfg.scenario.area_x);
    r.get("area_y", cfg.scenario.area_y);
    r.get("h_max", cfg.scenario.h_max);
    r.get("bs_height", cfg.scenario.bs_height);
    r.get("cu_height", cfg.scenario.cu_height);
    r.get("v_max", cfg.scenario.v_max);
    r.get("horizon_T", cfg.scenario.horizon_T);
    r.get("trajectory_length", cfg.scenario.trajectory_length);
    r.get("rng_seed", cfg.scenario.rng_seed);
    r.finish();
  }
  if (j.contains("channel")) {
    detail::SectionReader r(j.at("channel"), "channel");
    r.get("carrier_hz", cfg.channel.carrier_hz);
    r.get("eta_los_db", cfg.channel.eta_los_db);
    r.get("eta_nlos_db", cfg.channel.eta_nlos_db);
    r.get("a_env", cfg.channel.a_env);
    r.get("b_env", cfg.channel.b_env);
    r.get("alpha", cfg.channel.alpha);
    r.get("gain_g_db", cfg.channel.gain_g_db);
    r.get("noise_dbm", cfg.channel.noise_dbm);
    r.get("tx_power_dbm", cfg.channel.tx_power_dbm);
    r.get("fading_gain", cfg.channel.fading_gain);
    r.finish();
  }
  if (j.contains("algo")) {
    const nlohmann::json& a = j.at("algo");
    detail::SectionReader r(a, "algo");
    std::string mode = cfg.algo.mode_selection == ModeSelection::threshold ? "threshold"
                                                                           : "force_nl";
    r.get("snr_threshold_db", cfg.algo.snr_threshold_db);
    r.get("mode_selection", mode);
    r.get("n_l_target", cfg.algo.n_l_target);
    r.get("r_min", cfg.algo.r_min);
    r.get("chi_max", cfg.algo.chi_max);
    r.get("eps", cfg.algo.eps);
    r.get("max_iter", cfg.algo.max_iter);
    r.get("v_0", cfg.algo.v0);
    r.get("bnb_node_budget", cfg.algo.bnb_node_budget);
    r.get("delta_v", cfg.algo.delta_v);
    r.get("refine_tol", cfg.algo.refine_tol);
    r.get("f_sense", cfg.algo.f_sense);
    r.get("capacity_scale", cfg.algo.capacity_scale);
    r.finish();
    if (mode == "threshold")
      cfg.algo.mode_selection = ModeSelection::threshold;
    else if (mode == "force_nl")
      cfg.algo.mode_selection = ModeSelection::force_nl;
    else
      throw ConfigError("algo.mode_selection must be 'threshold' or 'force_nl'");
  }
  cfg.validate();
  return cfg;
}

inline SimConfig load_sim_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  return sim_config_from_json(j);
}

template <typename T>
nlohmann::json grid_to_json(const Grid<T>& g) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < g.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < g.cols(); ++c) row.push_back(g(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename T>
Grid<T> grid_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? 0 : j.at(0).size();
  Grid<T> g(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (j.at(r).size() != cols) throw ConfigError(std::string(what) + " rows differ in length");
    for (std::size_t c = 0; c < cols; ++c) g(r, c) = j.at(r).at(c).template get<T>();
  }
  return g;
}

inline nlohmann::json to_json(const AssignmentInstance& inst) {
  return {{"weights", grid_to_json(inst.weights)}, {"chi_max", inst.chi_max}};
}

inline AssignmentInstance assignment_instance_from_json(const nlohmann::json& j) {
  AssignmentInstance inst;
  inst.weights = grid_from_json<double>(j.at("weights"), "weights");
  inst.chi_max = j.value("chi_max", 1);
  return inst;
}

inline nlohmann::json to_json(const U2uInstance& inst) {
  return {{"n_links", inst.n_links},
          {"n_channels", inst.n_channels},
          {"phi", grid_to_json(inst.phi)},
          {"bs_signal", inst.bs_signal},
          {"bs_leak", inst.bs_leak},
          {"noise_w", inst.noise_w},
          {"rx_signal", grid_to_json(inst.rx_signal)},
          {"cross", grid_to_json(inst.cross)},
          {"fixed_interference", grid_to_json(inst.fixed_interference)},
          {"r_min", inst.r_min},
          {"chi_max", inst.chi_max}};
}

inline U2uInstance u2u_instance_from_json(const nlohmann::json& j) {
  U2uInstance inst;
  inst.n_links = j.at("n_links").get<int>();
  inst.n_channels = j.at("n_channels").get<int>();
  inst.phi = grid_from_json<std::uint8_t>(j.at("phi"), "phi");
  inst.bs_signal = j.at("bs_signal").get<std::vector<double>>();
  inst.bs_leak = j.at("bs_leak").get<std::vector<double>>();
  inst.noise_w = j.at("noise_w").get<double>();
  inst.rx_signal = grid_from_json<double>(j.at("rx_signal"), "rx_signal");
  inst.cross = grid_from_json<double>(j.at("cross"), "cross");
  inst.fixed_interference =
      grid_from_json<double>(j.at("fixed_interference"), "fixed_interference");
  inst.r_min = j.at("r_min").get<double>();
  inst.chi_max = j.at("chi_max").get<int>();
  return inst;
}

inline nlohmann::json to_json(const Vec3& v) { return {{"x", v.x}, {"y", v.y}, {"z", v.z}}; }

// Debug snapshot of a scenario state.
inline nlohmann::json to_json(const ScenarioState& s) {
  nlohmann::json uavs = nlohmann::json::array();
  for (const UavState& u : s.uavs)
    uavs.push_back({{"id", u.id},
                    {"position", to_json(u.position)},
                    {"direction", to_json(u.direction)},
                    {"trajectory_length", u.trajectory_length},
                    {"progress", u.progress},
                    {"cache_bits", u.cache_bits}});
  nlohmann::json cus = nlohmann::json::array();
  for (const CuState& c : s.cus) cus.push_back({{"id", c.id}, {"position", to_json(c.position)}});
  nlohmann::json pairing = nlohmann::json::object();
  for (const auto& [tx, rx] : s.pairing) pairing[std::to_string(tx)] = rx;
  return {{"slot", s.slot},       {"bs_height", s.bs_height}, {"uavs", std::move(uavs)},
          {"cus", std::move(cus)}, {"u2i_set", s.u2i_set},     {"u2u_set", s.u2u_set},
          {"pairing", std::move(pairing)}};
}

inline nlohmann::json to_json(const RateReport& rr) {
  return {{"bs_sinr", grid_to_json(rr.bs_sinr)},
          {"bs_rate", grid_to_json(rr.bs_rate)},
          {"u2u_sinr", grid_to_json(rr.u2u_sinr)},
          {"u2u_rate", grid_to_json(rr.u2u_rate)},
          {"u2u_link_rate", rr.u2u_link_rate},
          {"uplink_sum_rate", rr.uplink_sum_rate}};
}

// Run-level summary emitted next to the per-slot CSV.
inline nlohmann::json run_summary_json(const SimConfig& cfg, Policy policy,
                                       const RunResult& run) {
  int violations = 0;
  for (const SlotLog& log : run.slots) violations += static_cast<int>(log.qos_violations.size());
  return {{"policy", policy_name(policy)},
          {"seed", cfg.scenario.rng_seed},
          {"slots", static_cast<int>(run.slots.size())},
          {"mean_uplink_sum_rate", run.mean_uplink_sum_rate},
          {"mean_u2u_sum_rate", run.mean_u2u_sum_rate},
          {"total_uplink_bits", run.total_uplink_bits},
          {"total_u2u_bits", run.total_u2u_bits},
          {"total_sensed_bits", run.total_sensed_bits},
          {"final_cache_bits", run.final_cache_bits},
          {"max_conservation_residual", run.max_conservation_residual},
          {"all_completed", run.all_completed},
          {"qos_violation_count", violations}};
}

}  // namespace uav2x
