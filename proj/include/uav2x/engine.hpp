#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "uav2x/isasoa.hpp"

namespace uav2x {

enum class Policy { isasoa, greedy };

inline const char* policy_name(Policy p) { return p == Policy::isasoa ? "isasoa" : "greedy"; }

struct SlotLog {
  int slot = 0;
  std::vector<int> u2i_set, u2u_set;
  std::map<int, int> pairing;
  SlotDecision decision;
  IterTrace trace;                         // per-iteration objectives (empty for greedy)
  double uplink_bits = 0.0;                // UAV-origin bits moved to the BS this slot
  std::vector<double> uplink_bits_per_uav; // indexed by UAV id
  double u2u_bits = 0.0;                   // bits relayed over U2U links this slot
  double cu_sum_rate = 0.0;                // CU share of the objective, rate-accounted only
  double u2u_sum_rate = 0.0;               // aggregate U2U rate of active links
  std::vector<std::string> qos_violations;
};

struct RunResult {
  std::vector<SlotLog> slots;
  double mean_uplink_sum_rate = 0.0;
  double mean_u2u_sum_rate = 0.0;
  double total_uplink_bits = 0.0;
  double total_u2u_bits = 0.0;
  double total_sensed_bits = 0.0;
  double final_cache_bits = 0.0;
  double max_conservation_residual = 0.0;
  std::vector<bool> completed;  // progress >= L at the end, per UAV
  bool all_completed = true;
};

// Full discrete-time run of the sense-and-send protocol: per slot, every UAV
// senses into its cache, the BS categorizes and decides, U2I members drain
// their caches toward the BS and U2U members toward their relays, then all
// UAVs advance along their trajectories.
inline RunResult run_simulation(const SimConfig& cfg, Policy policy) {
  cfg.validate();
  ScenarioState state = generate_scenario(cfg.scenario);
  const int T = cfg.scenario.horizon_T;
  const double scale = cfg.algo.capacity_scale;

  RunResult res;
  res.slots.reserve(T);

  for (int t = 0; t < T; ++t) {
    state.slot = t;
    SlotLog log;
    log.slot = t;

    const double cache_before = [&] {
      double sum = 0.0;
      for (const UavState& u : state.uavs) sum += u.cache_bits;
      return sum;
    }();

    // UAV sensing step.
    double sensed = 0.0;
    for (UavState& u : state.uavs) {
      u.cache_bits += cfg.algo.f_sense;
      sensed += cfg.algo.f_sense;
    }
    res.total_sensed_bits += sensed;

    // UAV report / BS categorization. No move here: the no-relay throw must
    // leave the state intact.
    try {
      state = categorize(state, cfg.channel, cfg.algo);
    } catch (const InfeasibleError&) {
      // No relay exists this slot: UAV links stay idle, CU traffic continues.
      state.u2i_set.clear();
      state.u2u_set.clear();
      state.pairing.clear();
      log.qos_violations.push_back("categorization_no_relay");
    }
    log.u2i_set = state.u2i_set;
    log.u2u_set = state.u2u_set;
    log.pairing = state.pairing;

    // BS decision.
    SlotDecision decision;
    if (policy == Policy::isasoa) {
      auto [d, trace] = run_isasoa(state, cfg.scenario, cfg.channel, cfg.algo);
      decision = std::move(d);
      log.trace = std::move(trace);
    } else {
      decision = run_greedy(state, cfg.scenario, cfg.channel, cfg.algo);
    }
    for (const std::string& v : decision.violations) log.qos_violations.push_back(v);

    // Data transmission: uplink drains first from the post-sensing caches,
    // U2U deliveries land in the relay caches afterwards.
    log.uplink_bits_per_uav.assign(state.uavs.size(), 0.0);
    const std::size_t n_h = state.u2i_set.size();
    double uplink = 0.0;
    for (std::size_t r = 0; r < n_h; ++r) {
      const int id = state.u2i_set[r];
      double rate = 0.0;
      for (std::size_t k = 0; k < decision.phi.cols(); ++k)
        if (decision.phi(r, k)) rate += decision.rates.bs_rate(r, k);
      const double bits = std::min(state.uavs[id].cache_bits, rate * scale);
      state.uavs[id].cache_bits -= bits;
      log.uplink_bits_per_uav[id] = bits;
      uplink += bits;
    }
    for (std::size_t r = n_h; r < decision.phi.rows(); ++r)
      for (std::size_t k = 0; k < decision.phi.cols(); ++k)
        if (decision.phi(r, k)) log.cu_sum_rate += decision.rates.bs_rate(r, k);

    double relayed = 0.0;
    std::vector<std::pair<int, double>> inflow;
    for (std::size_t l = 0; l < state.u2u_set.size(); ++l) {
      const int tx = state.u2u_set[l];
      const double rate = decision.rates.u2u_link_rate.empty()
                              ? 0.0
                              : decision.rates.u2u_link_rate[l];
      log.u2u_sum_rate += rate;
      const double bits = std::min(state.uavs[tx].cache_bits, rate * scale);
      state.uavs[tx].cache_bits -= bits;
      inflow.emplace_back(state.pairing.at(tx), bits);
      relayed += bits;
    }
    for (const auto& [rx, bits] : inflow) state.uavs[rx].cache_bits += bits;

    log.uplink_bits = uplink;
    log.u2u_bits = relayed;
    res.total_uplink_bits += uplink;
    res.total_u2u_bits += relayed;

    const double cache_after = [&] {
      double sum = 0.0;
      for (const UavState& u : state.uavs) sum += u.cache_bits;
      return sum;
    }();
    const double residual = std::abs(cache_after - (cache_before + sensed - uplink));
    res.max_conservation_residual = std::max(res.max_conservation_residual, residual);

    // Link access + movement.
    for (UavState& u : state.uavs)
      u = advance_position(u, decision.speeds[u.id], cfg.scenario.v_max);

    log.decision = std::move(decision);
    res.slots.push_back(std::move(log));
  }

  for (const SlotLog& log : res.slots) {
    res.mean_uplink_sum_rate += log.decision.objective;
    res.mean_u2u_sum_rate += log.u2u_sum_rate;
  }
  if (T > 0) {
    res.mean_uplink_sum_rate /= T;
    res.mean_u2u_sum_rate /= T;
  }
  for (const UavState& u : state.uavs) {
    // Same slack as the speed bounds: a knife-edge trajectory may end a few
    // ulps short of L.
    const bool done = u.progress >= u.trajectory_length - 1e-6;
    res.completed.push_back(done);
    if (!done) res.all_completed = false;
  }
  for (const UavState& u : state.uavs) res.final_cache_bits += u.cache_bits;
  return res;
}

}  // namespace uav2x
