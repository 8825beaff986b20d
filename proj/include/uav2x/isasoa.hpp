#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "uav2x/alloc_u2i.hpp"
#include "uav2x/alloc_u2u.hpp"
#include "uav2x/channel.hpp"
#include "uav2x/speed.hpp"

namespace uav2x {

// Converged per-slot output of ISASOA or of the greedy baseline.
struct SlotDecision {
  PhiMatrix phi;
  PsiMatrix psi;
  std::vector<double> speeds;  // indexed by UAV id
  double objective = 0.0;      // uplink sum-rate at the decided end-of-slot positions
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> violations;
  RateReport rates;  // final report, consistent with (phi, psi, speeds)
};

struct IterTrace {
  std::vector<double> objectives;  // accepted objective per iteration
};

inline U2uInstance build_u2u_instance(const ScenarioState& s, const PhiMatrix& phi,
                                      const ChannelParams& p, double r_min, int chi_max) {
  const LinkPowers lp = build_link_powers(s, p);
  U2uInstance inst;
  inst.n_links = static_cast<int>(s.u2u_set.size());
  inst.n_channels = static_cast<int>(phi.cols());
  inst.phi = phi;
  inst.bs_signal = lp.bs_from_row;
  inst.bs_leak = lp.bs_from_u2u;
  inst.noise_w = p.noise_w();
  inst.r_min = r_min;
  inst.chi_max = chi_max;
  inst.rx_signal = Grid<double>(inst.n_links, inst.n_channels);
  inst.cross = Grid<double>(inst.n_links, inst.n_links, 0.0);
  inst.fixed_interference = Grid<double>(inst.n_links, inst.n_channels);
  for (int i = 0; i < inst.n_links; ++i) {
    for (int k = 0; k < inst.n_channels; ++k) {
      inst.rx_signal(i, k) = lp.rx_signal[i];
      double a = inst.noise_w;
      for (std::size_t r = 0; r < phi.rows(); ++r)
        if (phi(r, k)) a += lp.at_rx_from_row(i, r);
      inst.fixed_interference(i, k) = a;
    }
    for (int m = 0; m < inst.n_links; ++m)
      if (m != i) inst.cross(m, i) = lp.at_rx_from_u2u(i, m);
  }
  return inst;
}

namespace detail {

inline ScenarioState advance_all(const ScenarioState& s, const std::vector<double>& speeds,
                                 double v_max) {
  ScenarioState out = s;
  for (std::size_t i = 0; i < s.uavs.size(); ++i)
    out.uavs[i] = advance_position(s.uavs[i], speeds[i], v_max);
  return out;
}

struct SpeedPassResult {
  std::vector<double> speeds;
  std::vector<std::string> violations;
};

// One coordinate pass over all speed sub-problems with the interference
// context frozen at the iterate speeds. Every unit keeps its current speed
// unless the candidate is at least as good within the frozen view.
inline SpeedPassResult speed_pass(const ScenarioState& s, const ScenarioConfig& scen,
                                  const ChannelParams& ch, const AlgoParams& algo,
                                  const PhiMatrix& phi, const PsiMatrix& psi,
                                  const U2uInstance& uinst, const std::vector<double>& cur,
                                  const std::vector<SpeedBounds>& bounds) {
  SpeedContext ctx(s, phi, psi, ch, cur);
  SpeedPassResult res;
  res.speeds = cur;
  const double dv = algo.delta_v * scen.v_max;
  const double signal_unit = ch.tx_power_w() * ch.gain_g() * ch.fading_gain;

  std::map<int, std::vector<int>> relay_groups;
  for (const auto& [tx, rx] : s.pairing) relay_groups[rx].push_back(tx);
  std::set<int> relays;
  for (const auto& [rx, txs] : relay_groups) relays.insert(rx);

  for (int id : s.u2i_set) {
    if (relays.count(id)) continue;
    const double cand = optimize_non_u2u(id, bounds[id], ctx, dv, algo.refine_tol);
    if (ctx.eval_u2i(id, cand) >= ctx.eval_u2i(id, res.speeds[id])) res.speeds[id] = cand;
  }

  for (const auto& [rx, txs] : relay_groups) {
    bool joint_done = false;
    for (int tx : txs) {
      const int row = ctx.psi_row_of(tx);
      std::vector<double> interference;
      for (int k = 0; k < uinst.n_channels; ++k) {
        if (!psi(row, k)) continue;
        double a = uinst.fixed_interference(row, k);
        for (int m = 0; m < uinst.n_links; ++m)
          if (m != row && psi(m, k)) a += uinst.cross(m, row);
        interference.push_back(a);
      }
      const double d_max =
          interference.empty()
              ? std::numeric_limits<double>::infinity()
              : u2u_max_distance(signal_unit, interference, algo.r_min, ch.alpha);

      if (!joint_done) {
        joint_done = true;
        const PairSpeeds ps =
            optimize_u2u_pair(tx, rx, bounds[tx], bounds[rx], d_max, ctx, algo.refine_tol);
        if (ps.distance_violation) {
          res.speeds[tx] = ps.v_tx;
          res.speeds[rx] = ps.v_rx;
          res.violations.push_back("u2u_distance tx=" + std::to_string(tx));
          continue;
        }
        const double cur_dist =
            distance_uav_uav(ctx.end_pos(tx, res.speeds[tx]), ctx.end_pos(rx, res.speeds[rx]));
        const double f_new = ctx.eval_pair(tx, ps.v_tx, rx, ps.v_rx);
        const double f_cur = ctx.eval_pair(tx, res.speeds[tx], rx, res.speeds[rx]);
        if (cur_dist > d_max || f_new >= f_cur) {
          res.speeds[tx] = ps.v_tx;
          res.speeds[rx] = ps.v_rx;
        }
      } else {
        const Vec3 rx_end = ctx.end_pos(rx, res.speeds[rx]);
        const auto [vt, violated] = optimize_tx_given_rx(tx, bounds[tx], d_max, rx_end, ctx,
                                                         dv, algo.refine_tol);
        if (violated) {
          res.speeds[tx] = vt;
          res.violations.push_back("u2u_distance tx=" + std::to_string(tx));
          continue;
        }
        const double cur_dist = distance_uav_uav(ctx.end_pos(tx, res.speeds[tx]), rx_end);
        if (cur_dist > d_max ||
            ctx.eval_tx_only(tx, vt, rx_end) >= ctx.eval_tx_only(tx, res.speeds[tx], rx_end))
          res.speeds[tx] = vt;
      }
    }
  }
  return res;
}

struct Iterate {
  PhiMatrix phi;
  PsiMatrix psi;
  std::vector<double> speeds;
  double objective = 0.0;
  std::vector<std::string> violations;
  RateReport rates;
};

inline std::vector<SpeedBounds> slot_bounds(const ScenarioState& s, const ScenarioConfig& scen) {
  std::vector<SpeedBounds> bounds(s.uavs.size());
  for (const UavState& u : s.uavs) {
    if (u.progress >= u.trajectory_length) {
      bounds[u.id] = {0.0, 0.0};  // trajectory complete: hover
    } else {
      bounds[u.id] = feasible_bounds(u, s.slot, scen.horizon_T, scen.v_max);
    }
  }
  return bounds;
}

// Decision-level QoS flags for the returned iterate.
inline void append_rate_slack_flags(const ScenarioState& s, const PsiMatrix& psi,
                                    const RateReport& rr, double r_min,
                                    std::vector<std::string>* violations) {
  for (std::size_t l = 0; l < s.u2u_set.size(); ++l) {
    bool active = false;
    for (std::size_t k = 0; k < psi.cols(); ++k)
      if (psi(l, k)) active = true;
    if (active && rr.u2u_link_rate[l] < r_min * 0.99)
      violations->push_back("u2u_rate_slack tx=" + std::to_string(s.u2u_set[l]));
  }
}

}  // namespace detail

// One slot of the iterative subchannel-allocation and speed-optimization
// loop: exact U2I/CU assignment, branch-and-bound U2U allocation, then the
// speed pass, repeated until the objective gain drops to eps. Iterations
// that would lower the objective are discarded, so the recorded trace is
// non-decreasing.
inline std::pair<SlotDecision, IterTrace> run_isasoa(const ScenarioState& s,
                                                     const ScenarioConfig& scen,
                                                     const ChannelParams& ch,
                                                     const AlgoParams& algo) {
  const std::size_t rows = phi_row_count(s);
  const std::size_t k_count = static_cast<std::size_t>(scen.n_subchannels);
  const int n_l = static_cast<int>(s.u2u_set.size());
  const std::vector<SpeedBounds> bounds = detail::slot_bounds(s, scen);

  detail::Iterate prev;
  prev.phi = PhiMatrix(rows, k_count, 0);
  prev.psi = PsiMatrix(n_l, k_count, 0);
  prev.speeds.resize(s.uavs.size());
  for (const UavState& u : s.uavs)
    prev.speeds[u.id] =
        std::clamp(algo.initial_speed(scen.v_max), bounds[u.id].lower, bounds[u.id].upper);
  prev.objective = 0.0;

  IterTrace trace;
  bool converged = false;
  for (int r = 1; r <= algo.max_iter; ++r) {
    detail::Iterate cur;
    const ScenarioState mid = detail::advance_all(s, prev.speeds, scen.v_max);

    const RateReport weights = assemble_rates(mid, prev.phi, prev.psi, ch);
    cur.phi = solve_u2i({weights.bs_rate, algo.chi_max});

    U2uInstance uinst = build_u2u_instance(mid, cur.phi, ch, algo.r_min, algo.chi_max);
    if (n_l == 0) {
      cur.psi = PsiMatrix(0, k_count, 0);
    } else {
      const LfssResult seed = lfss(uinst);
      if (!seed.feasible) {
        cur.psi = PsiMatrix(n_l, k_count, 0);
        cur.violations.push_back("u2u_infeasible tx=" +
                                 std::to_string(s.u2u_set[seed.failed_link]));
      } else {
        cur.psi = branch_and_bound(uinst, seed.psi, {algo.bnb_node_budget, nullptr});
        // A budget-capped search can fall short of the previous allocation.
        if (is_psi_feasible(prev.psi, uinst) &&
            u2u_objective(prev.psi, uinst) > u2u_objective(cur.psi, uinst))
          cur.psi = prev.psi;
      }
    }

    const detail::SpeedPassResult sp = detail::speed_pass(s, scen, ch, algo, cur.phi, cur.psi,
                                                          uinst, prev.speeds, bounds);
    cur.speeds = sp.speeds;
    for (const std::string& v : sp.violations) cur.violations.push_back(v);

    const ScenarioState fin = detail::advance_all(s, cur.speeds, scen.v_max);
    cur.rates = assemble_rates(fin, cur.phi, cur.psi, ch);
    cur.objective = cur.rates.uplink_sum_rate;

    const double gain = cur.objective - prev.objective;
    if (gain < 0.0) {
      converged = true;  // no improvement possible; keep the previous iterate
      break;
    }
    trace.objectives.push_back(cur.objective);
    prev = std::move(cur);
    if (gain <= algo.eps) {
      converged = true;
      break;
    }
  }

  SlotDecision d;
  d.phi = std::move(prev.phi);
  d.psi = std::move(prev.psi);
  d.speeds = std::move(prev.speeds);
  d.objective = prev.objective;
  d.iterations = static_cast<int>(trace.objectives.size());
  d.converged = converged;
  d.violations = std::move(prev.violations);
  d.rates = std::move(prev.rates);
  if (!converged) d.violations.push_back("iteration_budget");
  detail::append_rate_slack_flags(s, d.psi, d.rates, algo.r_min, &d.violations);
  return {std::move(d), std::move(trace)};
}

// One-pass baseline: rate-ordered greedy U2I/CU allocation, then per-link
// greedy U2U allocation that ignores leakage costs, then the same speed pass.
inline SlotDecision run_greedy(const ScenarioState& s, const ScenarioConfig& scen,
                               const ChannelParams& ch, const AlgoParams& algo) {
  const std::size_t rows = phi_row_count(s);
  const std::size_t k_count = static_cast<std::size_t>(scen.n_subchannels);
  const int n_l = static_cast<int>(s.u2u_set.size());
  const std::vector<SpeedBounds> bounds = detail::slot_bounds(s, scen);

  std::vector<double> v0(s.uavs.size());
  for (const UavState& u : s.uavs)
    v0[u.id] = std::clamp(algo.initial_speed(scen.v_max), bounds[u.id].lower,
                          bounds[u.id].upper);

  SlotDecision d;
  const ScenarioState mid = detail::advance_all(s, v0, scen.v_max);
  const RateReport weights =
      assemble_rates(mid, PhiMatrix(rows, k_count, 0), PsiMatrix(n_l, k_count, 0), ch);

  d.phi = PhiMatrix(rows, k_count, 0);
  std::vector<std::pair<double, std::size_t>> row_order;
  for (std::size_t r = 0; r < rows; ++r) {
    double best = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) best = std::max(best, weights.bs_rate(r, k));
    row_order.emplace_back(-best, r);
  }
  std::sort(row_order.begin(), row_order.end());
  std::vector<bool> channel_taken(k_count, false);
  for (const auto& [neg_rate, r] : row_order) {
    std::vector<std::pair<double, std::size_t>> ch_order;
    for (std::size_t k = 0; k < k_count; ++k)
      if (!channel_taken[k]) ch_order.emplace_back(-weights.bs_rate(r, k), k);
    std::sort(ch_order.begin(), ch_order.end());
    int taken = 0;
    for (const auto& [neg, k] : ch_order) {
      if (taken >= algo.chi_max) break;
      d.phi(r, k) = 1;
      channel_taken[k] = true;
      ++taken;
    }
  }

  U2uInstance uinst = build_u2u_instance(mid, d.phi, ch, algo.r_min, algo.chi_max);
  d.psi = PsiMatrix(n_l, k_count, 0);
  for (int i = 0; i < n_l; ++i) {
    while (true) {
      double rate = 0.0;
      int owned = 0;
      for (std::size_t k = 0; k < k_count; ++k)
        if (d.psi(i, k)) {
          rate += u2u_rate_term(uinst, d.psi, i, static_cast<int>(k));
          ++owned;
        }
      if (rate >= algo.r_min) break;
      if (owned >= algo.chi_max) break;
      int best_k = -1;
      double best_rate = -1.0;
      for (std::size_t k = 0; k < k_count; ++k) {
        if (d.psi(i, k)) continue;
        const double cand = u2u_rate_term(uinst, d.psi, i, static_cast<int>(k));
        if (cand > best_rate) {
          best_rate = cand;
          best_k = static_cast<int>(k);
        }
      }
      if (best_k < 0) break;
      d.psi(i, best_k) = 1;
    }
  }

  const detail::SpeedPassResult sp =
      detail::speed_pass(s, scen, ch, algo, d.phi, d.psi, uinst, v0, bounds);
  d.speeds = sp.speeds;
  d.violations = sp.violations;

  const ScenarioState fin = detail::advance_all(s, d.speeds, scen.v_max);
  d.rates = assemble_rates(fin, d.phi, d.psi, ch);
  d.objective = d.rates.uplink_sum_rate;
  d.iterations = 1;
  d.converged = true;
  detail::append_rate_slack_flags(s, d.psi, d.rates, algo.r_min, &d.violations);
  return d;
}

}  // namespace uav2x
