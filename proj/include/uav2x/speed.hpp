#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "uav2x/alloc_u2u.hpp"
#include "uav2x/channel.hpp"
#include "uav2x/errors.hpp"
#include "uav2x/scenario.hpp"

namespace uav2x {

struct SpeedBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Feasible speed range of one UAV in slot t of a T-slot horizon: fast enough
// that the remaining trajectory still fits into the remaining slots, no
// faster than v_max.
inline SpeedBounds feasible_bounds(const UavState& u, int t, int T, double v_max) {
  if (t < 0 || t >= T) throw ContractError("slot index outside the horizon");
  const double remaining = u.trajectory_length - u.progress;
  if (remaining <= 0.0) return {0.0, v_max};
  // A UAV riding the lower bound keeps remaining == v_max * (T - t) exactly;
  // the slack absorbs the rounding of that knife edge.
  if (remaining > v_max * static_cast<double>(T - t) + 1e-6)
    throw InfeasibleError("horizon infeasible: remaining trajectory exceeds reachable distance");
  const double lower =
      std::clamp(remaining - v_max * static_cast<double>(T - t - 1), 0.0, v_max);
  return {lower, v_max};
}

// Largest transmitter-receiver distance at which the aggregate U2U rate still
// reaches r_min, with per-channel interference frozen. signal_unit is the
// distance-free received-power factor (tx power x link gain x fading).
inline double u2u_max_distance(double signal_unit, const std::vector<double>& interference_w,
                               double r_min, double alpha) {
  if (interference_w.empty())
    throw ContractError("U2U link has no assigned subchannel");
  if (r_min <= 0.0) return std::numeric_limits<double>::infinity();
  const double need = std::exp2(r_min / static_cast<double>(interference_w.size())) - 1.0;
  double d_max = std::numeric_limits<double>::infinity();
  for (double interference : interference_w) {
    if (std::isinf(interference)) return 0.0;
    d_max = std::min(d_max, std::pow(signal_unit / (interference * need), 1.0 / alpha));
  }
  return d_max;
}

namespace detail {

inline constexpr double kGoldenRatio = 0.6180339887498949;  // (sqrt(5)-1)/2

// Deterministic 1-D maximizer: uniform grid scan (first best wins, so ties
// resolve to the smallest argument) plus golden-section refinement around the
// best cell. The refined point is only adopted on strict improvement.
template <typename F>
std::pair<double, double> maximize_scalar(F&& f, double lo, double hi, double step, double tol) {
  if (!(hi > lo)) return {lo, f(lo)};
  const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / step)));
  double best_v = lo, best_f = f(lo);
  for (int i = 1; i <= n; ++i) {
    // endpoint kept exact: lo + (hi-lo) can overshoot hi by an ulp
    const double v = i == n ? hi
                            : std::min(hi, lo + (hi - lo) * static_cast<double>(i) / n);
    const double fv = f(v);
    if (fv > best_f) {
      best_f = fv;
      best_v = v;
    }
  }
  const double h = (hi - lo) / n;
  double a = std::max(lo, best_v - h), b = std::min(hi, best_v + h);
  double c = b - kGoldenRatio * (b - a);
  double d = a + kGoldenRatio * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGoldenRatio * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGoldenRatio * (b - a);
      fd = f(d);
    }
  }
  const double mid = 0.5 * (a + b);
  const double fm = f(mid);
  if (fm > best_f) return {mid, fm};
  return {best_v, best_f};
}

// Feasible interval of v so that ||base + v * dir|| <= d_max, intersected
// with [lo, hi]; dir is unit length. Returns false if empty.
inline bool distance_interval(const Vec3& base, const Vec3& dir, double d_max, double lo,
                              double hi, double& out_lo, double& out_hi) {
  if (std::isinf(d_max)) {
    out_lo = lo;
    out_hi = hi;
    return true;
  }
  const double p = base.dot(dir);
  const double disc = p * p - base.dot(base) + d_max * d_max;
  if (disc < 0.0) return false;
  const double s = std::sqrt(disc);
  out_lo = std::max(lo, -p - s);
  out_hi = std::min(hi, -p + s);
  return out_lo <= out_hi;
}

}  // namespace detail

// Frozen-interference view of one slot used by the per-UAV speed searches.
// All other transmitters sit at the end-of-slot positions implied by the
// current iterate speeds; only the unit under optimization moves.
class SpeedContext {
 public:
  SpeedContext(const ScenarioState& state, const PhiMatrix& phi, const PsiMatrix& psi,
               const ChannelParams& params, const std::vector<double>& iterate_speeds)
      : state_(state), phi_(phi), psi_(psi), params_(params), speeds_(iterate_speeds) {
    const std::size_t n_h = state.u2i_set.size();
    const std::size_t k_count = phi.cols();
    phi_row_of_.assign(state.uavs.size(), -1);
    for (std::size_t r = 0; r < n_h; ++r) phi_row_of_[state.u2i_set[r]] = static_cast<int>(r);
    psi_row_of_.assign(state.uavs.size(), -1);
    for (std::size_t l = 0; l < state.u2u_set.size(); ++l)
      psi_row_of_[state.u2u_set[l]] = static_cast<int>(l);

    owner_row_.assign(k_count, -1);
    for (std::size_t k = 0; k < k_count; ++k)
      for (std::size_t r = 0; r < phi.rows(); ++r)
        if (phi(r, k)) owner_row_[k] = static_cast<int>(r);

    frozen_end_.resize(state.uavs.size());
    for (const UavState& u : state.uavs)
      frozen_end_[u.id] = u.position + u.direction * speeds_[u.id];

    owner_signal_.assign(k_count, 0.0);
    for (std::size_t k = 0; k < k_count; ++k) {
      const int r = owner_row_[k];
      if (r < 0) continue;
      if (static_cast<std::size_t>(r) < n_h)
        owner_signal_[k] =
            u2i_received_power_w(frozen_end_[state.u2i_set[r]], state.bs_height, params);
      else
        owner_signal_[k] =
            cu_received_power_w(state.cus[r - n_h].position, state.bs_height, params);
    }

    leak_frozen_.assign(k_count, 0.0);
    leak_by_link_ = Grid<double>(state.u2u_set.size(), k_count, 0.0);
    for (std::size_t l = 0; l < state.u2u_set.size(); ++l) {
      const double p_bs =
          u2i_received_power_w(frozen_end_[state.u2u_set[l]], state.bs_height, params);
      for (std::size_t k = 0; k < k_count; ++k)
        if (psi(l, k)) {
          leak_by_link_(l, k) = p_bs;
          leak_frozen_[k] += p_bs;
        }
    }
  }

  const ScenarioState& state() const { return state_; }
  const Vec3& frozen_end(int uav_id) const { return frozen_end_[uav_id]; }
  int phi_row_of(int uav_id) const { return phi_row_of_[uav_id]; }
  int psi_row_of(int uav_id) const { return psi_row_of_[uav_id]; }

  Vec3 end_pos(int uav_id, double v) const {
    const UavState& u = state_.uavs[uav_id];
    return u.position + u.direction * v;
  }

  // Objective slice of a U2I UAV that participates in no U2U link.
  double eval_u2i(int uav_id, double v) const {
    const int row = phi_row_of_[uav_id];
    if (row < 0) return 0.0;
    const Vec3 pos = end_pos(uav_id, v);
    double total = 0.0;
    const double noise = params_.noise_w();
    for (std::size_t k = 0; k < phi_.cols(); ++k) {
      if (!phi_(row, k)) continue;
      const double sig = u2i_received_power_w(pos, state_.bs_height, params_);
      total += rate_bps_hz(sig / (noise + leak_frozen_[k]));
    }
    return total;
  }

  // Objective slice touched by a (transmitter, relay) pair: the relay's own
  // uplink terms plus every co-channel term hit by the transmitter leakage.
  double eval_pair(int tx_id, double v_tx, int rx_id, double v_rx) const {
    const int rx_row = phi_row_of_[rx_id];
    const int tx_row = psi_row_of_[tx_id];
    const Vec3 rx_pos = end_pos(rx_id, v_rx);
    const Vec3 tx_pos = end_pos(tx_id, v_tx);
    const double noise = params_.noise_w();
    double tx_leak = 0.0;
    bool tx_leak_ready = false;
    double total = 0.0;
    for (std::size_t k = 0; k < phi_.cols(); ++k) {
      const bool rx_owns = owner_row_[k] == rx_row && rx_row >= 0;
      const bool tx_on = tx_row >= 0 && psi_(tx_row, k);
      if (!rx_owns && !tx_on) continue;
      if (owner_row_[k] < 0) continue;  // leakage on an unassigned subchannel costs nothing
      double sig = owner_signal_[k];
      if (rx_owns) sig = u2i_received_power_w(rx_pos, state_.bs_height, params_);
      double leak = leak_frozen_[k];
      if (tx_on) {
        if (!tx_leak_ready) {
          tx_leak = u2i_received_power_w(tx_pos, state_.bs_height, params_);
          tx_leak_ready = true;
        }
        leak += tx_leak - leak_by_link_(tx_row, k);
      }
      total += rate_bps_hz(sig / (noise + leak));
    }
    return total;
  }

  // Transmitter moving alone, its relay frozen at a decided end position.
  double eval_tx_only(int tx_id, double v_tx, const Vec3& /*rx_end*/) const {
    const int tx_row = psi_row_of_[tx_id];
    const Vec3 tx_pos = end_pos(tx_id, v_tx);
    const double noise = params_.noise_w();
    double total = 0.0;
    bool leak_ready = false;
    double tx_leak = 0.0;
    for (std::size_t k = 0; k < phi_.cols(); ++k) {
      if (tx_row < 0 || !psi_(tx_row, k)) continue;
      if (owner_row_[k] < 0) continue;
      if (!leak_ready) {
        tx_leak = u2i_received_power_w(tx_pos, state_.bs_height, params_);
        leak_ready = true;
      }
      const double leak = leak_frozen_[k] + tx_leak - leak_by_link_(tx_row, k);
      total += rate_bps_hz(owner_signal_[k] / (noise + leak));
    }
    return total;
  }

 private:
  const ScenarioState& state_;
  const PhiMatrix& phi_;
  const PsiMatrix& psi_;
  const ChannelParams& params_;
  std::vector<double> speeds_;
  std::vector<int> phi_row_of_, psi_row_of_;
  std::vector<int> owner_row_;
  std::vector<double> owner_signal_;
  std::vector<double> leak_frozen_;
  Grid<double> leak_by_link_;
  std::vector<Vec3> frozen_end_;
};

// Speed of a U2I UAV that neither relays nor transmits U2U: maximize its own
// uplink contribution; ties resolve to the smallest speed.
inline double optimize_non_u2u(int uav_id, const SpeedBounds& bounds, const SpeedContext& ctx,
                               double delta_v_abs, double refine_tol) {
  auto f = [&](double v) { return ctx.eval_u2i(uav_id, v); };
  return detail::maximize_scalar(f, bounds.lower, bounds.upper, delta_v_abs, refine_tol).first;
}

struct PairSpeeds {
  double v_tx = 0.0;
  double v_rx = 0.0;
  bool distance_violation = false;
};

// Joint speed search of a U2U transmitter and its relay over the bound box
// intersected with the end-of-slot distance constraint. When the
// intersection is empty the distance-minimizing feasible pair is returned
// with the violation flag set.
inline PairSpeeds optimize_u2u_pair(int tx_id, int rx_id, const SpeedBounds& b_tx,
                                    const SpeedBounds& b_rx, double d_max,
                                    const SpeedContext& ctx, double refine_tol) {
  const Vec3 base = ctx.state().uavs[tx_id].position - ctx.state().uavs[rx_id].position;
  const Vec3 dir_tx = ctx.state().uavs[tx_id].direction;
  const Vec3 dir_rx = ctx.state().uavs[rx_id].direction;
  auto dist = [&](double vt, double vr) {
    return (base + dir_tx * vt - dir_rx * vr).norm();
  };
  auto f = [&](double vt, double vr) { return ctx.eval_pair(tx_id, vt, rx_id, vr); };

  constexpr int kCells = 20;
  const double span_tx = b_tx.upper - b_tx.lower;
  const double span_rx = b_rx.upper - b_rx.lower;
  bool found = false;
  double best_vt = b_tx.lower, best_vr = b_rx.lower;
  double best_f = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kCells; ++i) {
    const double vt = i == kCells
                          ? b_tx.upper
                          : std::min(b_tx.upper,
                                     b_tx.lower + span_tx * static_cast<double>(i) / kCells);
    for (int j = 0; j <= kCells; ++j) {
      const double vr = j == kCells
                            ? b_rx.upper
                            : std::min(b_rx.upper,
                                       b_rx.lower + span_rx * static_cast<double>(j) / kCells);
      if (dist(vt, vr) > d_max) continue;
      const double fv = f(vt, vr);
      if (!found || fv > best_f) {
        found = true;
        best_f = fv;
        best_vt = vt;
        best_vr = vr;
      }
    }
  }

  if (!found) {
    // Continuous distance minimum over the box; the optimal v_rx for a fixed
    // v_tx has a closed form, the remaining 1-D profile is convex.
    auto vr_star = [&](double vt) {
      return std::clamp((base + dir_tx * vt).dot(dir_rx), b_rx.lower, b_rx.upper);
    };
    auto neg_profile = [&](double vt) { return -dist(vt, vr_star(vt)); };
    const double vt0 =
        detail::maximize_scalar(neg_profile, b_tx.lower, b_tx.upper,
                                std::max(span_tx / kCells, refine_tol), refine_tol)
            .first;
    const double vr0 = vr_star(vt0);
    if (dist(vt0, vr0) > d_max)
      return {vt0, vr0, true};
    best_vt = vt0;
    best_vr = vr0;
    best_f = f(vt0, vr0);
    found = true;
  }

  // Alternating per-axis refinement restricted to the feasible slice.
  const double step_tx = std::max(span_tx / kCells / 8.0, refine_tol);
  const double step_rx = std::max(span_rx / kCells / 8.0, refine_tol);
  for (int round = 0; round < 3; ++round) {
    double lo, hi;
    if (detail::distance_interval(base - dir_rx * best_vr, dir_tx, d_max, b_tx.lower,
                                  b_tx.upper, lo, hi)) {
      auto ft = [&](double vt) { return f(vt, best_vr); };
      auto [vt, fv] = detail::maximize_scalar(ft, lo, hi, step_tx, refine_tol);
      if (fv > best_f) {
        best_f = fv;
        best_vt = vt;
      }
    }
    // For the receiver axis the moving term enters with a negative sign.
    if (detail::distance_interval((base + dir_tx * best_vt) * -1.0, dir_rx, d_max, b_rx.lower,
                                  b_rx.upper, lo, hi)) {
      auto fr = [&](double vr) { return f(best_vt, vr); };
      auto [vr, fv] = detail::maximize_scalar(fr, lo, hi, step_rx, refine_tol);
      if (fv > best_f) {
        best_f = fv;
        best_vr = vr;
      }
    }
  }
  return {best_vt, best_vr, false};
}

// Transmitter-only variant used when several transmitters share one relay
// whose speed is already decided.
inline std::pair<double, bool> optimize_tx_given_rx(int tx_id, const SpeedBounds& b_tx,
                                                    double d_max, const Vec3& rx_end,
                                                    const SpeedContext& ctx, double delta_v_abs,
                                                    double refine_tol) {
  const Vec3 base = ctx.state().uavs[tx_id].position - rx_end;
  const Vec3 dir_tx = ctx.state().uavs[tx_id].direction;
  double lo, hi;
  if (!detail::distance_interval(base, dir_tx, d_max, b_tx.lower, b_tx.upper, lo, hi)) {
    const double vt = std::clamp(-base.dot(dir_tx), b_tx.lower, b_tx.upper);
    return {vt, true};
  }
  auto f = [&](double vt) { return ctx.eval_tx_only(tx_id, vt, rx_end); };
  return {detail::maximize_scalar(f, lo, hi, delta_v_abs, refine_tol).first, false};
}

}  // namespace uav2x
