#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "uav2x/errors.hpp"
#include "uav2x/grid.hpp"
#include "uav2x/propagation.hpp"
#include "uav2x/scenario.hpp"

namespace uav2x {

// Rows of the U2I/CU pairing matrix: U2I UAVs in ascending id order, then CUs.
inline std::size_t phi_row_count(const ScenarioState& s) {
  return s.u2i_set.size() + s.cus.size();
}

// All received powers needed for one slot's rate bookkeeping, in watts.
// Entries involving an airborne receiver listening to its own transmission
// are +infinity (zero distance), which collapses the affected SINR to zero.
struct LinkPowers {
  std::vector<double> bs_from_row;   // per phi row: signal at the BS
  std::vector<double> bs_from_u2u;   // per U2U link: transmitter leakage at the BS
  std::vector<double> rx_signal;     // per U2U link: own signal at its relay
  Grid<double> at_rx_from_row;       // (U2U link, phi row): interference at the relay
  Grid<double> at_rx_from_u2u;       // (U2U link, U2U link): cross interference; diagonal unused
};

inline LinkPowers build_link_powers(const ScenarioState& s, const ChannelParams& p) {
  const std::size_t n_h = s.u2i_set.size();
  const std::size_t m = s.cus.size();
  const std::size_t n_l = s.u2u_set.size();
  LinkPowers lp;
  lp.bs_from_row.resize(n_h + m);
  for (std::size_t r = 0; r < n_h; ++r)
    lp.bs_from_row[r] = u2i_received_power_w(s.uavs[s.u2i_set[r]].position, s.bs_height, p);
  for (std::size_t c = 0; c < m; ++c)
    lp.bs_from_row[n_h + c] = cu_received_power_w(s.cus[c].position, s.bs_height, p);

  lp.bs_from_u2u.resize(n_l);
  lp.rx_signal.resize(n_l);
  lp.at_rx_from_row = Grid<double>(n_l, n_h + m);
  lp.at_rx_from_u2u = Grid<double>(n_l, n_l);
  for (std::size_t l = 0; l < n_l; ++l) {
    const int tx = s.u2u_set[l];
    const int rx = s.pairing.at(tx);
    const Vec3& rx_pos = s.uavs[rx].position;
    lp.bs_from_u2u[l] = u2i_received_power_w(s.uavs[tx].position, s.bs_height, p);
    lp.rx_signal[l] =
        u2u_received_power_w(distance_uav_uav(s.uavs[tx].position, rx_pos), p);
    for (std::size_t r = 0; r < n_h; ++r) {
      const int other = s.u2i_set[r];
      const double d = (other == rx) ? 0.0 : distance_uav_uav(s.uavs[other].position, rx_pos);
      lp.at_rx_from_row(l, r) = uav_interference_power_w(d, p, /*u2u_transmitter=*/false);
    }
    for (std::size_t c = 0; c < m; ++c) {
      // Reciprocal air-to-ground path between the relay and the CU.
      lp.at_rx_from_row(l, n_h + c) =
          p.tx_power_w() / db_to_linear(air_to_ground_pathloss_db(rx_pos, s.cus[c].position, p));
    }
    for (std::size_t ml = 0; ml < n_l; ++ml) {
      if (ml == l) continue;
      const int other_tx = s.u2u_set[ml];
      const double d = (other_tx == rx) ? 0.0
                                        : distance_uav_uav(s.uavs[other_tx].position, rx_pos);
      lp.at_rx_from_u2u(l, ml) = uav_interference_power_w(d, p, /*u2u_transmitter=*/true);
    }
  }
  return lp;
}

// Per-link, per-subchannel SINRs and rates of one slot, plus the uplink
// sum-rate objective. SINR entries are filled for unassigned pairs too (the
// value the pair would see under the given allocation), which is what the
// allocation solvers consume as weights.
struct RateReport {
  Grid<double> bs_sinr;               // (N_h + M) x K
  Grid<double> bs_rate;
  Grid<double> u2u_sinr;              // N_l x K
  Grid<double> u2u_rate;
  std::vector<double> u2u_link_rate;  // per U2U link, psi-masked aggregate
  double uplink_sum_rate = 0.0;
};

namespace detail {

inline void check_binary(const BinaryMatrix& m, const char* name) {
  for (std::uint8_t v : m.data())
    if (v > 1) throw ContractError(std::string(name) + " matrix must be binary");
}

}  // namespace detail

inline RateReport assemble_rates(const ScenarioState& s, const PhiMatrix& phi,
                                 const PsiMatrix& psi, const ChannelParams& p) {
  const std::size_t rows = phi_row_count(s);
  const std::size_t n_l = s.u2u_set.size();
  const std::size_t k_count = phi.cols();
  if (phi.rows() != rows)
    throw ContractError("phi row count does not match U2I set plus CUs");
  if (psi.rows() != n_l || (n_l > 0 && psi.cols() != k_count))
    throw ContractError("psi shape does not match U2U set");
  detail::check_binary(phi, "phi");
  detail::check_binary(psi, "psi");
  for (std::size_t k = 0; k < k_count; ++k) {
    int col = 0;
    for (std::size_t r = 0; r < rows; ++r) col += phi(r, k);
    if (col > 1)
      throw ContractError("subchannel assigned to more than one U2I/CU link");
  }

  const LinkPowers lp = build_link_powers(s, p);
  const double noise = p.noise_w();

  RateReport rr;
  rr.bs_sinr = Grid<double>(rows, k_count);
  rr.bs_rate = Grid<double>(rows, k_count);
  rr.u2u_sinr = Grid<double>(n_l, k_count);
  rr.u2u_rate = Grid<double>(n_l, k_count);
  rr.u2u_link_rate.assign(n_l, 0.0);

  for (std::size_t k = 0; k < k_count; ++k) {
    double leak = 0.0;
    for (std::size_t l = 0; l < n_l; ++l)
      if (psi(l, k)) leak += lp.bs_from_u2u[l];
    for (std::size_t r = 0; r < rows; ++r) {
      const double sinr = lp.bs_from_row[r] / (noise + leak);
      rr.bs_sinr(r, k) = sinr;
      rr.bs_rate(r, k) = rate_bps_hz(sinr);
      if (phi(r, k)) rr.uplink_sum_rate += rr.bs_rate(r, k);
    }
    for (std::size_t l = 0; l < n_l; ++l) {
      double denom = noise;
      for (std::size_t r = 0; r < rows; ++r)
        if (phi(r, k)) denom += lp.at_rx_from_row(l, r);
      for (std::size_t ml = 0; ml < n_l; ++ml)
        if (ml != l && psi(ml, k)) denom += lp.at_rx_from_u2u(l, ml);
      const double sinr = std::isinf(denom) ? 0.0 : lp.rx_signal[l] / denom;
      rr.u2u_sinr(l, k) = sinr;
      rr.u2u_rate(l, k) = rate_bps_hz(sinr);
      if (psi(l, k)) rr.u2u_link_rate[l] += rr.u2u_rate(l, k);
    }
  }
  return rr;
}

}  // namespace uav2x
