#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "uav2x/errors.hpp"
#include "uav2x/grid.hpp"
#include "uav2x/propagation.hpp"

namespace uav2x {

// One U2U allocation sub-problem with the U2I/CU pairing and all positions
// frozen. All powers in watts; fixed_interference rows already include the
// noise floor. Entries may be +infinity where a receiver would listen on a
// subchannel it transmits on; the affected rate terms are zero.
struct U2uInstance {
  int n_links = 0;
  int n_channels = 0;
  BinaryMatrix phi;                 // (N_h + M) x K, fixed
  std::vector<double> bs_signal;    // per phi row
  std::vector<double> bs_leak;      // per U2U link: transmitter leakage at the BS
  double noise_w = 0.0;
  Grid<double> rx_signal;           // n_links x K: own signal at the relay
  Grid<double> cross;               // (m, i): interference from transmitter m at link i's relay
  Grid<double> fixed_interference;  // n_links x K: noise + co-channel U2I/CU interference
  double r_min = 0.0;               // minimum aggregate rate per U2U link
  int chi_max = 1;
};

// Rate of link i on channel k when the set of co-channel U2U transmitters is
// given by psi's column k.
inline double u2u_rate_term(const U2uInstance& inst, const PsiMatrix& psi, int i, int k) {
  double denom = inst.fixed_interference(i, k);
  for (int m = 0; m < inst.n_links; ++m)
    if (m != i && psi(m, k)) denom += inst.cross(m, i);
  if (std::isinf(denom)) return 0.0;
  return rate_bps_hz(inst.rx_signal(i, k) / denom);
}

inline std::vector<double> u2u_link_rates(const PsiMatrix& psi, const U2uInstance& inst) {
  std::vector<double> rates(inst.n_links, 0.0);
  for (int i = 0; i < inst.n_links; ++i)
    for (int k = 0; k < inst.n_channels; ++k)
      if (psi(i, k)) rates[i] += u2u_rate_term(inst, psi, i, k);
  return rates;
}

// The uplink sum-rate as a function of psi, with phi fixed.
inline double u2u_objective(const PsiMatrix& psi, const U2uInstance& inst) {
  const std::size_t rows = inst.phi.rows();
  double total = 0.0;
  for (int k = 0; k < inst.n_channels; ++k) {
    double leak = 0.0;
    for (int l = 0; l < inst.n_links; ++l)
      if (psi(l, k)) leak += inst.bs_leak[l];
    for (std::size_t r = 0; r < rows; ++r)
      if (inst.phi(r, k))
        total += rate_bps_hz(inst.bs_signal[r] / (inst.noise_w + leak));
  }
  return total;
}

inline bool is_psi_feasible(const PsiMatrix& psi, const U2uInstance& inst) {
  for (int i = 0; i < inst.n_links; ++i) {
    int row_sum = 0;
    for (int k = 0; k < inst.n_channels; ++k) row_sum += psi(i, k);
    if (row_sum > inst.chi_max) return false;
  }
  const std::vector<double> rates = u2u_link_rates(psi, inst);
  for (double r : rates)
    if (r < inst.r_min) return false;
  return true;
}

struct LfssResult {
  bool feasible = false;
  PsiMatrix psi;
  int failed_link = -1;
  std::string reason;
};

// Low-complexity feasible solution search. Every link first takes the
// subchannel with the best rate under U2I/CU interference alone; while some
// link misses the rate floor, the lowest-index such link takes its best
// subchannel it does not own yet, within the per-link cap.
inline LfssResult lfss(const U2uInstance& inst) {
  LfssResult res;
  res.psi = PsiMatrix(inst.n_links, inst.n_channels, 0);
  if (inst.n_links == 0) {
    res.feasible = true;
    return res;
  }

  std::vector<std::vector<int>> pref(inst.n_links);
  for (int i = 0; i < inst.n_links; ++i) {
    std::vector<std::pair<double, int>> ranked;
    ranked.reserve(inst.n_channels);
    for (int k = 0; k < inst.n_channels; ++k) {
      double denom = inst.fixed_interference(i, k);
      double r0 = std::isinf(denom) ? 0.0 : rate_bps_hz(inst.rx_signal(i, k) / denom);
      ranked.emplace_back(-r0, k);  // descending rate, ascending channel on ties
    }
    std::sort(ranked.begin(), ranked.end());
    for (auto& [neg, k] : ranked) pref[i].push_back(k);
    if (inst.n_channels > 0) res.psi(i, pref[i][0]) = 1;
  }

  while (true) {
    const std::vector<double> rates = u2u_link_rates(res.psi, inst);
    int lacking = -1;
    for (int i = 0; i < inst.n_links; ++i)
      if (rates[i] < inst.r_min) {
        lacking = i;
        break;
      }
    if (lacking < 0) {
      res.feasible = true;
      return res;
    }
    int owned = 0;
    for (int k = 0; k < inst.n_channels; ++k) owned += res.psi(lacking, k);
    if (owned >= inst.chi_max) {
      res.failed_link = lacking;
      res.reason = "per-link subchannel cap reached below the rate floor";
      return res;
    }
    int next = -1;
    for (int k : pref[lacking])
      if (!res.psi(lacking, k)) {
        next = k;
        break;
      }
    if (next < 0) {
      res.failed_link = lacking;
      res.reason = "all subchannels taken below the rate floor";
      return res;
    }
    res.psi(lacking, next) = 1;
  }
}

struct BnbOptions {
  std::uint64_t node_budget = 1000000;
  std::ostream* trace = nullptr;  // line-delimited JSON search trace
};

namespace detail {

struct BnbWorkspace {
  const U2uInstance& inst;
  std::vector<std::vector<int>> owners;  // phi rows per channel
  std::vector<int> order;                // variable indices in branching order

  explicit BnbWorkspace(const U2uInstance& in) : inst(in) {
    owners.resize(in.n_channels);
    for (int k = 0; k < in.n_channels; ++k)
      for (std::size_t r = 0; r < in.phi.rows(); ++r)
        if (in.phi(r, k)) owners[k].push_back(static_cast<int>(r));
    // Branch on the variable with the largest interference-free rate first.
    std::vector<std::pair<double, int>> ranked;
    for (int i = 0; i < in.n_links; ++i)
      for (int k = 0; k < in.n_channels; ++k) {
        const double denom = in.fixed_interference(i, k);
        const double r0 = std::isinf(denom) ? 0.0 : rate_bps_hz(in.rx_signal(i, k) / denom);
        ranked.emplace_back(-r0, i * in.n_channels + k);
      }
    std::sort(ranked.begin(), ranked.end());
    for (auto& [neg, v] : ranked) order.push_back(v);
  }

  // Objective upper bound: only fixed-1 variables contribute interference.
  // Equals the objective of the completion that zeroes every unfixed variable.
  double objective_bound(const std::vector<std::int8_t>& st) const {
    double total = 0.0;
    for (int k = 0; k < inst.n_channels; ++k) {
      double leak = 0.0;
      for (int l = 0; l < inst.n_links; ++l)
        if (st[l * inst.n_channels + k] == 1) leak += inst.bs_leak[l];
      for (int r : owners[k])
        total += rate_bps_hz(inst.bs_signal[r] / (inst.noise_w + leak));
    }
    return total;
  }

  // Rate term of (i, k) with other links' fixed-1 interference kept.
  double rate_term_fixed(const std::vector<std::int8_t>& st, int i, int k) const {
    double denom = inst.fixed_interference(i, k);
    for (int m = 0; m < inst.n_links; ++m)
      if (m != i && st[m * inst.n_channels + k] == 1) denom += inst.cross(m, i);
    if (std::isinf(denom)) return 0.0;
    return rate_bps_hz(inst.rx_signal(i, k) / denom);
  }

  PsiMatrix fixed1_matrix(const std::vector<std::int8_t>& st) const {
    PsiMatrix psi(inst.n_links, inst.n_channels, 0);
    for (int i = 0; i < inst.n_links; ++i)
      for (int k = 0; k < inst.n_channels; ++k)
        if (st[i * inst.n_channels + k] == 1) psi(i, k) = 1;
    return psi;
  }

  std::string state_string(const std::vector<std::int8_t>& st) const {
    std::string out;
    out.reserve(st.size());
    for (std::int8_t v : st) out.push_back(v < 0 ? 'u' : static_cast<char>('0' + v));
    return out;
  }
};

inline void bnb_trace(std::ostream* os, std::uint64_t node, const char* action,
                      const std::string& state, double fbar, double flb, int var = -1,
                      int value = -1) {
  if (!os) return;
  char nums[64];
  std::snprintf(nums, sizeof(nums), "\"fbar\":%.17g,\"flb\":%.17g", fbar, flb);
  (*os) << "{\"node\":" << node << ",\"action\":\"" << action << "\",\"state\":\"" << state
        << "\"," << nums;
  if (var >= 0) (*os) << ",\"var\":" << var;
  if (value >= 0) (*os) << ",\"value\":" << value;
  (*os) << "}\n";
}

}  // namespace detail

// Depth-first branch-and-bound seeded with a feasible solution. With an
// unlimited node budget the result is the exact optimum; when the budget runs
// out the best feasible solution found so far is returned.
inline PsiMatrix branch_and_bound(const U2uInstance& inst, const PsiMatrix& seed,
                                  const BnbOptions& opts = {}) {
  if (inst.n_links == 0) return PsiMatrix(0, inst.n_channels, 0);
  if (seed.rows() != static_cast<std::size_t>(inst.n_links) ||
      seed.cols() != static_cast<std::size_t>(inst.n_channels))
    throw ContractError("branch-and-bound seed shape does not match the instance");
  if (!is_psi_feasible(seed, inst))
    throw ContractError("branch-and-bound seed is not feasible");

  detail::BnbWorkspace ws(inst);
  PsiMatrix incumbent = seed;
  double f_lb = u2u_objective(seed, inst);
  const int n_vars = inst.n_links * inst.n_channels;

  std::vector<std::vector<std::int8_t>> stack;
  stack.emplace_back(n_vars, std::int8_t{-1});
  std::uint64_t nodes = 0;

  while (!stack.empty()) {
    std::vector<std::int8_t> st = std::move(stack.back());
    stack.pop_back();

    bool fathomed = false;
    while (!fathomed) {
      if (++nodes > opts.node_budget) return incumbent;  // anytime contract

      // Forced cap violation.
      for (int i = 0; i < inst.n_links && !fathomed; ++i) {
        int ones = 0;
        for (int k = 0; k < inst.n_channels; ++k)
          if (st[i * inst.n_channels + k] == 1) ++ones;
        if (ones > inst.chi_max) {
          detail::bnb_trace(opts.trace, nodes, "fathom_cap", ws.state_string(st), 0.0, f_lb);
          fathomed = true;
        }
      }
      if (fathomed) break;

      const double fbar = ws.objective_bound(st);
      detail::bnb_trace(opts.trace, nodes, "enter", ws.state_string(st), fbar, f_lb);

      // The zeroed completion achieves exactly fbar; adopt it when feasible.
      if (fbar > f_lb) {
        const PsiMatrix cand = ws.fixed1_matrix(st);
        if (is_psi_feasible(cand, inst)) {
          incumbent = cand;
          f_lb = fbar;
          detail::bnb_trace(opts.trace, nodes, "incumbent", ws.state_string(st), fbar, f_lb);
        }
      }
      if (fbar <= f_lb) {
        detail::bnb_trace(opts.trace, nodes, "fathom_bound", ws.state_string(st), fbar, f_lb);
        break;
      }

      // Per-link rate upper bounds: own unfixed variables at 1, other links'
      // unfixed variables at 0, other links' fixed-1 interference kept.
      std::vector<double> rate_bound(inst.n_links, 0.0);
      for (int i = 0; i < inst.n_links && !fathomed; ++i) {
        for (int k = 0; k < inst.n_channels; ++k)
          if (st[i * inst.n_channels + k] != 0) rate_bound[i] += ws.rate_term_fixed(st, i, k);
        if (rate_bound[i] < inst.r_min) {
          detail::bnb_trace(opts.trace, nodes, "fathom_rate", ws.state_string(st), fbar, f_lb, i);
          fathomed = true;
        }
      }
      if (fathomed) break;

      // Variable fixation.
      const std::string pre_fix_state = opts.trace ? ws.state_string(st) : std::string();
      bool fixed_any = false;
      for (int v = 0; v < n_vars && !fathomed; ++v) {
        if (st[v] != -1) continue;
        const int i = v / inst.n_channels;
        const int k = v % inst.n_channels;
        bool want0 = false, want1 = false;

        // Fixing to 0 leaves the bound unchanged; its penalty is zero.
        const double p0 = 0.0;
        if (fbar - p0 <= f_lb) want1 = true;

        // Penalty of fixing to 1: the co-channel U2I/CU rate drop.
        double p1 = 0.0;
        if (!ws.owners[k].empty()) {
          double leak = 0.0;
          for (int l = 0; l < inst.n_links; ++l)
            if (st[l * inst.n_channels + k] == 1) leak += inst.bs_leak[l];
          for (int r : ws.owners[k])
            p1 += rate_bps_hz(inst.bs_signal[r] / (inst.noise_w + leak)) -
                  rate_bps_hz(inst.bs_signal[r] / (inst.noise_w + leak + inst.bs_leak[i]));
        }
        if (fbar - p1 <= f_lb) want0 = true;

        // Rate-floor fixation: without channel k link i cannot reach r_min.
        const double q0 = ws.rate_term_fixed(st, i, k);
        if (rate_bound[i] - q0 < inst.r_min) want1 = true;

        if (want0 && want1) {
          detail::bnb_trace(opts.trace, nodes, "fathom_contradiction",
                            opts.trace ? ws.state_string(st) : "", fbar, f_lb, v);
          fathomed = true;
        } else if (want1) {
          st[v] = 1;
          fixed_any = true;
          detail::bnb_trace(opts.trace, nodes, "fix", pre_fix_state, fbar, f_lb, v, 1);
        } else if (want0) {
          st[v] = 0;
          fixed_any = true;
          detail::bnb_trace(opts.trace, nodes, "fix", pre_fix_state, fbar, f_lb, v, 0);
        }
      }
      if (fathomed) break;
      if (fixed_any) continue;  // re-evaluate the node with the new fixations

      int branch_var = -1;
      for (int v : ws.order)
        if (st[v] == -1) {
          branch_var = v;
          break;
        }
      if (branch_var < 0) break;  // leaf; already handled as the zeroed completion

      detail::bnb_trace(opts.trace, nodes, "branch", ws.state_string(st), fbar, f_lb,
                        branch_var);
      std::vector<std::int8_t> zero_child = st;
      zero_child[branch_var] = 0;
      stack.push_back(std::move(zero_child));
      st[branch_var] = 1;
      stack.push_back(std::move(st));  // explore the 1-branch first
      break;
    }
  }
  return incumbent;
}

}  // namespace uav2x
