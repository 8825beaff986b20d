#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "uav2x/errors.hpp"
#include "uav2x/grid.hpp"

namespace uav2x {

// One U2I/CU allocation sub-problem: maximize the weight sum subject to at
// most one link per subchannel and at most chi_max subchannels per link.
struct AssignmentInstance {
  Grid<double> weights;  // (N_h + M) x K, nonnegative rates
  int chi_max = 1;
};

// Feasibility check plus objective evaluation.
inline double verify_phi(const PhiMatrix& phi, const AssignmentInstance& inst) {
  if (phi.rows() != inst.weights.rows() || phi.cols() != inst.weights.cols())
    throw ContractError("phi shape does not match the instance");
  const std::size_t rows = phi.rows(), cols = phi.cols();
  double objective = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    int row_sum = 0;
    for (std::size_t k = 0; k < cols; ++k) {
      if (phi(r, k) > 1) throw ContractError("phi must be binary");
      if (phi(r, k)) {
        ++row_sum;
        objective += inst.weights(r, k);
      }
    }
    if (row_sum > inst.chi_max)
      throw ContractError("a link is paired with more subchannels than the per-link cap");
  }
  for (std::size_t k = 0; k < cols; ++k) {
    int col_sum = 0;
    for (std::size_t r = 0; r < rows; ++r) col_sum += phi(r, k);
    if (col_sum > 1)
      throw ContractError("a subchannel is assigned to more than one U2I/CU link");
  }
  return objective;
}

// Exact solver. The constraint matrix is a transportation polytope (rows with
// capacity chi_max, columns with capacity 1), so successive most-profitable
// augmenting paths over the bipartite flow network reach the LP optimum at an
// integral point. Augmentation stops at zero gain, leaving zero-weight pairs
// unassigned. Fully deterministic: edges are relaxed in (row, column) order.
inline PhiMatrix solve_u2i(const AssignmentInstance& inst) {
  const std::size_t rows = inst.weights.rows(), cols = inst.weights.cols();
  if (inst.chi_max < 1 && rows > 0 && cols > 0)
    throw ContractError("chi_max must be >= 1");
  for (double w : inst.weights.data())
    if (!std::isfinite(w) || w < 0.0)
      throw ContractError("assignment weights must be finite and nonnegative");

  PhiMatrix phi(rows, cols, 0);
  if (rows == 0 || cols == 0) return phi;

  struct Edge {
    int from, to, cap;
    double cost;
  };
  const int source = 0;
  const int sink = static_cast<int>(rows + cols) + 1;
  const int n_nodes = sink + 1;
  std::vector<Edge> edges;
  edges.reserve(2 * (rows + rows * cols + cols));
  auto add_edge = [&edges](int u, int v, int cap, double cost) {
    edges.push_back({u, v, cap, cost});
    edges.push_back({v, u, 0, -cost});
  };
  for (std::size_t r = 0; r < rows; ++r)
    add_edge(source, 1 + static_cast<int>(r), inst.chi_max, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t k = 0; k < cols; ++k)
      add_edge(1 + static_cast<int>(r), 1 + static_cast<int>(rows + k), 1,
               -inst.weights(r, k));
  for (std::size_t k = 0; k < cols; ++k)
    add_edge(1 + static_cast<int>(rows + k), sink, 1, 0.0);

  const double inf = std::numeric_limits<double>::infinity();
  // Zero-gain residual cycles round to tiny negative values in floating
  // point; the slack keeps the relaxation from cycling on them.
  const double kGainSlack = 1e-12;
  while (true) {
    std::vector<double> dist(n_nodes, inf);
    std::vector<int> pre_edge(n_nodes, -1);
    dist[source] = 0.0;
    for (int pass = 0; pass < n_nodes - 1; ++pass) {
      bool changed = false;
      for (std::size_t e = 0; e < edges.size(); ++e) {
        const Edge& ed = edges[e];
        if (ed.cap <= 0 || dist[ed.from] == inf) continue;
        const double cand = dist[ed.from] + ed.cost;
        if (cand < dist[ed.to] - kGainSlack) {
          dist[ed.to] = cand;
          pre_edge[ed.to] = static_cast<int>(e);
          changed = true;
        }
      }
      if (!changed) break;
    }
    if (!(dist[sink] < -kGainSlack)) break;  // no profitable augmentation left
    int v = sink;
    int guard = n_nodes + 1;
    while (v != source) {
      if (pre_edge[v] < 0 || --guard < 0)
        throw ContractError("augmenting path reconstruction failed");
      Edge& ed = edges[pre_edge[v]];
      ed.cap -= 1;
      edges[pre_edge[v] ^ 1].cap += 1;
      v = ed.from;
    }
  }

  // Row->column edges start at index 2*rows, two entries per edge.
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t k = 0; k < cols; ++k) {
      const std::size_t e = 2 * rows + 2 * (r * cols + k);
      if (edges[e].cap == 0) phi(r, k) = 1;
    }
  return phi;
}

}  // namespace uav2x
