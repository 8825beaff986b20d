#pragma once

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "uav2x/csv.hpp"
#include "uav2x/engine.hpp"
#include "uav2x/parallel.hpp"

namespace uav2x {

enum class SweepVariable { n_u2i, u2u_ratio, horizon_T, v_max };

inline const char* sweep_variable_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::n_u2i: return "n_u2i";
    case SweepVariable::u2u_ratio: return "u2u_ratio";
    case SweepVariable::horizon_T: return "horizon_T";
    case SweepVariable::v_max: return "v_max";
  }
  return "?";
}

inline SweepVariable sweep_variable_from_name(const std::string& name) {
  if (name == "n_u2i") return SweepVariable::n_u2i;
  if (name == "u2u_ratio") return SweepVariable::u2u_ratio;
  if (name == "horizon_T") return SweepVariable::horizon_T;
  if (name == "v_max") return SweepVariable::v_max;
  throw ConfigError("unknown sweep variable: " + name);
}

struct ExperimentSpec {
  SweepVariable variable = SweepVariable::n_u2i;
  std::vector<double> values;
  int replicas = 1;
  SimConfig base;
  std::vector<Policy> policies = {Policy::isasoa, Policy::greedy};
  int threads = 0;  // replica parallelism; <= 1 means sequential

  void validate() const {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    if (replicas < 1) throw ConfigError("sweep replicas must be >= 1");
    if (policies.empty()) throw ConfigError("sweep needs at least one policy");
  }
};

// Base config with one sweep value applied. Forced-N_l categorization keeps
// the U2I count interpretable for the n_u2i axis.
inline SimConfig apply_sweep_value(const SimConfig& base, SweepVariable var, double value) {
  SimConfig cfg = base;
  switch (var) {
    case SweepVariable::n_u2i:
      cfg.scenario.n_uavs = cfg.algo.n_l_target + static_cast<int>(std::lround(value));
      break;
    case SweepVariable::u2u_ratio:
      cfg.algo.n_l_target =
          static_cast<int>(std::lround(value * static_cast<double>(cfg.scenario.n_uavs)));
      break;
    case SweepVariable::horizon_T:
      cfg.scenario.horizon_T = static_cast<int>(std::lround(value));
      break;
    case SweepVariable::v_max:
      cfg.scenario.v_max = value;
      break;
  }
  return cfg;
}

struct SweepRow {
  double value = 0.0;
  Policy policy = Policy::isasoa;
  int replicas_ok = 0;
  int replicas_failed = 0;
  double mean_uplink_sum_rate = 0.0;
  double stderr_uplink_sum_rate = 0.0;
  double mean_u2u_sum_rate = 0.0;
  double stderr_u2u_sum_rate = 0.0;
  double max_conservation_residual = 0.0;  // diagnostic across the replicas
};

// One row per (sweep value, policy): mean and standard error of the per-run
// slot-mean uplink and U2U sum-rates over seeded replicas. Replica seeds are
// base_seed + replica index, identical across points and policies so that
// comparisons pair up.
inline std::vector<SweepRow> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  struct Task {
    std::size_t point;
    std::size_t policy;
    int replica;
  };
  std::vector<Task> tasks;
  for (std::size_t p = 0; p < spec.values.size(); ++p)
    for (std::size_t q = 0; q < spec.policies.size(); ++q)
      for (int rep = 0; rep < spec.replicas; ++rep) tasks.push_back({p, q, rep});

  struct Outcome {
    bool ok = false;
    double uplink = 0.0;
    double u2u = 0.0;
    double residual = 0.0;
  };
  std::vector<Outcome> outcomes(tasks.size());
  parallel_for(tasks.size(), spec.threads, [&](std::size_t i) {
    const Task& task = tasks[i];
    SimConfig cfg = apply_sweep_value(spec.base, spec.variable, spec.values[task.point]);
    cfg.scenario.rng_seed = spec.base.scenario.rng_seed + static_cast<std::uint64_t>(task.replica);
    try {
      const RunResult run = run_simulation(cfg, spec.policies[task.policy]);
      outcomes[i] = {true, run.mean_uplink_sum_rate, run.mean_u2u_sum_rate,
                     run.max_conservation_residual};
    } catch (const InfeasibleError&) {
      outcomes[i] = {false, 0.0, 0.0, 0.0};
    } catch (const ConfigError&) {
      outcomes[i] = {false, 0.0, 0.0, 0.0};
    }
  });

  std::vector<SweepRow> rows;
  for (std::size_t p = 0; p < spec.values.size(); ++p) {
    for (std::size_t q = 0; q < spec.policies.size(); ++q) {
      SweepRow row;
      row.value = spec.values[p];
      row.policy = spec.policies[q];
      std::vector<double> uplinks, u2us;
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (tasks[i].point != p || tasks[i].policy != q) continue;
        if (!outcomes[i].ok) {
          ++row.replicas_failed;
          continue;
        }
        ++row.replicas_ok;
        uplinks.push_back(outcomes[i].uplink);
        u2us.push_back(outcomes[i].u2u);
        row.max_conservation_residual =
            std::max(row.max_conservation_residual, outcomes[i].residual);
      }
      auto mean_stderr = [](const std::vector<double>& xs) -> std::pair<double, double> {
        if (xs.empty()) return {0.0, 0.0};
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        if (xs.size() < 2) return {mean, 0.0};
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        var /= static_cast<double>(xs.size() - 1);
        return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
      };
      const auto [mu, su] = mean_stderr(uplinks);
      const auto [m2, s2] = mean_stderr(u2us);
      row.mean_uplink_sum_rate = mu;
      row.stderr_uplink_sum_rate = su;
      row.mean_u2u_sum_rate = m2;
      row.stderr_u2u_sum_rate = s2;
      rows.push_back(row);
    }
  }
  return rows;
}

inline void write_sweep_csv(std::ostream& os, SweepVariable var,
                            const std::vector<SweepRow>& rows) {
  os << "variable,value,policy,replicas_ok,replicas_failed,mean_uplink_sum_rate,"
        "stderr_uplink_sum_rate,mean_u2u_sum_rate,stderr_u2u_sum_rate\n";
  for (const SweepRow& r : rows) {
    os << sweep_variable_name(var) << ',' << fmt_g9(r.value) << ',' << policy_name(r.policy)
       << ',' << r.replicas_ok << ',' << r.replicas_failed << ','
       << fmt_g9(r.mean_uplink_sum_rate) << ',' << fmt_g9(r.stderr_uplink_sum_rate) << ','
       << fmt_g9(r.mean_u2u_sum_rate) << ',' << fmt_g9(r.stderr_u2u_sum_rate) << '\n';
  }
}

// Per-iteration objective trace of one run, one row per accepted iteration.
inline void write_trace_csv(std::ostream& os, const RunResult& run) {
  os << "slot,iteration,objective\n";
  for (const SlotLog& log : run.slots)
    for (std::size_t r = 0; r < log.trace.objectives.size(); ++r)
      os << log.slot << ',' << (r + 1) << ',' << fmt_g9(log.trace.objectives[r]) << '\n';
}

// Per-slot CSV of one simulation run.
inline void write_slots_csv(std::ostream& os, Policy policy, const RunResult& run) {
  os << "slot,policy,objective,iterations,total_uplink_bits,u2u_bits,violations\n";
  for (const SlotLog& log : run.slots) {
    os << log.slot << ',' << policy_name(policy) << ',' << fmt_g9(log.decision.objective)
       << ',' << log.decision.iterations << ',' << fmt_g9(log.uplink_bits) << ','
       << fmt_g9(log.u2u_bits) << ',';
    for (std::size_t i = 0; i < log.qos_violations.size(); ++i) {
      if (i) os << ';';
      os << log.qos_violations[i];
    }
    os << '\n';
  }
}

}  // namespace uav2x
