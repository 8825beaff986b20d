// Command-line front end: single runs, figure-style sweeps, and single
// solver instances from JSON fixtures.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uav2x/experiment.hpp"
#include "uav2x/json_io.hpp"

namespace {

using namespace uav2x;

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

Policy parse_policy(const std::string& name) {
  if (name == "isasoa") return Policy::isasoa;
  if (name == "greedy") return Policy::greedy;
  throw ConfigError("unknown policy: " + name + " (expected isasoa or greedy)");
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file: " + path.string());
  out << content;
}

int cmd_simulate(const std::string& config_path, std::uint64_t seed, bool seed_set,
                 const std::string& policy_name_str, const std::string& out_dir,
                 std::uint64_t bnb_budget, bool budget_set, bool debug_trace) {
  SimConfig cfg = load_sim_config(config_path);
  if (seed_set) cfg.scenario.rng_seed = seed;
  if (budget_set) cfg.algo.bnb_node_budget = bnb_budget;
  if (cfg.scenario.h_max_below_bs())
    std::cerr << "warning: h_max <= bs_height, every elevation angle clamps to zero\n";
  const Policy policy = parse_policy(policy_name_str);

  const RunResult run = run_simulation(cfg, policy);

  std::filesystem::create_directories(out_dir);
  std::ostringstream csv;
  write_slots_csv(csv, policy, run);
  write_file(std::filesystem::path(out_dir) / "simulate.csv", csv.str());
  write_file(std::filesystem::path(out_dir) / "simulate.json",
             run_summary_json(cfg, policy, run).dump(2) + "\n");
  if (debug_trace) {
    std::ostringstream trace;
    write_trace_csv(trace, run);
    write_file(std::filesystem::path(out_dir) / "trace.csv", trace.str());
  }
  std::cout << "mean_uplink_sum_rate " << fmt_g9(run.mean_uplink_sum_rate) << "\n"
            << "total_uplink_bits " << fmt_g9(run.total_uplink_bits) << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, std::uint64_t seed, bool seed_set,
              const std::string& variable, const std::string& values_csv, int replicas,
              const std::string& policies_csv, const std::string& out_dir) {
  SimConfig cfg = load_sim_config(config_path);
  if (seed_set) cfg.scenario.rng_seed = seed;

  ExperimentSpec spec;
  spec.variable = sweep_variable_from_name(variable);
  spec.values = parse_values(values_csv);
  spec.replicas = replicas;
  spec.base = cfg;
  spec.policies.clear();
  std::stringstream ss(policies_csv);
  std::string item;
  while (std::getline(ss, item, ',')) spec.policies.push_back(parse_policy(item));
  spec.threads = threads_from_env();

  const std::vector<SweepRow> rows = run_experiment(spec);

  std::filesystem::create_directories(out_dir);
  std::ostringstream csv;
  write_sweep_csv(csv, spec.variable, rows);
  write_file(std::filesystem::path(out_dir) / "sweep.csv", csv.str());
  std::cout << "rows " << rows.size() << "\n";
  return 0;
}

int cmd_solve_u2i(const std::string& fixture_path) {
  std::ifstream in(fixture_path);
  if (!in) throw ConfigError("cannot open fixture: " + fixture_path);
  nlohmann::json j;
  in >> j;
  const AssignmentInstance inst = assignment_instance_from_json(j);
  const PhiMatrix phi = solve_u2i(inst);
  const double objective = verify_phi(phi, inst);
  std::cout << "objective " << fmt_g9(objective) << "\n";
  for (std::size_t r = 0; r < phi.rows(); ++r)
    for (std::size_t k = 0; k < phi.cols(); ++k)
      if (phi(r, k)) std::cout << "assign " << r << " " << k << "\n";
  return 0;
}

int cmd_solve_u2u(const std::string& fixture_path, std::uint64_t budget, bool trace) {
  std::ifstream in(fixture_path);
  if (!in) throw ConfigError("cannot open fixture: " + fixture_path);
  nlohmann::json j;
  in >> j;
  const U2uInstance inst = u2u_instance_from_json(j);
  const LfssResult seed = lfss(inst);
  if (!seed.feasible) {
    std::cout << "infeasible link " << seed.failed_link << " (" << seed.reason << ")\n";
    return 2;
  }
  BnbOptions opts;
  opts.node_budget = budget;
  if (trace) opts.trace = &std::cerr;
  const PsiMatrix psi = branch_and_bound(inst, seed.psi, opts);
  std::cout << "objective " << fmt_g9(u2u_objective(psi, inst)) << "\n";
  for (int i = 0; i < inst.n_links; ++i)
    for (int k = 0; k < inst.n_channels; ++k)
      if (psi(i, k)) std::cout << "assign " << i << " " << k << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-cell UAV-to-X simulator: sense-and-send protocol, subchannel "
               "allocation, and UAV speed optimization"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  std::uint64_t seed = 0;
  std::uint64_t bnb_budget = 1000000;
  std::string policy = "isasoa";

  bool debug_trace = false;
  auto* sim = app.add_subcommand("simulate", "Run one seeded simulation");
  sim->add_option("--config", config_path, "JSON config file")->required();
  auto* sim_seed = sim->add_option("--seed", seed, "Scenario RNG seed override");
  sim->add_option("--policy", policy, "isasoa or greedy");
  sim->add_option("--out", out_dir, "Output directory");
  auto* sim_budget = sim->add_option("--bnb-budget", bnb_budget, "Branch-and-bound node budget");
  sim->add_flag("--debug-trace", debug_trace,
                "Also write trace.csv with per-iteration objectives");

  std::string variable = "n_u2i", values_csv = "5,10,15";
  int replicas = 1;
  std::string policies_csv = "isasoa,greedy";
  auto* sweep = app.add_subcommand("sweep", "Run a figure-style experiment sweep");
  sweep->add_option("--config", config_path, "JSON config file")->required();
  sweep->add_option("--variable", variable, "n_u2i, u2u_ratio, horizon_T or v_max");
  sweep->add_option("--values", values_csv, "Comma-separated sweep values")->required();
  sweep->add_option("--replicas", replicas, "Seeded replicas per sweep point");
  sweep->add_option("--policies", policies_csv, "Comma-separated policies to run");
  auto* sweep_seed = sweep->add_option("--seed", seed, "Base RNG seed override");
  sweep->add_option("--out", out_dir, "Output directory");

  std::string fixture_path;
  auto* su2i = app.add_subcommand("solve-u2i", "Solve one U2I/CU assignment fixture");
  su2i->add_option("fixture", fixture_path, "JSON instance fixture")->required();

  auto* su2u = app.add_subcommand("solve-u2u", "Solve one U2U allocation fixture");
  su2u->add_option("fixture", fixture_path, "JSON instance fixture")->required();
  su2u->add_option("--bnb-budget", bnb_budget, "Branch-and-bound node budget");
  su2u->add_flag("--debug-trace", debug_trace, "Emit the search trace as JSON lines on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(config_path, seed, !sim_seed->empty(), policy, out_dir, bnb_budget,
                          !sim_budget->empty(), debug_trace);
    if (sweep->parsed())
      return cmd_sweep(config_path, seed, !sweep_seed->empty(), variable, values_csv, replicas,
                       policies_csv, out_dir);
    if (su2i->parsed()) return cmd_solve_u2i(fixture_path);
    if (su2u->parsed()) return cmd_solve_u2u(fixture_path, bnb_budget, debug_trace);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
