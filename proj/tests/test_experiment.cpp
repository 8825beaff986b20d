#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "uav2x/experiment.hpp"

using namespace uav2x;
using Catch::Matchers::WithinRel;

namespace {

SimConfig base_config() {
  SimConfig cfg;
  cfg.scenario.n_uavs = 6;
  cfg.scenario.n_cus = 2;
  cfg.scenario.n_subchannels = 4;
  cfg.scenario.horizon_T = 35;
  cfg.algo.n_l_target = 2;
  cfg.algo.r_min = 0.5;
  return cfg;
}

}  // namespace

TEST_CASE("sweep value application") {
  const SimConfig base = base_config();
  CHECK(apply_sweep_value(base, SweepVariable::n_u2i, 7).scenario.n_uavs == 9);
  CHECK(apply_sweep_value(base, SweepVariable::u2u_ratio, 0.5).algo.n_l_target == 3);
  CHECK(apply_sweep_value(base, SweepVariable::horizon_T, 50).scenario.horizon_T == 50);
  CHECK(apply_sweep_value(base, SweepVariable::v_max, 25.0).scenario.v_max == 25.0);
  CHECK(sweep_variable_from_name("horizon_T") == SweepVariable::horizon_T);
  CHECK_THROWS_AS(sweep_variable_from_name("bogus"), ConfigError);
}

TEST_CASE("one point, one replica gives a single row per policy") {
  ExperimentSpec spec;
  spec.variable = SweepVariable::horizon_T;
  spec.values = {35};
  spec.replicas = 1;
  spec.base = base_config();
  spec.policies = {Policy::isasoa};
  const auto rows = run_experiment(spec);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].replicas_ok == 1);
  CHECK(rows[0].replicas_failed == 0);
  CHECK(rows[0].stderr_uplink_sum_rate == 0.0);
  const RunResult direct = run_simulation(spec.base, Policy::isasoa);
  CHECK_THAT(rows[0].mean_uplink_sum_rate, WithinRel(direct.mean_uplink_sum_rate, 1e-12));
}

TEST_CASE("aggregation equals the average of individual runs") {
  ExperimentSpec spec;
  spec.variable = SweepVariable::horizon_T;
  spec.values = {35};
  spec.replicas = 2;
  spec.base = base_config();
  spec.policies = {Policy::greedy};
  const auto rows = run_experiment(spec);
  REQUIRE(rows.size() == 1);

  SimConfig c1 = spec.base;
  c1.scenario.rng_seed = spec.base.scenario.rng_seed;
  SimConfig c2 = spec.base;
  c2.scenario.rng_seed = spec.base.scenario.rng_seed + 1;
  const double mean = (run_simulation(c1, Policy::greedy).mean_uplink_sum_rate +
                       run_simulation(c2, Policy::greedy).mean_uplink_sum_rate) /
                      2.0;
  CHECK_THAT(rows[0].mean_uplink_sum_rate, WithinRel(mean, 1e-12));
}

TEST_CASE("threading does not change the rows") {
  ExperimentSpec spec;
  spec.variable = SweepVariable::n_u2i;
  spec.values = {3, 4};
  spec.replicas = 3;
  spec.base = base_config();
  spec.policies = {Policy::isasoa, Policy::greedy};
  spec.threads = 0;
  const auto sequential = run_experiment(spec);
  spec.threads = 4;
  const auto threaded = run_experiment(spec);
  REQUIRE(sequential.size() == threaded.size());
  for (std::size_t i = 0; i < sequential.size(); ++i) {
    CHECK(sequential[i].mean_uplink_sum_rate == threaded[i].mean_uplink_sum_rate);
    CHECK(sequential[i].mean_u2u_sum_rate == threaded[i].mean_u2u_sum_rate);
    CHECK(sequential[i].replicas_ok == threaded[i].replicas_ok);
  }
}

TEST_CASE("csv output shape") {
  ExperimentSpec spec;
  spec.variable = SweepVariable::u2u_ratio;
  spec.values = {0.2};
  spec.replicas = 1;
  spec.base = base_config();
  spec.policies = {Policy::isasoa};
  const auto rows = run_experiment(spec);

  std::ostringstream os;
  write_sweep_csv(os, spec.variable, rows);
  std::istringstream is(os.str());
  std::string header, line;
  REQUIRE(std::getline(is, header));
  CHECK(header ==
        "variable,value,policy,replicas_ok,replicas_failed,mean_uplink_sum_rate,"
        "stderr_uplink_sum_rate,mean_u2u_sum_rate,stderr_u2u_sum_rate");
  REQUIRE(std::getline(is, line));
  CHECK(line.rfind("u2u_ratio,0.2,isasoa,1,0,", 0) == 0);

  const RunResult run = run_simulation(spec.base, Policy::isasoa);
  std::ostringstream slots;
  write_slots_csv(slots, Policy::isasoa, run);
  std::istringstream sis(slots.str());
  REQUIRE(std::getline(sis, header));
  CHECK(header == "slot,policy,objective,iterations,total_uplink_bits,u2u_bits,violations");
  int count = 0;
  while (std::getline(sis, line)) ++count;
  CHECK(count == spec.base.scenario.horizon_T);
}

TEST_CASE("mean sum-rate grows with the U2I fleet for both policies") {
  ExperimentSpec spec;
  spec.variable = SweepVariable::n_u2i;
  spec.values = {3, 7, 11};
  spec.replicas = 12;
  spec.base = base_config();
  spec.policies = {Policy::isasoa, Policy::greedy};
  spec.threads = 2;
  const auto rows = run_experiment(spec);
  REQUIRE(rows.size() == 6);
  // rows come out point-major, policy-minor
  for (std::size_t q = 0; q < 2; ++q) {
    const double a = rows[0 + q].mean_uplink_sum_rate;
    const double b = rows[2 + q].mean_uplink_sum_rate;
    const double c = rows[4 + q].mean_uplink_sum_rate;
    INFO("policy " << policy_name(rows[q].policy));
    CHECK(a < b);
    CHECK(b < c);
  }
}

TEST_CASE("failed replicas are counted, not fatal") {
  ExperimentSpec spec;
  spec.variable = SweepVariable::v_max;
  // v_max 2 cannot complete a 300 m trajectory in 35 slots
  spec.values = {2.0};
  spec.replicas = 2;
  spec.base = base_config();
  spec.policies = {Policy::isasoa};
  const auto rows = run_experiment(spec);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].replicas_ok == 0);
  CHECK(rows[0].replicas_failed == 2);
}
