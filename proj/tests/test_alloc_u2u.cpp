#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "uav2x/alloc_u2u.hpp"
#include "uav2x/isasoa.hpp"
#include "uav2x/rng.hpp"

using namespace uav2x;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Synthetic instance in normalized units (noise = 1 W).
U2uInstance random_instance(Rng& rng, int n_links, int n_channels, int rows) {
  U2uInstance inst;
  inst.n_links = n_links;
  inst.n_channels = n_channels;
  inst.noise_w = 1.0;
  inst.phi = BinaryMatrix(rows, n_channels, 0);
  std::vector<int> row_load(rows, 0);
  for (int k = 0; k < n_channels; ++k) {
    if (rng.next_u64() % 5 == 0) continue;  // leave some channels unowned
    const int r = static_cast<int>(rng.next_u64() % rows);
    if (row_load[r] >= 2) continue;
    inst.phi(r, k) = 1;
    ++row_load[r];
  }
  inst.bs_signal.resize(rows);
  for (double& v : inst.bs_signal) v = rng.uniform(5.0, 50.0);
  inst.bs_leak.resize(n_links);
  for (double& v : inst.bs_leak) v = rng.uniform(0.5, 5.0);
  inst.rx_signal = Grid<double>(n_links, n_channels);
  for (double& v : inst.rx_signal.data()) v = rng.uniform(2.0, 40.0);
  inst.cross = Grid<double>(n_links, n_links, 0.0);
  for (int m = 0; m < n_links; ++m)
    for (int i = 0; i < n_links; ++i)
      if (m != i) inst.cross(m, i) = rng.uniform(0.05, 2.0);
  inst.fixed_interference = Grid<double>(n_links, n_channels);
  for (int i = 0; i < n_links; ++i)
    for (int k = 0; k < n_channels; ++k)
      inst.fixed_interference(i, k) = 1.0 + rng.uniform(0.0, 3.0);
  inst.chi_max = 1 + static_cast<int>(rng.next_u64() % 2);
  double worst_best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_links; ++i) {
    double best = 0.0;
    for (int k = 0; k < n_channels; ++k)
      best = std::max(best,
                      std::log2(1.0 + inst.rx_signal(i, k) / inst.fixed_interference(i, k)));
    worst_best = std::min(worst_best, best);
  }
  inst.r_min = 0.5 * worst_best;
  return inst;
}

}  // namespace

TEST_CASE("lfss examples") {
  SECTION("one strong link takes its best subchannel") {
    U2uInstance inst;
    inst.n_links = 1;
    inst.n_channels = 3;
    inst.noise_w = 1.0;
    inst.phi = BinaryMatrix(1, 3, 0);
    inst.bs_signal = {10.0};
    inst.bs_leak = {1.0};
    inst.rx_signal = Grid<double>(1, 3);
    inst.rx_signal(0, 0) = 3.0;
    inst.rx_signal(0, 1) = 1000.0;
    inst.rx_signal(0, 2) = 7.0;
    inst.cross = Grid<double>(1, 1, 0.0);
    inst.fixed_interference = Grid<double>(1, 3, 1.0);
    inst.chi_max = 2;
    inst.r_min = 5.0;
    const LfssResult res = lfss(inst);
    REQUIRE(res.feasible);
    CHECK(res.psi(0, 1) == 1);
    CHECK(res.psi(0, 0) + res.psi(0, 2) == 0);
  }

  SECTION("zero rate floor is immediately feasible") {
    Rng rng(5);
    U2uInstance inst = random_instance(rng, 3, 4, 3);
    inst.r_min = 0.0;
    const LfssResult res = lfss(inst);
    REQUIRE(res.feasible);
    int per_link[3] = {0, 0, 0};
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 4; ++k) per_link[i] += res.psi(i, k);
    CHECK(per_link[0] == 1);
    CHECK(per_link[1] == 1);
    CHECK(per_link[2] == 1);
  }

  SECTION("mutual interference pushes both links onto second subchannels") {
    U2uInstance inst;
    inst.n_links = 2;
    inst.n_channels = 3;
    inst.noise_w = 1.0;
    inst.phi = BinaryMatrix(1, 3, 0);
    inst.bs_signal = {10.0};
    inst.bs_leak = {1.0, 1.0};
    inst.rx_signal = Grid<double>(2, 3);
    inst.rx_signal(0, 0) = 31.0;  // channel 0 preferred by both
    inst.rx_signal(1, 0) = 31.0;
    inst.rx_signal(0, 1) = 15.0;  // distinct second choices
    inst.rx_signal(0, 2) = 14.0;
    inst.rx_signal(1, 1) = 14.0;
    inst.rx_signal(1, 2) = 15.0;
    inst.cross = Grid<double>(2, 2, 0.0);
    inst.cross(0, 1) = 30.0;
    inst.cross(1, 0) = 30.0;
    inst.fixed_interference = Grid<double>(2, 3, 1.0);
    inst.chi_max = 2;
    inst.r_min = 4.5;
    const LfssResult res = lfss(inst);
    REQUIRE(res.feasible);
    CHECK(res.psi(0, 0) == 1);
    CHECK(res.psi(1, 0) == 1);
    CHECK(res.psi(0, 1) == 1);
    CHECK(res.psi(1, 2) == 1);
    // direct recomputation of the achieved rates
    const std::vector<double> rates = u2u_link_rates(res.psi, inst);
    CHECK(rates[0] >= inst.r_min);
    CHECK(rates[1] >= inst.r_min);
  }

  SECTION("infeasibility is reported with the failing link") {
    U2uInstance inst;
    inst.n_links = 1;
    inst.n_channels = 2;
    inst.noise_w = 1.0;
    inst.phi = BinaryMatrix(1, 2, 0);
    inst.bs_signal = {10.0};
    inst.bs_leak = {1.0};
    inst.rx_signal = Grid<double>(1, 2, 1.0);
    inst.cross = Grid<double>(1, 1, 0.0);
    inst.fixed_interference = Grid<double>(1, 2, 1.0);
    inst.chi_max = 2;
    inst.r_min = 50.0;
    const LfssResult res = lfss(inst);
    REQUIRE_FALSE(res.feasible);
    CHECK(res.failed_link == 0);
    CHECK_FALSE(res.reason.empty());
  }
}

TEST_CASE("u2u objective") {
  Rng rng(11);
  const U2uInstance inst = random_instance(rng, 2, 3, 3);

  SECTION("all-zero psi gives the interference-free sum-rate") {
    const PsiMatrix psi(2, 3, 0);
    double expect = 0.0;
    for (int k = 0; k < 3; ++k)
      for (int r = 0; r < 3; ++r)
        if (inst.phi(r, k)) expect += std::log2(1.0 + inst.bs_signal[r]);
    CHECK_THAT(u2u_objective(psi, inst), WithinRel(expect, 1e-12));
  }

  SECTION("adding leakage on an owned channel strictly lowers the objective") {
    int owned_k = -1;
    for (int k = 0; k < 3 && owned_k < 0; ++k)
      for (int r = 0; r < 3; ++r)
        if (inst.phi(r, k)) owned_k = k;
    REQUIRE(owned_k >= 0);
    PsiMatrix psi(2, 3, 0);
    const double before = u2u_objective(psi, inst);
    psi(0, owned_k) = 1;
    CHECK(u2u_objective(psi, inst) < before);
  }

  SECTION("matches the straight-line oracle") {
    Rng r2(77);
    for (int trial = 0; trial < 10; ++trial) {
      PsiMatrix psi(2, 3, 0);
      for (auto& v : psi.data()) v = static_cast<std::uint8_t>(r2.next_u64() % 2);
      CHECK_THAT(u2u_objective(psi, inst),
                 WithinRel(oracles::u2u_objective(inst, oracles::psi_to_masks(psi)), 1e-12));
    }
  }
}

TEST_CASE("branch and bound examples") {
  SECTION("no links gives an empty matrix") {
    U2uInstance inst;
    inst.n_links = 0;
    inst.n_channels = 4;
    inst.noise_w = 1.0;
    inst.phi = BinaryMatrix(2, 4, 0);
    inst.phi(0, 0) = 1;
    inst.bs_signal = {3.0, 4.0};
    const PsiMatrix psi = branch_and_bound(inst, PsiMatrix(0, 4, 0));
    CHECK(psi.rows() == 0);
  }

  SECTION("single link, two channels equals the four-candidate search") {
    Rng rng(3);
    for (int trial = 0; trial < 25; ++trial) {
      const U2uInstance inst = random_instance(rng, 1, 2, 2);
      const LfssResult seed = lfss(inst);
      if (!seed.feasible) continue;
      const PsiMatrix psi = branch_and_bound(inst, seed.psi);
      const auto best = oracles::u2u_optimum(inst);
      REQUIRE(best.any_feasible);
      CHECK_THAT(u2u_objective(psi, inst), WithinRel(best.objective, 1e-9));
      CHECK(oracles::u2u_feasible(inst, oracles::psi_to_masks(psi)));
    }
  }

  SECTION("two links, three channels equals the exhaustive search") {
    Rng rng(1234);
    const U2uInstance inst = random_instance(rng, 2, 3, 3);
    const LfssResult seed = lfss(inst);
    REQUIRE(seed.feasible);
    const PsiMatrix psi = branch_and_bound(inst, seed.psi);
    const auto best = oracles::u2u_optimum(inst);
    CHECK_THAT(u2u_objective(psi, inst), WithinRel(best.objective, 1e-9));
  }

  SECTION("an infeasible seed is a contract error") {
    Rng rng(9);
    U2uInstance inst = random_instance(rng, 2, 2, 2);
    inst.r_min = 1e9;
    CHECK_THROWS_AS(branch_and_bound(inst, PsiMatrix(2, 2, 0)), ContractError);
  }
}

TEST_CASE("branch and bound exactness on random instances") {
  Rng rng(20240601);
  int solved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 3);
    const int k = 1 + static_cast<int>(rng.next_u64() % (12 / n));
    const U2uInstance inst = random_instance(rng, n, k, 1 + (trial % 3));
    const LfssResult seed = lfss(inst);
    if (!seed.feasible) continue;
    ++solved;
    const PsiMatrix psi = branch_and_bound(inst, seed.psi);
    const auto best = oracles::u2u_optimum(inst);
    REQUIRE(best.any_feasible);
    INFO("trial " << trial << " n=" << n << " k=" << k);
    CHECK_THAT(u2u_objective(psi, inst), WithinRel(best.objective, 1e-9));
    CHECK(is_psi_feasible(psi, inst));
    CHECK(oracles::u2u_feasible(inst, oracles::psi_to_masks(psi)));
  }
  CHECK(solved >= 40);
}

TEST_CASE("exactness on scenario-derived instances") {
  // real link budgets: powers around 1e-13..1e-9 W, infinite entries where a
  // relay transmits on the subchannel it listens on
  int solved = 0;
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    SimConfig cfg;
    cfg.scenario.n_uavs = 8;
    cfg.scenario.n_cus = 2;
    cfg.scenario.n_subchannels = 5;
    cfg.scenario.horizon_T = 40;
    cfg.scenario.rng_seed = seed;
    cfg.algo.n_l_target = 2;
    cfg.algo.r_min = 0.35;
    ScenarioState s = generate_scenario(cfg.scenario);
    s = categorize(std::move(s), cfg.channel, cfg.algo);
    const RateReport rr = assemble_rates(s, PhiMatrix(phi_row_count(s), 5, 0),
                                         PsiMatrix(2, 5, 0), cfg.channel);
    const PhiMatrix phi = solve_u2i({rr.bs_rate, cfg.algo.chi_max});
    const U2uInstance inst =
        build_u2u_instance(s, phi, cfg.channel, cfg.algo.r_min, cfg.algo.chi_max);
    const LfssResult seed_psi = lfss(inst);
    if (!seed_psi.feasible) continue;
    const PsiMatrix psi = branch_and_bound(inst, seed_psi.psi);
    const auto best = oracles::u2u_optimum(inst);
    REQUIRE(best.any_feasible);
    INFO("scenario seed " << seed);
    CHECK_THAT(u2u_objective(psi, inst), WithinRel(best.objective, 1e-9));
    CHECK(oracles::u2u_feasible(inst, oracles::psi_to_masks(psi)));
    ++solved;
  }
  CHECK(solved >= 2);
}

TEST_CASE("anytime contract") {
  Rng rng(55);
  const U2uInstance inst = random_instance(rng, 3, 4, 3);
  const LfssResult seed = lfss(inst);
  REQUIRE(seed.feasible);
  const double seed_objective = u2u_objective(seed.psi, inst);

  BnbOptions tight;
  tight.node_budget = 1;
  const PsiMatrix capped = branch_and_bound(inst, seed.psi, tight);
  CHECK(u2u_objective(capped, inst) >= seed_objective - 1e-12);
  CHECK(is_psi_feasible(capped, inst));

  const PsiMatrix full = branch_and_bound(inst, seed.psi);
  CHECK(u2u_objective(full, inst) >= u2u_objective(capped, inst) - 1e-12);
}

TEST_CASE("bound and fixation soundness from the search trace") {
  Rng rng(808);
  for (int trial = 0; trial < 8; ++trial) {
    const U2uInstance inst = random_instance(rng, 2, 4, 2);
    const LfssResult seed = lfss(inst);
    if (!seed.feasible) continue;

    std::ostringstream trace;
    BnbOptions opts;
    opts.trace = &trace;
    branch_and_bound(inst, seed.psi, opts);

    const int bits = inst.n_links * inst.n_channels;
    auto completions = [&](const std::string& state, int forced_var, int forced_value) {
      // enumerate all completions of a tri-state node string
      std::vector<std::vector<std::uint32_t>> out;
      std::vector<int> free_vars;
      std::vector<int> base(bits, 0);
      for (int v = 0; v < bits; ++v) {
        if (state[v] == 'u')
          free_vars.push_back(v);
        else
          base[v] = state[v] - '0';
      }
      for (std::uint64_t code = 0; code < (1ull << free_vars.size()); ++code) {
        std::vector<int> full = base;
        for (std::size_t j = 0; j < free_vars.size(); ++j)
          full[free_vars[j]] = static_cast<int>(code >> j & 1u);
        if (forced_var >= 0 && full[forced_var] != forced_value) continue;
        std::vector<std::uint32_t> masks(inst.n_links, 0);
        for (int v = 0; v < bits; ++v)
          if (full[v]) masks[v / inst.n_channels] |= 1u << (v % inst.n_channels);
        out.push_back(std::move(masks));
      }
      return out;
    };

    std::istringstream lines(trace.str());
    std::string line;
    int checked_bounds = 0, checked_fixes = 0;
    while (std::getline(lines, line)) {
      const auto j = nlohmann::json::parse(line);
      const std::string action = j.at("action");
      if (action == "enter" && checked_bounds < 12) {
        ++checked_bounds;
        const double fbar = j.at("fbar");
        for (const auto& masks : completions(j.at("state"), -1, -1))
          CHECK(oracles::u2u_objective(inst, masks) <= fbar + 1e-9);
      } else if (action == "fix" && checked_fixes < 12) {
        ++checked_fixes;
        const double flb = j.at("flb");
        const int var = j.at("var");
        const int value = j.at("value");
        // the pruned branch admits no feasible completion beating the incumbent
        for (const auto& masks : completions(j.at("state"), var, 1 - value)) {
          if (!oracles::u2u_feasible(inst, masks)) continue;
          CHECK(oracles::u2u_objective(inst, masks) <= flb + 1e-9);
        }
      }
    }
  }
}
