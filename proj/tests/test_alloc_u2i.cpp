#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "uav2x/alloc_u2i.hpp"
#include "uav2x/rng.hpp"

using namespace uav2x;
using Catch::Matchers::WithinRel;

namespace {

Grid<double> make_weights(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = rows.begin()->size();
  Grid<double> w(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    std::size_t j = 0;
    for (double v : row) w(i, j++) = v;
    ++i;
  }
  return w;
}

AssignmentInstance random_instance(Rng& rng) {
  const int rows = 1 + static_cast<int>(rng.next_u64() % 8);
  const int max_cols = std::max(1, 16 / rows);
  const int cols = 1 + static_cast<int>(rng.next_u64() % max_cols);
  AssignmentInstance inst;
  inst.weights = Grid<double>(rows, cols);
  for (auto& w : inst.weights.data()) {
    w = rng.uniform(0.0, 10.0);
    if (rng.next_u64() % 5 == 0) w = 0.0;  // sprinkle exact zeros
  }
  inst.chi_max = 1 + static_cast<int>(rng.next_u64() % 3);
  return inst;
}

}  // namespace

TEST_CASE("solve_u2i examples") {
  SECTION("single link, single channel") {
    const AssignmentInstance inst{make_weights({{3.0}}), 1};
    const PhiMatrix phi = solve_u2i(inst);
    CHECK(phi(0, 0) == 1);
    CHECK(verify_phi(phi, inst) == 3.0);
  }
  SECTION("two links, two channels, cap one") {
    const AssignmentInstance inst{make_weights({{3.0, 1.0}, {2.0, 2.0}}), 1};
    const PhiMatrix phi = solve_u2i(inst);
    CHECK_THAT(verify_phi(phi, inst), WithinRel(5.0, 1e-12));
    CHECK(phi(0, 0) == 1);
    CHECK(phi(1, 1) == 1);
  }
  SECTION("one link takes both channels under cap two") {
    const AssignmentInstance inst{make_weights({{3.0, 1.0}}), 2};
    const PhiMatrix phi = solve_u2i(inst);
    CHECK_THAT(verify_phi(phi, inst), WithinRel(4.0, 1e-12));
  }
  SECTION("empty instance gives an empty matrix") {
    const AssignmentInstance inst{Grid<double>(0, 0), 1};
    const PhiMatrix phi = solve_u2i(inst);
    CHECK(phi.rows() == 0);
  }
  SECTION("zero-weight pairs stay unassigned") {
    const AssignmentInstance inst{make_weights({{0.0, 0.0}, {0.0, 1.0}}), 2};
    const PhiMatrix phi = solve_u2i(inst);
    CHECK(phi(0, 0) == 0);
    CHECK(phi(0, 1) == 0);
    CHECK(phi(1, 0) == 0);
    CHECK(phi(1, 1) == 1);
  }
}

TEST_CASE("verify_phi rejects infeasible matrices") {
  const AssignmentInstance inst{make_weights({{1.0, 2.0}, {3.0, 4.0}}), 1};

  PhiMatrix all_zero(2, 2, 0);
  CHECK(verify_phi(all_zero, inst) == 0.0);

  PhiMatrix column_clash(2, 2, 0);
  column_clash(0, 0) = 1;
  column_clash(1, 0) = 1;
  CHECK_THROWS_WITH(verify_phi(column_clash, inst),
                    Catch::Matchers::ContainsSubstring("more than one"));

  PhiMatrix row_overflow(2, 2, 0);
  row_overflow(0, 0) = 1;
  row_overflow(0, 1) = 1;
  CHECK_THROWS_WITH(verify_phi(row_overflow, inst),
                    Catch::Matchers::ContainsSubstring("cap"));

  PhiMatrix bad_shape(1, 2, 0);
  CHECK_THROWS_AS(verify_phi(bad_shape, inst), ContractError);

  const PhiMatrix solved = solve_u2i(inst);
  CHECK(verify_phi(solved, inst) == 5.0);  // row0->ch1 + row1->ch0
}

TEST_CASE("solve_u2i equals exhaustive enumeration on random instances") {
  Rng rng(2024);
  for (int trial = 0; trial < 120; ++trial) {
    const AssignmentInstance inst = random_instance(rng);
    const PhiMatrix phi = solve_u2i(inst);
    const double got = verify_phi(phi, inst);
    const double want = oracles::assignment_optimum(inst.weights, inst.chi_max);
    INFO("trial " << trial << ": " << inst.weights.rows() << "x" << inst.weights.cols()
                  << " chi=" << inst.chi_max);
    CHECK_THAT(got, WithinRel(want, 1e-9) || Catch::Matchers::WithinAbs(want, 1e-12));
  }
}

TEST_CASE("solve_u2i monotonicity") {
  Rng rng(7);
  const AssignmentInstance base = random_instance(rng);
  const double before = verify_phi(solve_u2i(base), base);

  SECTION("an all-zero row changes nothing") {
    AssignmentInstance grown = base;
    Grid<double> w(base.weights.rows() + 1, base.weights.cols(), 0.0);
    for (std::size_t r = 0; r < base.weights.rows(); ++r)
      for (std::size_t k = 0; k < base.weights.cols(); ++k) w(r, k) = base.weights(r, k);
    grown.weights = w;
    CHECK_THAT(verify_phi(solve_u2i(grown), grown), WithinRel(before, 1e-12));
  }
  SECTION("raising one weight never lowers the optimum") {
    for (int trial = 0; trial < 20; ++trial) {
      AssignmentInstance bumped = base;
      const std::size_t r = rng.next_u64() % base.weights.rows();
      const std::size_t k = rng.next_u64() % base.weights.cols();
      bumped.weights(r, k) += rng.uniform(0.0, 5.0);
      CHECK(verify_phi(solve_u2i(bumped), bumped) >= before - 1e-12);
    }
  }
}

TEST_CASE("solve_u2i permutation equivariance") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const AssignmentInstance inst = random_instance(rng);
    const std::size_t rows = inst.weights.rows(), cols = inst.weights.cols();
    std::vector<std::size_t> rp(rows), cp(cols);
    for (std::size_t i = 0; i < rows; ++i) rp[i] = i;
    for (std::size_t i = 0; i < cols; ++i) cp[i] = i;
    for (std::size_t i = rows; i > 1; --i) std::swap(rp[i - 1], rp[rng.next_u64() % i]);
    for (std::size_t i = cols; i > 1; --i) std::swap(cp[i - 1], cp[rng.next_u64() % i]);

    AssignmentInstance perm = inst;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t k = 0; k < cols; ++k) perm.weights(rp[r], cp[k]) = inst.weights(r, k);
    const double a = verify_phi(solve_u2i(inst), inst);
    const double b = verify_phi(solve_u2i(perm), perm);
    CHECK_THAT(a, WithinRel(b, 1e-9) || Catch::Matchers::WithinAbs(b, 1e-12));
  }
}
