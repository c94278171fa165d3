#include <doctest.h>

#include <cmath>
#include <random>

#include "bdlab/error.hpp"
#include "bdlab/lp.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace bdlab;
using testing::error_kind;

TEST_CASE("simple programs") {
  {
    lp::Problem p;
    const auto x = p.add_variable(1.0, -lp::kInfinity, lp::kInfinity);
    p.add_row({{x, 1.0}}, lp::Sense::greater_equal, 3.0);
    const auto s = lp::solve(p);
    REQUIRE(s.status == lp::Status::optimal);
    CHECK(s.x[x] == doctest::Approx(3));
    CHECK(s.objective == doctest::Approx(3));
  }
  {
    lp::Problem p;
    const auto x = p.add_variable(0.0);
    p.add_row({{x, 1.0}}, lp::Sense::less_equal, -1.0);
    CHECK(lp::solve(p).status == lp::Status::infeasible);
  }
  {
    lp::Problem p(2);
    p.set_cost(0, -1);
    p.set_cost(1, -1);
    p.add_dense_row({1, 1}, lp::Sense::less_equal, 1);
    const auto s = lp::solve(p);
    REQUIRE(s.status == lp::Status::optimal);
    CHECK(s.objective == doctest::Approx(-1));
  }
  {
    lp::Problem p(1);
    p.set_cost(0, -1);
    CHECK(lp::solve(p).status == lp::Status::unbounded);
  }
  {
    lp::Problem p(2);
    p.set_cost(0, 1);
    p.set_cost(1, 2);
    p.add_dense_row({1, 1}, lp::Sense::equal, 4);
    p.add_dense_row({1, -1}, lp::Sense::less_equal, 1);
    const auto s = lp::solve(p);
    REQUIRE(s.status == lp::Status::optimal);
    CHECK(s.objective == doctest::Approx(5.5));
  }
}

TEST_CASE("malformed input") {
  CHECK(error_kind([] {
          lp::Problem p(1);
          p.set_cost(0, std::nan(""));
          lp::solve(p);
        }) == ErrorKind::malformed_problem);
  CHECK(error_kind([] {
          lp::Problem p(1);
          p.add_dense_row({lp::kInfinity}, lp::Sense::less_equal, 1);
          lp::solve(p);
        }) == ErrorKind::malformed_problem);
  CHECK(error_kind([] {
          lp::Problem p(1);
          p.set_bounds(0, 2, 1);
          lp::solve(p);
        }) == ErrorKind::malformed_problem);
}

namespace {

struct RandomLp {
  lp::Problem problem;
  std::vector<double> cost;
  std::vector<std::vector<double>> g;  // G x <= h, bounds included
  std::vector<double> h;
};

RandomLp random_lp(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  RandomLp r{lp::Problem(n), {}, {}, {}};
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    r.cost.push_back(u(rng));
    r.problem.set_cost(j, r.cost.back());
    r.problem.set_bounds(j, -2.0, 3.0);
    std::vector<double> lo(n, 0.0);
    lo[j] = -1.0;
    r.g.push_back(lo);
    r.h.push_back(2.0);
    std::vector<double> up(n, 0.0);
    up[j] = 1.0;
    r.g.push_back(up);
    r.h.push_back(3.0);
  }
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> row(n);
    for (auto& v : row) v = u(rng);
    const double rhs = u(rng) + 0.5;
    const int kind = static_cast<int>(rng() % 3);
    if (kind == 0) {
      r.problem.add_dense_row(row, lp::Sense::less_equal, rhs);
      r.g.push_back(row);
      r.h.push_back(rhs);
    } else {
      // >= rows are stored negated for the oracle.
      r.problem.add_dense_row(row, lp::Sense::greater_equal, -rhs);
      for (auto& v : row) v = -v;
      r.g.push_back(row);
      r.h.push_back(rhs);
    }
  }
  return r;
}

}  // namespace

TEST_CASE("random programs agree with vertex enumeration") {
  std::mt19937_64 rng(11);
  int optimal = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 2 + trial % 3;
    const std::size_t m = 1 + trial % 5;
    auto r = random_lp(rng, n, m);
    const double oracle = oracle::vertex_enumeration_min(r.cost, r.g, r.h);
    const auto s = lp::solve(r.problem);
    if (std::isinf(oracle)) {
      CHECK(s.status == lp::Status::infeasible);
      continue;
    }
    REQUIRE(s.status == lp::Status::optimal);
    ++optimal;
    CHECK(s.objective == doctest::Approx(oracle).epsilon(1e-7));
    CHECK(r.problem.max_violation(s.x) <= 1e-7);
    CHECK(std::abs(r.problem.objective_at(s.x) - s.objective) <= 1e-7);

    // Dual certificate: y from the final basis, reduced costs c - A^T y
    // priced at the bounds give the dual objective.
    const auto& rows = r.problem.rows();
    std::vector<double> reduced(r.cost);
    double dual_obj = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      dual_obj += s.duals[i] * rows[i].rhs;
      for (const auto& t : rows[i].terms) reduced[t.var] -= s.duals[i] * t.coeff;
      if (rows[i].sense == lp::Sense::less_equal) CHECK(s.duals[i] <= 1e-9);
      if (rows[i].sense == lp::Sense::greater_equal) CHECK(s.duals[i] >= -1e-9);
    }
    for (std::size_t j = 0; j < n; ++j) {
      dual_obj += reduced[j] >= 0 ? reduced[j] * r.problem.lower(j) : reduced[j] * r.problem.upper(j);
    }
    CHECK(std::abs(dual_obj - s.objective) <= 1e-6);
  }
  CHECK(optimal > 50);
}

TEST_CASE("degenerate program terminates") {
  // Many redundant rows through the same vertex.
  lp::Problem p(3);
  p.set_cost(0, -1);
  p.set_cost(1, -1);
  p.set_cost(2, -1);
  for (int i = 1; i <= 30; ++i) {
    p.add_dense_row({1.0 * i, 1.0, 1.0}, lp::Sense::less_equal, 1.0 * i);
    p.add_dense_row({1.0, 1.0 * i, 1.0}, lp::Sense::less_equal, 1.0 * i);
  }
  const auto s = lp::solve(p);
  REQUIRE(s.status == lp::Status::optimal);
  CHECK(p.max_violation(s.x) <= 1e-7);
}

TEST_CASE("determinism") {
  std::mt19937_64 rng(3);
  auto r = random_lp(rng, 4, 6);
  const auto a = lp::solve(r.problem);
  const auto b = lp::solve(r.problem);
  CHECK(a.status == b.status);
  CHECK(a.x == b.x);
  CHECK(a.objective == b.objective);
}
