#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "bdlab/error.hpp"
#include "bdlab/operator.hpp"
#include "helpers.hpp"

using namespace bdlab;
using testing::error_kind;

namespace {

FiniteOperator random_operator(std::mt19937_64& rng, std::vector<std::size_t> blocks, std::size_t atoms) {
  DomainShape shape(std::move(blocks));
  std::vector<L1Fun> cols;
  for (std::size_t c = 0; c < shape.dimension(); ++c) cols.emplace_back(testing::uniform_vector(rng, atoms, -1, 1));
  return FiniteOperator(shape, AtomSpace::uniform(atoms), std::move(cols));
}

// Independent reference: iterate sign vectors and coordinate choices with
// nested odometers, summing columns directly.
double brute_norm(const FiniteOperator& op) {
  const auto& d = op.domain();
  const std::size_t a = d.num_blocks();
  std::vector<std::size_t> coord(a, 0);
  double best = 0.0;
  for (;;) {
    for (std::uint64_t signs = 0; signs < (std::uint64_t{1} << a); ++signs) {
      double norm = 0.0;
      for (std::size_t w = 0; w < op.num_atoms(); ++w) {
        double v = 0.0;
        for (std::size_t i = 0; i < a; ++i) {
          const double s = ((signs >> i) & 1) ? -1.0 : 1.0;
          v += s * op.column(i, coord[i])[w];
        }
        norm += op.range().weight(w) * std::abs(v);
      }
      best = std::max(best, norm);
    }
    std::size_t i = 0;
    while (i < a && ++coord[i] == d.block_size(i)) coord[i++] = 0;
    if (i == a) break;
  }
  return best;
}

}  // namespace

TEST_CASE("domain shapes") {
  CHECK(error_kind([] { DomainShape(std::vector<std::size_t>{}); }) == ErrorKind::contract);
  CHECK(error_kind([] { DomainShape({2, 0}); }) == ErrorKind::contract);
  DomainShape d({2, 3});
  CHECK(d.dimension() == 5);
  CHECK(d.column(1, 2) == 4);
  CHECK(d.norm(std::vector<double>{1, -1, 0.5, 0.5, 0.5}) == doctest::Approx(2));
  CHECK(d.extreme_point_count() == 24);
  CHECK(d.sign_free_count() == 6);
}

TEST_CASE("apply") {
  const auto id = FiniteOperator::identity(2);
  CHECK(apply(id, std::vector<double>{1, 0}) == L1Fun{1, 0});
  ExtremePoint p{{{1, -1}}};
  CHECK(apply(id, p) == L1Fun{0, -1});
  FiniteOperator two(DomainShape::linf(2), AtomSpace::counting(2), {L1Fun{1, 1}, L1Fun{1, -1}});
  CHECK(apply(two, std::vector<double>{1, 1}) == L1Fun{2, 0});
  CHECK(error_kind([&] { apply(two, std::vector<double>{1}); }) == ErrorKind::dimension);
  CHECK(error_kind([] {
          FiniteOperator(DomainShape::linf(2), AtomSpace::counting(2), {L1Fun{1, 1}});
        }) == ErrorKind::dimension);
}

TEST_CASE("extreme point enumeration") {
  CHECK(extreme_points(DomainShape({1})).size() == 2);
  CHECK(extreme_points(DomainShape({2})).size() == 4);
  const auto pts = extreme_points(DomainShape({1, 1, 1}));
  CHECK(pts.size() == 8);
  std::set<std::vector<double>> distinct;
  for (const auto& p : extreme_points(DomainShape({2, 1, 3}))) distinct.insert(p.coefficients(DomainShape({2, 1, 3})));
  CHECK(distinct.size() == 4 * 2 * 6);
  // Lexicographic: first point is +e_{0,0} in every block; block 0 varies slowest.
  CHECK(pts.front().choices[0] == BlockChoice{0, 1});
  CHECK(pts[1].choices[2] == BlockChoice{0, -1});
  CHECK(pts[4].choices[0] == BlockChoice{0, -1});
  CHECK(error_kind([] { extreme_points(DomainShape::square(8), 1 << 10); }) == ErrorKind::scale);
}

TEST_CASE("operator norm examples") {
  CHECK(operator_norm(FiniteOperator::identity(5)).value == doctest::Approx(1));
  FiniteOperator t1(DomainShape::linf(2), AtomSpace::uniform(1), {L1Fun{0.5}, L1Fun{-0.5}});
  CHECK(operator_norm(t1).value == doctest::Approx(1));
  FiniteOperator single(DomainShape::single_block(3), AtomSpace::uniform(3),
                        {L1Fun{0, 0, 0}, L1Fun{0.3, -0.6, 0.9}, L1Fun{0, 0, 0}});
  CHECK(operator_norm(single).value == doctest::Approx(0.6));
  CHECK(error_kind([&] { operator_norm(single, {.mode = NormMode::symmetric}); }) == ErrorKind::contract);
  CHECK(error_kind([] { operator_norm(FiniteOperator::zero(DomainShape::square(8), AtomSpace::uniform(2))); }) ==
        ErrorKind::scale);
}

TEST_CASE("exact norm matches brute force; search never exceeds exact") {
  std::mt19937_64 rng(5);
  int equal = 0;
  for (int trial = 0; trial < 120; ++trial) {
    std::vector<std::size_t> blocks(1 + trial % 4);
    for (auto& b : blocks) b = 1 + rng() % 3;
    auto op = random_operator(rng, blocks, 2 + trial % 5);
    REQUIRE(op.domain().extreme_point_count() <= 1024);
    const auto exact = operator_norm(op);
    CHECK(exact.value == doctest::Approx(brute_norm(op)).epsilon(1e-12));
    CHECK(weighted_norm(op.range(), apply(op, exact.witness), Norm::l1) == doctest::Approx(exact.value));
    CHECK(exact.value <= triangle_bound(op) + kTolerance);
    const auto search = operator_norm(op, {.mode = NormMode::search, .seed = static_cast<std::uint64_t>(trial)});
    CHECK(search.lower_bound);
    CHECK(search.value <= exact.value + kTolerance);
    if (std::abs(search.value - exact.value) <= kTolerance) ++equal;
  }
  CHECK(equal == 120);
}

TEST_CASE("symmetric mode on sign-symmetric columns") {
  // Columns whose atoms come in mirrored pairs: the joint law of the entries
  // is invariant under flipping any one column, so signs can be dropped.
  std::mt19937_64 rng(9);
  const std::size_t m = 3;
  DomainShape shape({2, 2, 2});
  const std::size_t atoms = std::size_t{1} << m;
  std::vector<L1Fun> cols;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      const double v = 0.2 + 0.1 * static_cast<double>(rng() % 7);
      L1Fun f = L1Fun::zeros(atoms);
      for (std::size_t w = 0; w < atoms; ++w) f[w] = ((w >> i) & 1) ? -v * (1 + j) : v * (1 + j);
      cols.push_back(f);
    }
  }
  FiniteOperator op(shape, AtomSpace::uniform(atoms), cols, true);
  CHECK(operator_norm(op, {.mode = NormMode::symmetric}).value == doctest::Approx(operator_norm(op).value).epsilon(1e-12));
}

TEST_CASE("results independent of worker count") {
  std::mt19937_64 rng(21);
  auto op = random_operator(rng, {3, 3, 3, 3, 3}, 6);
  setenv("BDLAB_THREADS", "1", 1);
  const auto one = operator_norm(op);
  setenv("BDLAB_THREADS", "4", 1);
  const auto four = operator_norm(op);
  unsetenv("BDLAB_THREADS");
  CHECK(one.value == four.value);
  CHECK(one.witness == four.witness);
}
