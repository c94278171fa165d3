#include <doctest.h>

#include <cmath>
#include <random>

#include "bdlab/error.hpp"
#include "bdlab/factorization.hpp"
#include "bdlab/random_ops.hpp"
#include "corpus.hpp"
#include "helpers.hpp"

using namespace bdlab;
using testing::error_kind;
using testing::noisy_blocks;

namespace {

Coefficients unit(std::size_t n, std::size_t i) {
  Coefficients c(n, 0.0);
  c[i] = 1.0;
  return c;
}

}  // namespace

TEST_CASE("james improvement returns an isometric tuple at level zero") {
  const auto id = FiniteOperator::identity(4);
  std::vector<Coefficients> ys{unit(4, 0), unit(4, 1), unit(4, 2), unit(4, 3)};
  const auto r = james_improve(id, ys, 2, 2, 1.0);
  CHECK(r.level == 0);
  CHECK(r.tuple == 0);
  CHECK(r.cert.ratio() == doctest::Approx(1));
}

TEST_CASE("james improvement climbs one level") {
  // Two pairs of nearly parallel vectors with pairwise ratio 1.3 on
  // disjoint atom triples.
  const double s = 10.0 / 3.0;
  std::vector<Coefficients> ys{
      {1 / (1 + s), s / (1 + s), 0, 0, 0, 0},
      {1 / (1 + s), 0, s / (1 + s), 0, 0, 0},
      {0, 0, 0, 1 / (1 + s), s / (1 + s), 0},
      {0, 0, 0, 1 / (1 + s), 0, s / (1 + s)},
  };
  const auto id = FiniteOperator::identity(6);
  std::vector<L1Fun> pair{L1Fun(ys[0]), L1Fun(ys[1])};
  CHECK(l1_equivalence(AtomSpace::counting(6), pair).ratio() == doctest::Approx(1.3));
  const auto r = james_improve(id, ys, 2, 2, 1.5);
  CHECK(r.level == 1);
  CHECK(r.level_ratios[0][0] == doctest::Approx(1.3));
  CHECK(r.cert.ratio() <= r.threshold);
  std::vector<L1Fun> images;
  for (const auto& z : r.blocks) {
    CHECK(id.domain().norm(z) <= 1.0 + 1e-12);
    images.emplace_back(z);
  }
  CHECK(l1_equivalence(AtomSpace::counting(6), images).ratio() == doctest::Approx(r.cert.ratio()));
}

TEST_CASE("james improvement errors") {
  const auto id = FiniteOperator::identity(2);
  std::vector<Coefficients> ys{unit(2, 0), unit(2, 1)};
  CHECK(james_improve(id, ys, 2, 1, 2.0).cert.ratio() == doctest::Approx(1));
  FiniteOperator stretched(DomainShape::single_block(2), AtomSpace::counting(2), {L1Fun{2, 0}, L1Fun{0, 1}});
  CHECK(error_kind([&] { james_improve(stretched, ys, 2, 1, 2.0); }) == ErrorKind::internal_invariant);
  CHECK(error_kind([&] { james_improve(id, ys, 2, 2, 1.0); }) == ErrorKind::parameter);
  std::vector<Coefficients> parallel{unit(2, 0), unit(2, 0)};
  CHECK(error_kind([&] { james_improve(id, parallel, 2, 1, 1.0); }) == ErrorKind::contract);
}

TEST_CASE("minimal projections") {
  auto p = min_projection(AtomSpace::counting(1), std::vector<L1Fun>{{1}});
  CHECK(p.norm == doctest::Approx(1));
  p = min_projection(AtomSpace::counting(3), std::vector<L1Fun>{{1, 0, 0}, {0, 1, 0}});
  CHECK(p.norm == doctest::Approx(1));
  CHECK(p.biorthogonality_residual <= 1e-9);
  p = min_projection(AtomSpace::uniform(6), std::vector<L1Fun>{{2, 1, 0, 0, 0, 0}, {0, 0, 1, 1, 1, 0}});
  CHECK(p.norm == doctest::Approx(1));
  CHECK(error_kind([] { min_projection(AtomSpace::counting(2), std::vector<L1Fun>{{1, 1}, {2, 2}}); }) ==
        ErrorKind::rank);
  // A 2-dimensional subspace of l1^3 with no contractive projection.
  p = min_projection(AtomSpace::counting(3), std::vector<L1Fun>{{1, 0, 1}, {0, 1, 1}});
  CHECK(p.norm >= 1.0);
  CHECK(p.norm == doctest::Approx(4.0 / 3.0).epsilon(1e-7));
}

TEST_CASE("projection bound on distorted block systems") {
  std::mt19937_64 rng(101);
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t k = 2 + trial % 2;
    const auto hs = noisy_blocks(rng, k, 0.05 + 0.25 * (trial % 5) / 4.0);
    const auto space = AtomSpace::uniform(4 * k);
    const double lambda = l1_equivalence(space, hs).ratio();
    if (!(lambda * lambda < 2.0)) continue;
    ++checked;
    const auto p = min_projection(space, hs);
    CHECK(p.norm >= 1.0 - 1e-9);
    CHECK(p.norm <= dor_bound(lambda) + 1e-6);

    FiniteOperator op(DomainShape::single_block(k), space, hs);
    std::vector<Coefficients> ys;
    for (std::size_t j = 0; j < k; ++j) ys.push_back(unit(k, j));
    const auto blocks = james_improve(op, ys, k, 1, 1.0);
    const auto f = build_l1_factorization(op, blocks.blocks, lambda, 1.0);
    CHECK(f.residual <= 1e-6);
    CHECK(f.product() <= f.product_bound + 1e-6);
    CHECK(f.a_norm == doctest::Approx(1));
  }
  CHECK(checked >= 15);
}

TEST_CASE("factorization examples") {
  const auto id = FiniteOperator::identity(3);
  auto f = build_l1_factorization(id, std::vector<Coefficients>{unit(3, 0), unit(3, 2)}, 1.0, 2.0);
  CHECK(f.product() == doctest::Approx(1));
  CHECK(f.residual == doctest::Approx(0).epsilon(1e-12));
  FiniteOperator single(DomainShape::single_block(1), AtomSpace::uniform(2), {L1Fun{1, -1}});
  f = build_l1_factorization(single, std::vector<Coefficients>{{1.0}}, 1.0, 2.0);
  CHECK(f.product() == doctest::Approx(1));
  CHECK(error_kind([&] { build_l1_factorization(id, std::vector<Coefficients>{unit(3, 0)}, 1.5, 1.0); }) ==
        ErrorKind::precondition);
  FiniteOperator skew(DomainShape::single_block(2), AtomSpace::counting(2), {L1Fun{1, 1}, L1Fun{1, -1}});
  CHECK(error_kind([&] { build_l1_factorization(skew, std::vector<Coefficients>{unit(2, 0), unit(2, 1)}, 1.2, 1.0); }) ==
        ErrorKind::precondition);
}

TEST_CASE("pi2 estimates: examples") {
  FiniteOperator row(DomainShape({3}), AtomSpace::uniform(2), {L1Fun{1, -1}, L1Fun{2, -2}, L1Fun{0, 0}}, true);
  CHECK(pi2_upper_sym(row) == doctest::Approx(2));
  CHECK(pi2_upper_sym(FiniteOperator::zero(DomainShape::square(2), AtomSpace::uniform(2)), {.assume_symmetric = true}) == 0.0);
  SymmetricRandomMatrixSpec spec{2, {SymmetricDistribution::rademacher()}};
  const auto signs = build_symmetric_matrix(spec);
  CHECK(pi2_upper_sym(signs) == doctest::Approx(std::sqrt(2.0)));
  CHECK(error_kind([] { pi2_upper_sym(FiniteOperator::identity(2), {.assume_symmetric = true}); }) == ErrorKind::contract);
  CHECK(error_kind([&] { pi2_upper_sym(FiniteOperator(row.domain(), row.range(), row.columns())); }) ==
        ErrorKind::contract);

  CHECK(pi2_groth(FiniteOperator::identity(1)).value == doctest::Approx(1.782));
  CHECK(pi2_groth(FiniteOperator::zero(DomainShape::square(2), AtomSpace::uniform(2))).value == 0.0);
  CHECK(pi2_groth(row, {.mode = NormMode::search}).lower_bound_based);

  const auto norm = operator_norm(signs);
  const auto x = norm.witness.coefficients(signs.domain());
  const auto ratio = pi2_ratio(signs, Family{x});
  CHECK(ratio.value == doctest::Approx(norm.value));
  CHECK(pi2_lower(FiniteOperator::zero(DomainShape::square(2), AtomSpace::uniform(2)), std::vector<Family>{{x}}).value == 0.0);
  CHECK(error_kind([&] { pi2_lower(signs, std::vector<Family>{}); }) == ErrorKind::arity);
}

TEST_CASE("pi2 sandwich on symmetric random matrices") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t m = 2 + trial % 2;
    std::vector<SymmetricDistribution> laws;
    std::uniform_real_distribution<double> mag(0.05, 1.0);
    for (std::size_t e = 0; e < m * m; ++e) laws.push_back(SymmetricDistribution::rademacher(mag(rng) / m));
    const auto op = build_symmetric_matrix({m, laws});
    const double upper = std::min(pi2_upper_sym(op), pi2_groth(op).value);
    const auto lower = pi2_lower_search(op, {.family_size = 3, .iterations = 200, .restarts = 3,
                                             .seed = static_cast<std::uint64_t>(trial)});
    CHECK(lower.value <= upper + 1e-6);
    CHECK(lower.value >= operator_norm(op).value - 1e-9);
  }
}
