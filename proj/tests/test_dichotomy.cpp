#include <doctest.h>

#include <random>

#include "bdlab/dichotomy.hpp"
#include "bdlab/error.hpp"
#include "corpus.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace bdlab;
using testing::error_kind;
using testing::sparse_near_identity;

TEST_CASE("escape step count") {
  std::size_t floor_n = 0;
  CHECK(escape_steps(0.5, 2, &floor_n) == 32);
  CHECK(floor_n == 32);
  CHECK(escape_steps(1.5, 1, &floor_n) == 3);
  CHECK(floor_n == 2);
  CHECK(error_kind([] { escape_steps(0.0, 2); }) == ErrorKind::parameter);
}

TEST_CASE("greedy escape on the identity of l1^32 yields a disjoint family") {
  const auto r = greedy_escape(FiniteOperator::identity(32), 0.5, 2);
  REQUIRE_FALSE(r.found_bound());
  const auto& fam = r.family();
  CHECK(fam.delta == 0.25);
  REQUIRE(fam.pieces.size() == 2);
  for (const auto& p : fam.pieces) {
    CHECK(restrict_norm(AtomSpace::counting(32), p.f, p.support) == doctest::Approx(1));
    CHECK(p.support.size() == 1);
  }
  CHECK(r.trace.gains.size() == 32);
  for (double g : r.trace.gains) CHECK(g == doctest::Approx(1));
  for (const auto& d : r.trace.regions) CHECK(d.size() == 1);
  CHECK(r.trace.chain[0] == 31);
  CHECK(check_family(AtomSpace::counting(32), fam).ok);
}

TEST_CASE("greedy escape on small identities and zero returns a bound") {
  auto r = greedy_escape(FiniteOperator::identity(4), 0.5, 2);
  REQUIRE(r.found_bound());
  CHECK(r.bound().bound == L1Fun{1, 1, 1, 1});
  CHECK(r.bound().mass == doctest::Approx(4));
  CHECK(r.trace.gains.size() == 4);
  r = greedy_escape(FiniteOperator::zero(DomainShape::square(2), AtomSpace::uniform(3)), 0.3, 3);
  REQUIRE(r.found_bound());
  CHECK(r.bound().mass == 0.0);
  CHECK(r.trace.gains.empty());
  FiniteOperator big(DomainShape::single_block(1), AtomSpace::counting(1), {L1Fun{2}});
  CHECK(error_kind([&] { greedy_escape(big, 0.5, 1); }) == ErrorKind::contract);
}

TEST_CASE("greedy escape outcomes verify and the dichotomy is exclusive") {
  std::mt19937_64 rng(31);
  int families = 0;
  int bounds = 0;
  for (int trial = 0; trial < 16; ++trial) {
    const std::size_t n = 2;
    const double eps = trial % 2 ? 0.5 : 0.8;
    const std::size_t dim = 18 + static_cast<std::size_t>(trial) * 2;
    const auto op = sparse_near_identity(rng, dim, 0.1 + 0.02 * (trial % 5));
    const auto r = greedy_escape(op, eps, n);
    if (r.found_bound()) {
      ++bounds;
      CHECK(verify_lattice_bound(op, r.bound().bound.values).worst_excess <= eps + 1e-9);
      continue;
    }
    ++families;
    const auto& fam = r.family();
    CHECK(check_family(op.range(), fam).ok);
    CHECK(fam.pieces.size() == n);
    const auto cert = min_approx_lattice_bound(op, eps / 4);
    const auto conflict = conflict_bound(op.range(), fam, cert.bound.values, eps / 4);
    CHECK(conflict.precondition_held);
    CHECK(cert.mass >= conflict.certified - 1e-6);
    CHECK(conflict.certified >= n * eps / 4 - 1e-6);
  }
  CHECK(families > 0);
  CHECK(bounds > 0);
}

TEST_CASE("rosenthal selection examples") {
  {
    const std::size_t n = 20;
    std::vector<L1Fun> fs;
    std::vector<AtomSet> sets;
    for (std::size_t i = 0; i < n; ++i) {
      L1Fun f = L1Fun::zeros(n);
      f[i] = 1.0;
      fs.push_back(f);
      sets.push_back(AtomSet{i});
    }
    const auto r = rosenthal_select(AtomSpace::counting(n), fs, sets, 1.0, 2, 1);
    CHECK(r.selected.size() == 2);
    CHECK(r.cert.lower == doctest::Approx(1));
    CHECK(r.rounds == 1);
  }
  {
    const std::size_t n = 60;
    std::vector<L1Fun> fs;
    std::vector<AtomSet> sets;
    for (std::size_t i = 0; i < n; ++i) {
      L1Fun f = L1Fun::zeros(n);
      for (std::size_t j = 0; j < n; ++j) f[j] = i == j ? 0.5 : 0.5 / 59;
      fs.push_back(f);
      sets.push_back(AtomSet{i});
    }
    const auto r = rosenthal_select(AtomSpace::counting(n), fs, sets, 0.5, 3, 4);
    CHECK(r.selected.size() == 3);
    for (double s : r.row_sums) CHECK(s == doctest::Approx(1.0 / 59));
    CHECK(r.cert.lower >= 0.25);
  }
  {
    // Row 0 leaks half its mass onto everyone else's set.
    const std::size_t n = 40;
    std::vector<L1Fun> fs;
    std::vector<AtomSet> sets;
    for (std::size_t i = 0; i < n; ++i) {
      L1Fun f = L1Fun::zeros(n);
      f[i] = 0.5;
      if (i == 0) {
        for (std::size_t j = 1; j < n; ++j) f[j] = 0.5 / 39;
      }
      fs.push_back(f);
      sets.push_back(AtomSet{i});
    }
    const auto alpha = overlap_matrix(AtomSpace::counting(n), fs, sets);
    double row0 = 0.0;
    for (double v : alpha[0]) row0 += v;
    CHECK(row0 == doctest::Approx(0.5));
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const auto r = rosenthal_select(AtomSpace::counting(n), fs, sets, 0.5, 2, seed);
      CHECK(r.selected.front() != 0);
    }
  }
}

TEST_CASE("rosenthal selection preconditions") {
  std::vector<L1Fun> fs(20, L1Fun{1, 0});
  std::vector<AtomSet> sets(20, AtomSet{0});
  const auto space = AtomSpace::counting(2);
  CHECK(error_kind([&] { rosenthal_select(space, std::span(fs).first(5), std::span(sets).first(5), 1.0, 2, 0); }) ==
        ErrorKind::contract);
  CHECK(error_kind([&] { rosenthal_select(space, fs, sets, 1.0, 2, 0); }) == ErrorKind::contract);
}

TEST_CASE("rosenthal selection conclusion on random leaky families") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const double delta = trial % 2 ? 0.5 : 0.8;
    const std::size_t k = 2 + trial % 2;
    const std::size_t n = static_cast<std::size_t>(std::floor(10.0 / delta)) * k;
    const std::size_t atoms = 2 * n;
    const auto space = AtomSpace::uniform(atoms);
    std::vector<L1Fun> fs;
    std::vector<AtomSet> sets;
    std::uniform_int_distribution<std::size_t> other(0, atoms - 1);
    for (std::size_t i = 0; i < n; ++i) {
      L1Fun f = L1Fun::zeros(atoms);
      const double w = 1.0 / static_cast<double>(atoms);
      f[2 * i] = delta / w * ((rng() & 1) ? 1 : -1);
      // Leakage concentrated on a few random atoms, some of them other sets.
      const double leak = (1.0 - delta) / w / 3;
      for (int t = 0; t < 3; ++t) {
        std::size_t a = other(rng);
        if (a == 2 * i) a = 2 * i + 1;
        f[a] += leak;
      }
      fs.push_back(f);
      sets.push_back(AtomSet{2 * i});
    }
    const auto r = rosenthal_select(space, fs, sets, delta, k, static_cast<std::uint64_t>(trial));
    for (double s : r.row_sums) CHECK(s <= delta / 2 + 1e-9);
    std::vector<L1Fun> picked;
    for (std::size_t i : r.selected) picked.push_back(fs[i]);
    CHECK(l1_equivalence(space, picked).lower >= delta / 2 - 1e-7);
    if (k == 2) {
      std::vector<std::vector<double>> raw;
      for (const auto& f : picked) raw.push_back(f.values);
      std::vector<double> w(space.weights().begin(), space.weights().end());
      CHECK(oracle::grid_l1_sphere_min(w, raw, 1e-3) >= delta / 2 - 1e-7);
    }
  }
}

TEST_CASE("conflict bound") {
  const auto space = AtomSpace::counting(3);
  DisjointFamily fam{{{L1Fun{1, 0, 0}, AtomSet{0}}, {L1Fun{0, -1, 0}, AtomSet{1}}}, 1.0};
  auto c = conflict_bound(space, fam, std::vector<double>{1, 1, 0}, 0.0);
  CHECK(c.certified == doctest::Approx(2));
  CHECK(c.precondition_held);
  c = conflict_bound(space, fam, std::vector<double>{0, 0, 0}, 0.0);
  CHECK(c.certified == 0.0);
  CHECK_FALSE(c.precondition_held);
  DisjointFamily half{{{L1Fun{0.5, 0, 0}, AtomSet{0}}, {L1Fun{0, 0.5, 0}, AtomSet{1}}}, 0.5};
  c = conflict_bound(space, half, std::vector<double>{0.4, 0.4, 0}, 0.1);
  CHECK(c.closed_form == doctest::Approx(0.8));
  CHECK(c.precondition_held);
  CHECK(c.certified >= c.closed_form - 1e-12);
  CHECK(error_kind([&] { conflict_bound(space, fam, std::vector<double>{1, 1}, 0.0); }) == ErrorKind::dimension);
}
