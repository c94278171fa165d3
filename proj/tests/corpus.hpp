#pragma once

#include <random>
#include <vector>

#include "bdlab/l1_geometry.hpp"
#include "bdlab/measure.hpp"
#include "bdlab/operator.hpp"

// Seeded operator and function families shared by the unit and acceptance tests.
namespace testing {

// Near-identity on l1^n: column i mostly on atom i, with small leakage,
// rescaled to norm one.
inline bdlab::FiniteOperator sparse_near_identity(std::mt19937_64& rng, std::size_t n, double leak) {
  using namespace bdlab;
  std::vector<L1Fun> cols;
  std::uniform_int_distribution<std::size_t> atom(0, n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    L1Fun f = L1Fun::zeros(n);
    f[i] = 1.0 - leak;
    f[atom(rng)] += leak / 2;
    f[atom(rng)] -= leak / 2;
    cols.push_back(f);
  }
  FiniteOperator op(DomainShape::single_block(n), AtomSpace::counting(n), cols);
  const double norm = operator_norm(op).value;
  for (auto& c : cols) {
    for (auto& v : c.values) v /= norm;
  }
  return FiniteOperator(op.domain(), op.range(), cols);
}

// k perturbed normalised block indicators on 4k uniform atoms.
inline std::vector<bdlab::L1Fun> noisy_blocks(std::mt19937_64& rng, std::size_t k, double noise) {
  using namespace bdlab;
  const std::size_t atoms = 4 * k;
  std::uniform_real_distribution<double> u(-noise, noise);
  std::vector<L1Fun> hs;
  for (std::size_t j = 0; j < k; ++j) {
    L1Fun h = L1Fun::zeros(atoms);
    for (std::size_t a = 0; a < atoms; ++a) h[a] = (a / 4 == j ? 1.0 : 0.0) + u(rng);
    const double norm = weighted_norm(AtomSpace::uniform(atoms), h, Norm::l1);
    for (auto& v : h.values) v /= norm;
    hs.push_back(h);
  }
  return hs;
}

// n functions with one heavy atom each (sign random) and the remaining
// mass spread over three random atoms; sets[i] = {2i} on 2n uniform atoms.
struct LeakyFamily {
  bdlab::AtomSpace space;
  std::vector<bdlab::L1Fun> fs;
  std::vector<bdlab::AtomSet> sets;
};

inline LeakyFamily leaky_family(std::mt19937_64& rng, std::size_t n, double delta) {
  using namespace bdlab;
  const std::size_t atoms = 2 * n;
  LeakyFamily out{AtomSpace::uniform(atoms), {}, {}};
  std::uniform_int_distribution<std::size_t> other(0, atoms - 1);
  const double w = 1.0 / static_cast<double>(atoms);
  for (std::size_t i = 0; i < n; ++i) {
    L1Fun f = L1Fun::zeros(atoms);
    f[2 * i] = delta / w * ((rng() & 1) ? 1 : -1);
    const double leak = (1.0 - delta) / w / 3;
    for (int t = 0; t < 3; ++t) {
      std::size_t a = other(rng);
      if (a == 2 * i) a = 2 * i + 1;
      f[a] += leak;
    }
    out.fs.push_back(f);
    out.sets.push_back(AtomSet{2 * i});
  }
  return out;
}

}  // namespace testing
