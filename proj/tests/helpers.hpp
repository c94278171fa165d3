#pragma once

#include <optional>
#include <random>
#include <vector>

#include "bdlab/error.hpp"
#include "bdlab/measure.hpp"

namespace testing {

/// Kind of the bdlab::Error thrown by f, or nullopt if it returned normally.
template <class F>
std::optional<bdlab::ErrorKind> error_kind(F&& f) {
  try {
    f();
  } catch (const bdlab::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

inline std::vector<double> uniform_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline bdlab::AtomSpace random_probability(std::mt19937_64& rng, std::size_t n) {
  auto w = uniform_vector(rng, n, 0.1, 1.0);
  double s = 0.0;
  for (double x : w) s += x;
  for (auto& x : w) x /= s;
  // Renormalise the last weight so the sum is 1 to within rounding.
  double head = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) head += w[i];
  w.back() = 1.0 - head;
  return bdlab::AtomSpace::probability(std::move(w));
}

}  // namespace testing
