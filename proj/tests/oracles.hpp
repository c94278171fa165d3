#pragma once

// Brute-force reference computations used only by the tests.  None of these
// share code paths with the library routines they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

/// Solves the square system A x = b by Gaussian elimination with partial
/// pivoting; nullopt when singular.
inline std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    }
    if (std::abs(a[p][c]) < 1e-12) return std::nullopt;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

/// min c.x s.t. G x <= h by enumerating every vertex (n active rows).
/// Returns +inf when no feasible vertex exists.
inline double vertex_enumeration_min(const std::vector<double>& c, const std::vector<std::vector<double>>& g,
                                     const std::vector<double>& h) {
  const std::size_t n = c.size();
  const std::size_t m = g.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> pick(n);
  for (std::size_t i = 0; i < n; ++i) pick[i] = i;
  if (m < n) return best;
  for (;;) {
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    for (std::size_t i : pick) {
      a.push_back(g[i]);
      b.push_back(h[i]);
    }
    if (auto x = solve_square(a, b)) {
      bool ok = true;
      for (std::size_t r = 0; r < m && ok; ++r) {
        double v = 0.0;
        for (std::size_t j = 0; j < n; ++j) v += g[r][j] * (*x)[j];
        ok = v <= h[r] + 1e-9;
      }
      if (ok) {
        double obj = 0.0;
        for (std::size_t j = 0; j < n; ++j) obj += c[j] * (*x)[j];
        best = std::min(best, obj);
      }
    }
    std::size_t i = n;
    while (i > 0 && pick[i - 1] == m - n + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < n; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

/// min over a dense grid of the l1 sphere (k <= 3) of ||sum a_i f_i||_w.
inline double grid_l1_sphere_min(const std::vector<double>& weights, const std::vector<std::vector<double>>& fs,
                                 double step) {
  const std::size_t k = fs.size();
  const std::size_t atoms = weights.size();
  auto norm = [&](const std::vector<double>& a) {
    double s = 0.0;
    for (std::size_t w = 0; w < atoms; ++w) {
      double v = 0.0;
      for (std::size_t i = 0; i < k; ++i) v += a[i] * fs[i][w];
      s += weights[w] * std::abs(v);
    }
    return s;
  };
  double best = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(std::lround(1.0 / step));
  if (k == 1) return norm({1.0});
  if (k == 2) {
    for (int i = -n; i <= n; ++i) {
      const double a = i * step;
      const double b = 1.0 - std::abs(a);
      best = std::min({best, norm({a, b}), norm({a, -b})});
    }
    return best;
  }
  for (int i = -n; i <= n; ++i) {
    const double a = i * step;
    const int rest = n - std::abs(i);
    for (int j = -rest; j <= rest; ++j) {
      const double b = j * step;
      const double c = std::max(0.0, 1.0 - std::abs(a) - std::abs(b));
      best = std::min({best, norm({a, b, c}), norm({a, b, -c})});
    }
  }
  return best;
}

/// E|sum a_i r_i| over all 2^m sign patterns, by direct summation.
inline double rademacher_mean_abs(const std::vector<double>& a) {
  const std::size_t m = a.size();
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += ((mask >> i) & 1) ? a[i] : -a[i];
    total += std::abs(s);
  }
  return total / static_cast<double>(std::uint64_t{1} << m);
}

inline std::uint64_t binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  std::uint64_t r = 1;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace oracle
