#include "bdlab/counterexample.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <string>

#include "bdlab/error.hpp"
#include "bdlab/lp.hpp"
#include "bdlab/parallel.hpp"
#include "bdlab/random_ops.hpp"

namespace bdlab::counterexample {

namespace {

std::uint64_t binom(std::size_t n, std::size_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  std::uint64_t v = 1;
  for (std::size_t i = 1; i <= r; ++i) v = v * (n - r + i) / i;
  return v;
}

void require_even(std::size_t m) {
  if (m == 0 || m % 2 != 0) throw Error(ErrorKind::contract, "m must be a positive even integer");
}

Subset full_mask(std::size_t m) { return m >= 32 ? ~Subset{0} : static_cast<Subset>((std::uint64_t{1} << m) - 1); }

// Bits whose element i has eps_i = +1, i.e. even i, i.e. odd bit positions.
Subset plus_mask(std::size_t m) { return full_mask(m) & 0xAAAAAAAAu; }
Subset minus_mask(std::size_t m) { return full_mask(m) & 0x55555555u; }

int signed_sum(std::size_t m, Subset alpha) {
  const Subset in = alpha & full_mask(m);
  const Subset out = ~alpha & full_mask(m);
  return (std::popcount(in & plus_mask(m)) - std::popcount(in & minus_mask(m))) -
         (std::popcount(out & plus_mask(m)) - std::popcount(out & minus_mask(m)));
}

double khintchine_threshold() { return 1.0 / (4.0 * kKhintchine); }

}  // namespace

RademacherOperator::RademacherOperator(std::size_t m) : m_(m) {
  if (m == 0) throw Error(ErrorKind::parameter, "m must be at least 1");
  if (m > kMaxImplicitM) throw Error(ErrorKind::scale, "rademacher operator is limited to m <= 24");
  scale_ = 1.0 / (std::sqrt(static_cast<double>(m)) * std::ldexp(1.0, static_cast<int>(m)));
}

double RademacherOperator::entry(std::size_t i, Subset alpha) const {
  if (i >= m_) throw Error(ErrorKind::index_range, "row index outside 0..m-1");
  if ((alpha & ~full_mask(m_)) != 0) throw Error(ErrorKind::index_range, "subset outside {1..m}");
  return ((alpha >> i) & 1u) != 0 ? scale_ : -scale_;
}

double RademacherOperator::exact_norm() const {
  double total = 0.0;
  for (std::size_t k = 0; k <= m_; ++k) {
    total += static_cast<double>(binom(m_, k)) * std::abs(2.0 * static_cast<double>(k) - static_cast<double>(m_));
  }
  return total / std::ldexp(1.0, static_cast<int>(m_)) / std::sqrt(static_cast<double>(m_));
}

FiniteOperator RademacherOperator::materialize() const {
  if (m_ > kMaxMaterializeM) throw Error(ErrorKind::scale, "materialization is limited to m <= 16");
  std::vector<L1Fun> columns;
  columns.reserve(num_subsets());
  for (Subset alpha = 0; alpha < num_subsets(); ++alpha) {
    L1Fun col = L1Fun::zeros(m_);
    for (std::size_t i = 0; i < m_; ++i) col[i] = entry(i, alpha);
    columns.push_back(std::move(col));
  }
  return FiniteOperator(DomainShape::linf(num_subsets()), AtomSpace::counting(m_), std::move(columns));
}

RademacherOperator build_rademacher_T(std::size_t m) { return RademacherOperator(m); }

ALatticeReport check_A_lattice(std::size_t m, double eps, std::size_t samples, std::uint64_t seed) {
  if (m == 0) throw Error(ErrorKind::parameter, "m must be at least 1");
  if (!(eps > 0.0 && eps <= 1.0)) throw Error(ErrorKind::parameter, "eps must lie in (0, 1]");
  const double c = 1.0 / eps;
  const double root = std::sqrt(static_cast<double>(m));
  ALatticeReport report;
  report.eps = eps;

  auto evaluate = [&](std::vector<double> x) {
    double norm = 0.0;
    for (double v : x) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) return;
    for (auto& v : x) v /= norm;
    double value = 0.0;
    for (double v : x) {
      const double coord = std::abs(v) / root;
      if (coord > c / static_cast<double>(m)) value += coord;
    }
    ++report.tested;
    if (value > report.max_restricted) {
      report.max_restricted = value;
      report.worst_x = std::move(x);
    }
  };

  for (std::size_t t = 1; t <= m; ++t) evaluate(std::vector<double>(t, 1.0));
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> spike(m, 0.0);
    spike[i] = 1.0;
    evaluate(spike);
  }
  for (double ratio : {0.3, 0.5, 0.7, 0.9, 0.97}) {
    std::vector<double> decay(m);
    double v = 1.0;
    for (auto& d : decay) {
      d = v;
      v *= ratio;
    }
    evaluate(decay);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (std::size_t s = 0; s < samples; ++s) {
    std::vector<double> x(m);
    for (auto& v : x) v = normal(rng);
    evaluate(x);
  }
  report.holds = report.max_restricted <= eps + 1e-9;
  return report;
}

std::int64_t d_coefficient(std::size_t m, std::size_t k) {
  require_even(m);
  if (m > kMaxFormulaM) throw Error(ErrorKind::scale, "d(m,k) is computed exactly for m <= 60");
  if (k == 0 || k > m) throw Error(ErrorKind::parameter, "k must lie in 1..m");
  const std::size_t h = m / 2 - 1;
  if (k % 2 == 1) {
    const auto b = binom(h, (k - 1) / 2);
    return static_cast<std::int64_t>(b * b);
  }
  return static_cast<std::int64_t>(binom(h, k / 2 - 1) * binom(h, k / 2));
}

int x_value(std::size_t m, std::size_t k0, Subset alpha) {
  const auto size = static_cast<std::size_t>(std::popcount(alpha & full_mask(m)));
  if (size < k0 || size + k0 > m) return 0;
  const int s = signed_sum(m, alpha);
  return (s > 0) - (s < 0);
}

std::int64_t d_coefficient_bruteforce(std::size_t m, std::size_t k, std::size_t j) {
  require_even(m);
  if (m > kMaxBruteForceM) throw Error(ErrorKind::scale, "brute-force d(m,k) is limited to m <= 20");
  if (k == 0 || k > m) throw Error(ErrorKind::parameter, "k must lie in 1..m");
  if (j == 0 || j > m) throw Error(ErrorKind::index_range, "j must lie in 1..m");
  const Subset bit = Subset{1} << (j - 1);
  std::int64_t total = 0;
  // Gosper's hack over all k-subsets.
  Subset alpha = static_cast<Subset>((std::uint64_t{1} << k) - 1);
  const std::uint64_t limit = std::uint64_t{1} << m;
  while (alpha < limit) {
    if ((alpha & bit) != 0) total += x_value(m, 0, alpha);
    const Subset low = alpha & (~alpha + 1);
    const std::uint64_t ripple = std::uint64_t{alpha} + low;
    if (ripple >= limit) break;
    alpha = static_cast<Subset>(ripple | (((alpha ^ ripple) >> 2) / low));
  }
  return j % 2 == 0 ? total : -total;
}

BinomReport binom_checks(std::size_t m_max, std::size_t k_max) {
  if (m_max > 40) throw Error(ErrorKind::scale, "size lemma check is limited to m <= 40");
  if (k_max == 0 || k_max > 1'000'000) throw Error(ErrorKind::scale, "k_max must lie in 1..10^6");
  BinomReport report;
  for (std::size_t m = 2; m <= m_max; m += 2) {
    for (std::size_t k = 1; k <= m; ++k) {
      // d 2^k <= 2 C(m-1,k-1) C(k, floor(k/2)) in exact integers.
      using u128 = unsigned __int128;
      const u128 lhs = static_cast<u128>(d_coefficient(m, k)) << k;
      const u128 rhs = u128{2} * binom(m - 1, k - 1) * binom(k, k / 2);
      ++report.pairs_checked;
      if (lhs > rhs) report.size_lemma_holds = false;
      report.worst_size_ratio =
          std::max(report.worst_size_ratio, static_cast<double>(static_cast<long double>(lhs) / static_cast<long double>(rhs)));
    }
  }
  // b_k = C(k, floor(k/2)) / 2^k by recurrence; ratio_k = b_k sqrt(k).
  report.ratios.reserve(k_max);
  long double b = 0.5L;
  long double previous_even = 0.0L;
  for (std::size_t k = 1; k <= k_max; ++k) {
    if (k > 1) {
      if (k % 2 == 1) b = b * static_cast<long double>(k) / static_cast<long double>(k + 1);
    }
    const long double ratio = b * std::sqrt(static_cast<long double>(k));
    report.ratios.push_back(static_cast<double>(ratio));
    report.u_estimate = std::max(report.u_estimate, static_cast<double>(ratio));
    if (k % 2 == 0) {
      if (!(ratio > previous_even)) report.even_trend_increasing = false;
      previous_even = ratio;
    }
  }
  return report;
}

double universal_u() {
  static const double u = [] {
    long double b = 0.5L;
    long double best = 0.0L;
    for (std::size_t k = 1; k <= kUEstimateRange; ++k) {
      if (k > 1 && k % 2 == 1) b = b * static_cast<long double>(k) / static_cast<long double>(k + 1);
      best = std::max(best, b * std::sqrt(static_cast<long double>(k)));
    }
    return static_cast<double>(best) + kUMargin;
  }();
  return u;
}

TxLower tx_lower(std::size_t m, std::size_t k0) {
  require_even(m);
  if (m > kMaxStreamM) throw Error(ErrorKind::scale, "tx_lower is limited to m <= 22");
  const RademacherOperator op(m);
  const std::uint64_t total = op.num_subsets();
  const Subset full = full_mask(m);

  struct Partial {
    std::vector<std::int64_t> inside;
    std::int64_t sum = 0;
    std::int64_t pairing = 0;
    std::vector<std::int64_t> levels;
  };
  const std::size_t chunks = plan_chunks(total, 1u << 14);
  std::vector<Partial> partials(chunks);
  run_chunks(total, chunks, [&](std::size_t c, std::uint64_t begin, std::uint64_t end) {
    Partial p{std::vector<std::int64_t>(m, 0), 0, 0, std::vector<std::int64_t>(m + 1, 0)};
    for (std::uint64_t raw = begin; raw < end; ++raw) {
      const auto alpha = static_cast<Subset>(raw);
      const int s = signed_sum(m, alpha);
      const auto size = static_cast<std::size_t>(std::popcount(alpha));
      p.levels[size] += std::abs(s);
      const int x = x_value(m, k0, alpha);
      if (x != -x_value(m, k0, ~alpha & full)) {
        throw Error(ErrorKind::internal_invariant, "x is not odd under complementation");
      }
      if (x == 0) continue;
      p.sum += x;
      p.pairing += x * s;
      for (Subset rest = alpha; rest != 0; rest &= rest - 1) p.inside[static_cast<std::size_t>(std::countr_zero(rest))] += x;
    }
    partials[c] = std::move(p);
  });

  std::vector<std::int64_t> inside(m, 0);
  std::vector<std::int64_t> levels(m + 1, 0);
  std::int64_t sum = 0;
  std::int64_t pairing = 0;
  for (const auto& p : partials) {
    for (std::size_t i = 0; i < m; ++i) inside[i] += p.inside[i];
    for (std::size_t k = 0; k <= m; ++k) levels[k] += p.levels[k];
    sum += p.sum;
    pairing += p.pairing;
  }

  TxLower out;
  out.m = m;
  out.k0 = k0;
  out.threshold = khintchine_threshold();
  for (std::size_t i = 0; i < m; ++i) {
    // <x, r_i> = (sum over alpha containing i) - (sum over the rest).
    const double coord = static_cast<double>(2 * inside[i] - sum) * op.scale();
    out.coords.push_back(coord);
    out.norm += std::abs(coord);
  }
  out.pairing = static_cast<double>(pairing) * op.scale();
  for (std::size_t k = 0; k <= m; ++k) out.level_sums.push_back(static_cast<double>(levels[k]) * op.scale());
  for (std::size_t k = 0; 2 * k < m; ++k) {
    const auto drop = static_cast<std::int64_t>(2 * binom(m, k));
    if (levels[k + 1] < levels[k] - drop) out.level_drop_ok = false;
  }
  out.passes = out.norm >= out.threshold;
  return out;
}

std::optional<std::size_t> smallest_passing_m(std::size_t k0, std::size_t m_max) {
  for (std::size_t m = 2; m <= std::min(m_max, kMaxStreamM); m += 2) {
    if (tx_lower(m, k0).passes) return m;
  }
  return std::nullopt;
}

namespace {

void validate_coefficients(const SymmetricSCoefficients& s) {
  require_even(s.m);
  if (s.a.size() != s.m) throw Error(ErrorKind::dimension, "need one coefficient a_k per level k = 1..m");
  for (double v : s.a) {
    if (!std::isfinite(v)) throw Error(ErrorKind::contract, "coefficients must be finite");
  }
}

bool in_range(std::size_t m, std::size_t k0, std::size_t k) { return k >= k0 && k + k0 <= m; }

double analytic_cap(double c, std::size_t k0) {
  if (k0 == 0) return std::numeric_limits<double>::infinity();
  return 2.0 * universal_u() * c / std::sqrt(static_cast<double>(k0));
}

}  // namespace

SBounds symmetric_S_bounds(const SymmetricSCoefficients& s, double c, std::size_t k0) {
  validate_coefficients(s);
  if (s.m > kMaxFormulaM) throw Error(ErrorKind::scale, "coefficient bounds are limited to m <= 60");
  SBounds out;
  double weighted = 0.0;
  for (std::size_t k = 1; k <= s.m; ++k) {
    out.coeff_bound_lhs += 2.0 * std::abs(s.a[k - 1]) * static_cast<double>(binom(s.m - 1, k - 1));
    if (in_range(s.m, k0, k)) weighted += 2.0 * s.a[k - 1] * static_cast<double>(d_coefficient(s.m, k));
  }
  const double cap = c / static_cast<double>(s.m);
  out.admissible = out.coeff_bound_lhs <= cap * (1.0 + 1e-12) + 1e-300;
  // Every coordinate of S x equals (-1)^i times the same weighted sum.
  out.sx_norm = static_cast<double>(s.m) * std::abs(weighted);
  out.analytic_cap = analytic_cap(c, k0);
  return out;
}

double sx_norm_direct(const SymmetricSCoefficients& s, std::size_t k0) {
  validate_coefficients(s);
  if (s.m > kMaxBruteForceM) throw Error(ErrorKind::scale, "direct evaluation is limited to m <= 20");
  const std::size_t m = s.m;
  std::vector<double> coords(m, 0.0);
  const std::uint64_t total = std::uint64_t{1} << m;
  const Subset full = full_mask(m);
  for (std::uint64_t raw = 0; raw < total; ++raw) {
    const auto alpha = static_cast<Subset>(raw);
    const int x = x_value(m, k0, alpha);
    if (x == 0) continue;
    const auto size = static_cast<std::size_t>(std::popcount(alpha));
    const auto co_size = static_cast<std::size_t>(std::popcount(~alpha & full));
    for (std::size_t i = 0; i < m; ++i) {
      const double entry = ((alpha >> i) & 1u) != 0 ? s.a[size - 1] : -s.a[co_size - 1];
      coords[i] += x * entry;
    }
  }
  double norm = 0.0;
  for (double v : coords) norm += std::abs(v);
  return norm;
}

AdmissibleMax max_admissible_sx(std::size_t m, double c, std::size_t k0) {
  require_even(m);
  if (m > kMaxFormulaM) throw Error(ErrorKind::scale, "admissible maximum is limited to m <= 60");
  if (!(c >= 0.0)) throw Error(ErrorKind::parameter, "C must be nonnegative");
  AdmissibleMax out;
  out.a.assign(m, 0.0);
  std::vector<std::size_t> levels;
  for (std::size_t k = 1; k <= m; ++k) {
    if (in_range(m, k0, k)) levels.push_back(k);
  }
  if (levels.empty()) {
    out.range_empty = true;
    return out;
  }
  for (std::size_t k : levels) {
    out.closed_form = std::max(out.closed_form, c * static_cast<double>(d_coefficient(m, k)) /
                                                    static_cast<double>(binom(m - 1, k - 1)));
  }
  // maximize m * sum 2 a_k d_k  subject to  2 sum |a_k| C(m-1,k-1) <= C/m,
  // with a_k = p_k - q_k.  The objective is sign-symmetric in a.
  lp::Problem p;
  std::vector<lp::Term> budget;
  for (std::size_t k : levels) {
    const double gain = 2.0 * static_cast<double>(m) * static_cast<double>(d_coefficient(m, k));
    const double weight = 2.0 * static_cast<double>(binom(m - 1, k - 1));
    const std::size_t pk = p.add_variable(-gain);
    const std::size_t qk = p.add_variable(gain);
    budget.push_back({pk, weight});
    budget.push_back({qk, weight});
  }
  p.add_row(std::move(budget), lp::Sense::less_equal, c / static_cast<double>(m));
  const auto sol = lp::solve(p);
  if (sol.status != lp::Status::optimal) throw Error(ErrorKind::internal_invariant, "admissible LP not optimal");
  for (std::size_t t = 0; t < levels.size(); ++t) out.a[levels[t] - 1] = sol.x[2 * t] - sol.x[2 * t + 1];
  out.value = -sol.objective;
  return out;
}

PerturbationGap perturbation_gap(std::size_t m, double c, double eps, std::size_t k0,
                                 const std::optional<SymmetricSCoefficients>& s) {
  require_even(m);
  if (!(c >= 0.0)) throw Error(ErrorKind::parameter, "C must be nonnegative");
  const double threshold = khintchine_threshold();
  if (!(eps > 0.0 && eps < threshold)) throw Error(ErrorKind::parameter, "eps must lie in (0, 1/(4K))");
  if (k0 == 0) throw Error(ErrorKind::parameter, "k0 must be at least 1");
  PerturbationGap out;
  out.threshold = threshold;
  out.analytic_cap = analytic_cap(c, k0);
  if (out.analytic_cap >= threshold - eps) {
    const double need = 2.0 * universal_u() * c / (threshold - eps);
    throw Error(ErrorKind::regime, "2UC/sqrt(k0) = " + std::to_string(out.analytic_cap) +
                                       " is not below 1/(4K) - eps; use k0 > " + std::to_string(need * need));
  }
  out.tx_norm = tx_lower(m, k0).norm;
  if (s) {
    if (s->m != m) throw Error(ErrorKind::dimension, "coefficient vector has the wrong m");
    const auto bounds = symmetric_S_bounds(*s, c, k0);
    if (!bounds.admissible) throw Error(ErrorKind::contract, "S violates the lattice bound C/m");
    out.sx_max = bounds.sx_norm;
  } else {
    const auto best = max_admissible_sx(m, c, k0);
    out.sx_max = best.value;
    out.range_empty = best.range_empty;
  }
  out.range_empty = out.range_empty || 2 * k0 > m;
  out.gap = out.tx_norm - out.sx_max;
  out.verdict = out.gap > eps;
  return out;
}

DiagGap diag_gap(std::size_t m, double c) {
  require_even(m);
  if (!(c >= 0.0)) throw Error(ErrorKind::parameter, "C must be nonnegative");
  const double md = static_cast<double>(m);
  std::vector<double> x(m);
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    x[i] = ((i + 1) % 2 == 0 ? 1.0 : -1.0) / std::sqrt(md);
    sum += x[i];
  }
  DiagGap out;
  for (double v : x) out.ax_norm += std::abs(v) / std::sqrt(md);
  // ||Sx|| is convex in (a, b), so the maximum sits at a corner.
  for (double a : {-c, c}) {
    for (double b : {-c * (md - 1.0), c * (md - 1.0)}) {
      double norm = 0.0;
      for (double v : x) norm += std::abs(a / md * v + b / (md * (md - 1.0)) * (sum - v));
      out.sx_max = std::max(out.sx_max, norm);
    }
  }
  out.gap = out.ax_norm - out.sx_max;
  out.bound = 1.0 - 3.0 * c / std::sqrt(md);
  out.holds = out.gap >= out.bound - 1e-12;
  return out;
}

std::vector<SweepRow> sweep(std::span<const std::size_t> ms, std::span<const std::size_t> k0s, double c, double eps) {
  std::vector<SweepRow> rows;
  for (std::size_t m : ms) {
    for (std::size_t k0 : k0s) {
      SweepRow row;
      row.m = m;
      row.k0 = k0;
      row.tx_norm = tx_lower(m, k0).norm;
      row.cap = analytic_cap(c, k0);
      row.regime_ok = row.cap < khintchine_threshold() - eps;
      row.sx_max = max_admissible_sx(m, c, k0).value;
      row.gap = row.tx_norm - row.sx_max;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace bdlab::counterexample
