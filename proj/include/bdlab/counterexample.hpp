#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bdlab/operator.hpp"

// The rademacher operators T_m : l_inf^{2^m} -> l1^m, the diagonal
// operators A_m : l2^m -> l1^m, and exact checks of every step of the
// argument that T_m cannot be perturbed to operators with a uniform
// lattice bound.
//
// Subsets alpha of {1..m} are bit masks: element i sits in bit i-1.
namespace bdlab::counterexample {

using Subset = std::uint32_t;

inline constexpr std::size_t kMaxImplicitM = 24;
inline constexpr std::size_t kMaxMaterializeM = 16;
inline constexpr std::size_t kMaxStreamM = 22;
inline constexpr std::size_t kMaxBruteForceM = 20;
inline constexpr std::size_t kMaxFormulaM = 60;
/// Range of k over which U is estimated.
inline constexpr std::size_t kUEstimateRange = 10'000;
inline constexpr double kUMargin = 0.01;

class RademacherOperator {
 public:
  explicit RademacherOperator(std::size_t m);

  std::size_t m() const noexcept { return m_; }
  std::uint64_t num_subsets() const noexcept { return std::uint64_t{1} << m_; }
  /// 1 / (sqrt(m) 2^m).
  double scale() const noexcept { return scale_; }
  /// Row i is 0-based.
  double entry(std::size_t i, Subset alpha) const;
  /// E|r_1 + ... + r_m| / sqrt(m); every sign vector attains the norm by
  /// symmetry, so this is the exact operator norm.
  double exact_norm() const;
  FiniteOperator materialize() const;

 private:
  std::size_t m_;
  double scale_;
};

RademacherOperator build_rademacher_T(std::size_t m);

struct ALatticeReport {
  double max_restricted = 0.0;
  std::vector<double> worst_x;
  std::size_t tested = 0;
  double eps = 0.0;
  bool holds = true;
};

/// max ||A_m x restricted to {i : |x_i|/sqrt(m) > C/m}|| over seeded
/// random unit vectors plus spikes, flats and geometric decays, C = 1/eps.
ALatticeReport check_A_lattice(std::size_t m, double eps, std::size_t samples, std::uint64_t seed);

/// The closed-form subset-sum coefficient d(m, k) for even m.
std::int64_t d_coefficient(std::size_t m, std::size_t k);
/// (-1)^j * sum over |alpha| = k containing j of x_alpha, with eps_i = (-1)^i
/// and no level truncation.  j is 1-based.
std::int64_t d_coefficient_bruteforce(std::size_t m, std::size_t k, std::size_t j);

/// sgn(sum_{i in alpha} eps_i - sum_{i not in alpha} eps_i) with
/// eps_i = (-1)^i, zeroed outside k0 <= |alpha| <= m - k0.
int x_value(std::size_t m, std::size_t k0, Subset alpha);

struct BinomReport {
  bool size_lemma_holds = true;
  std::size_t pairs_checked = 0;
  /// Largest d(m,k) 2^k / (2 C(m-1,k-1) C(k, floor(k/2))) seen; at most 1.
  double worst_size_ratio = 0.0;
  /// ratio[k-1] = C(k, floor(k/2)) sqrt(k) / 2^k.
  std::vector<double> ratios;
  double u_estimate = 0.0;
  /// The even-k ratios increase strictly.
  bool even_trend_increasing = true;
};

BinomReport binom_checks(std::size_t m_max, std::size_t k_max);

/// U_estimate over k <= kUEstimateRange plus the safety margin.
double universal_u();

struct TxLower {
  std::size_t m = 0;
  std::size_t k0 = 0;
  double norm = 0.0;
  double threshold = 0.0;
  bool passes = false;
  /// Coordinates of T_m x.
  std::vector<double> coords;
  /// <T_m x, y> with y = (eps_i); a lower bound for the norm.
  double pairing = 0.0;
  /// level_sums[k] = sum_{|alpha|=k} |<T* y, e_alpha>|.
  std::vector<double> level_sums;
  /// Each level below m/2 loses at most C(m,k) 2/(sqrt(m) 2^m) to the next.
  bool level_drop_ok = true;
};

TxLower tx_lower(std::size_t m, std::size_t k0);

/// Smallest even m in [2, m_max] with ||T_m x|| >= 1/(4K) at this k0.
std::optional<std::size_t> smallest_passing_m(std::size_t k0, std::size_t m_max = kMaxStreamM);

struct SymmetricSCoefficients {
  std::size_t m = 0;
  /// a[k-1] = a_k.
  std::vector<double> a;
};

struct SBounds {
  double coeff_bound_lhs = 0.0;
  bool admissible = false;
  double sx_norm = 0.0;
  double analytic_cap = 0.0;
};

SBounds symmetric_S_bounds(const SymmetricSCoefficients& s, double c, std::size_t k0);

/// ||S x|| computed from the matrix S_{i,alpha} directly (m <= 20).
double sx_norm_direct(const SymmetricSCoefficients& s, std::size_t k0);

struct AdmissibleMax {
  double value = 0.0;
  /// Closed form C max_k d(m,k) / C(m-1,k-1) over the level range.
  double closed_form = 0.0;
  std::vector<double> a;
  bool range_empty = false;
};

/// Maximum of ||S x|| over symmetric S with 2 sum |a_k| C(m-1,k-1) <= C/m,
/// solved as a linear program.
AdmissibleMax max_admissible_sx(std::size_t m, double c, std::size_t k0);

struct PerturbationGap {
  double tx_norm = 0.0;
  double sx_max = 0.0;
  double gap = 0.0;
  double analytic_cap = 0.0;
  double threshold = 0.0;
  bool range_empty = false;
  bool verdict = false;
};

/// Throws a regime error unless 2UC/sqrt(k0) < 1/(4K) - eps.  With `s`
/// given, that operator replaces the admissible maximum.
PerturbationGap perturbation_gap(std::size_t m, double c, double eps, std::size_t k0,
                                 const std::optional<SymmetricSCoefficients>& s = std::nullopt);

struct DiagGap {
  double ax_norm = 0.0;
  double sx_max = 0.0;
  double gap = 0.0;
  double bound = 0.0;
  bool holds = false;
};

DiagGap diag_gap(std::size_t m, double c);

struct SweepRow {
  std::size_t m = 0;
  std::size_t k0 = 0;
  double tx_norm = 0.0;
  double cap = 0.0;
  double sx_max = 0.0;
  double gap = 0.0;
  bool regime_ok = false;
};

std::vector<SweepRow> sweep(std::span<const std::size_t> ms, std::span<const std::size_t> k0s, double c, double eps);

}  // namespace bdlab::counterexample
