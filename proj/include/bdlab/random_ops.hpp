#pragma once

// Operators whose matrix entries are independent symmetric random
// variables, realised either on the exact product space or by sampling,
// together with exact checkers for the probabilistic inequalities used on
// them.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bdlab/dichotomy.hpp"
#include "bdlab/measure.hpp"
#include "bdlab/operator.hpp"

namespace bdlab {

inline constexpr double kKhintchine = 1.4142135623730951;  // sqrt 2

/// Finite distribution with P(v) = P(-v) for every support point.
class SymmetricDistribution {
 public:
  /// Throws Error(contract) if the support is not sign-symmetric, a
  /// probability is not positive, or the total differs from 1 by > 1e-12.
  explicit SymmetricDistribution(std::vector<std::pair<double, double>> support);

  /// +-v with probability 1/2 each.
  static SymmetricDistribution rademacher(double v = 1.0);
  /// +-small w.p. (1-p)/2 each, +-large w.p. p/2 each.
  static SymmetricDistribution two_level(double small, double large, double p);

  std::span<const std::pair<double, double>> support() const noexcept { return support_; }
  std::size_t size() const noexcept { return support_.size(); }

 private:
  std::vector<std::pair<double, double>> support_;  // sorted by value
};

inline constexpr std::uint64_t kMaxProductAtoms = std::uint64_t{1} << 20;

struct ExactBackend {};
struct MonteCarloBackend {
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
};

struct SymmetricRandomMatrixSpec {
  std::size_t m = 1;
  /// One shared distribution, or m*m in row-major entry order (i, j).
  std::vector<SymmetricDistribution> entries;
  bool exact = true;
  MonteCarloBackend monte_carlo{};

  const SymmetricDistribution& entry(std::size_t i, std::size_t j) const;
  /// Product of support sizes, saturating.
  std::uint64_t product_atoms() const noexcept;
};

/// Domain l_inf^m(l1^m); column (i, j) holds the realised values of T_{ij}.
/// Exact: atoms are all joint outcomes (entry (0,0) the most significant
/// digit) with product weights, and the operator is flagged symmetric.
/// Monte Carlo: one atom per sample with weight 1/S, never flagged.
FiniteOperator build_symmetric_matrix(const SymmetricRandomMatrixSpec& spec);

/// i -> j_i, one coordinate per row.
struct ColumnFunction {
  std::vector<std::size_t> j;

  bool disjoint_from(const ColumnFunction& other) const;
  bool operator==(const ColumnFunction&) const = default;
};

/// || sum_i T_{i, j_i} 1{|T_{i, j_i}| > C} ||_1.
double tail_quantity(const FiniteOperator& op, const ColumnFunction& j, double level);

struct CaseSplit {
  bool case_a = false;                  // every family member has tail >= eps
  std::vector<ColumnFunction> family;   // witness (case A) or best family (case B)
  std::vector<double> family_tails;
  double residual_tail = 0.0;           // case B: max tail over disjoint complements
  ColumnFunction residual_witness;
  bool heuristic = false;               // candidate functions were sampled
  std::uint64_t families_checked = 0;
};

struct CaseSplitOptions {
  std::uint64_t cap = std::uint64_t{1} << 16;  // column functions enumerated exactly
  std::size_t samples = 4096;                  // sampled functions beyond the cap
  std::uint64_t seed = 0;
};

CaseSplit case_split_test(const FiniteOperator& op, double epsilon, double level, std::size_t n,
                          const CaseSplitOptions& options = {});

struct DisjointifyResult {
  DisjointFamily family;              // delta = measured minimum
  std::vector<AtomSet> level_sets;    // E'_s
  std::vector<double> level_probability;  // P(E'_s)
  std::vector<double> levy_bound;     // 2 P(|f_s| > C)
  std::vector<double> tails;          // ||sum_i T_{i,s} 1{|T_{i,s}| > C}||_1
  bool empty = false;                 // some E'_s is empty
  bool hypothesis_held = false;       // tails >= eps and ||f_s|| <= 1
  double guaranteed = 0.0;            // eps / (2K) when the hypothesis held
};

/// f_s = sum_i T_{i,s}, E_s = E'_s minus the other E'_r, for s < n.
/// Needs C > 2 and (1 - 2/C)^n >= 1/2.
DisjointifyResult independent_disjointify(const FiniteOperator& op, double level, std::size_t n,
                                          std::optional<double> epsilon = std::nullopt);

struct TruncationSplit {
  FiniteOperator kept;       // S1: columns j < n
  FiniteOperator truncated;  // S2: columns j >= n, cut at level C
  FiniteOperator remainder;  // T - S1 - S2
};

TruncationSplit truncation_split(const FiniteOperator& op, double level, std::size_t n);

/// Checks that the fs are independent and symmetric on their space: the
/// joint law equals the product of the marginals and each marginal is
/// sign-symmetric.  Throws Error(precondition) otherwise.
void require_independent_symmetric(const AtomSpace& space, std::span<const L1Fun> fs);

/// Product space of independent variables with the given laws; fs[i] is
/// the i-th coordinate.
std::pair<AtomSpace, std::vector<L1Fun>> product_space(std::span<const SymmetricDistribution> laws);

struct HjResult {
  double lhs = 0.0;    // ||sum X_i||_p
  double rhs = 0.0;    // ||max |X_i|||_p + ||sum X_i 1{|X_i| <= delta0}||_q
  double delta0 = 0.0;
  double ratio = 0.0;  // lhs / rhs, 0 when rhs = 0
};

HjResult hj_check(const AtomSpace& space, std::span<const L1Fun> fs, int p, int q);
HjResult hj_check(std::span<const SymmetricDistribution> laws, int p, int q);

struct LevyResult {
  double lhs = 0.0;  // P(max |f_i| > C)
  double rhs = 0.0;  // 2 P(|sum f_i| > C)
  bool holds = false;
};

LevyResult levy_check(const AtomSpace& space, std::span<const L1Fun> fs, double level);
LevyResult levy_check(std::span<const SymmetricDistribution> laws, double level);

inline constexpr std::size_t kMaxKhintchineLength = 20;

struct KhintchineResult {
  double mean_abs = 0.0;  // E|sum a_i r_i|
  double lower = 0.0;     // ||a||_2 / K
  double upper = 0.0;     // ||a||_2
  bool holds = false;
};

KhintchineResult khintchine_square_check(std::span<const double> a);

struct SquareFunctionResult {
  double square = 0.0;  // ||(sum f_i^2)^(1/2)||_1
  double sum = 0.0;     // ||sum f_i||_1
  bool holds = false;   // square / K <= sum <= square
};

SquareFunctionResult square_function_check(const AtomSpace& space, std::span<const L1Fun> fs);

}  // namespace bdlab
