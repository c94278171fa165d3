#pragma once

// Factoring id_{l1^k} through an operator (James blocking, Dor projections)
// and estimates of the 2-summing norm.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bdlab/l1_geometry.hpp"
#include "bdlab/measure.hpp"
#include "bdlab/operator.hpp"

namespace bdlab {

/// Upper bound for the real Grothendieck constant used by pi2_groth.
inline constexpr double kGrothendieck = 1.782;

using Coefficients = std::vector<double>;

struct JamesResult {
  std::vector<Coefficients> blocks;  // z_1..z_k as domain coefficient vectors
  L1EquivalenceCert cert;            // of T z_1..T z_k
  std::size_t level = 0;             // level at which the tuple was accepted
  std::size_t tuple = 0;             // index of the accepted tuple in that level
  double threshold = 0.0;            // (2/delta)^(1/r)
  std::vector<std::vector<double>> level_ratios;  // beta/alpha per tuple per level
};

/// Groups K = k^r vectors into consecutive k-tuples, level by level, and
/// returns the first tuple whose images are (2/delta)^(1/r)-equivalent to
/// the l1^k basis; failing tuples are replaced by their minimising block.
JamesResult james_improve(const FiniteOperator& op, std::span<const Coefficients> ys, std::size_t k,
                          std::size_t r, double delta);

struct ProjectionCert {
  std::vector<L1Fun> functionals;  // phi_j, zero off the support of the h's
  double norm = 0.0;               // max_w || sum_j phi_j(w) h_j ||_1
  double lp_value = 0.0;
  double biorthogonality_residual = 0.0;
};

inline constexpr std::size_t kMaxProjectionRank = 8;
inline constexpr std::size_t kMaxProjectionAtoms = 200;

/// Minimal norm of a projection P f = sum_j <phi_j, f> h_j onto span(hs).
ProjectionCert min_projection(const AtomSpace& space, std::span<const L1Fun> hs);

/// (2 lambda^-2 - 1)^-1, the projection bound for lambda < sqrt 2.
double dor_bound(double lambda);

struct FactorizationCert {
  std::size_t k = 0;
  std::vector<Coefficients> a_columns;  // A e_j
  std::vector<std::vector<double>> b_rows;  // B as k rows over the range atoms
  double a_norm = 0.0;
  double b_norm = 0.0;
  double residual = 0.0;  // max_j ||(B T A - id) e_j||_1
  double lambda = 0.0;    // declared distortion
  double measured_ratio = 0.0;
  double projection_norm = 0.0;
  double product_bound = 0.0;  // (2 lambda / delta)(2 lambda^-2 - 1)^-1
  double product() const { return a_norm * b_norm; }
};

/// id_{l1^k} = B T A with A e_j = z_j and B = (T z_j -> e_j) o P.
FactorizationCert build_l1_factorization(const FiniteOperator& op, std::span<const Coefficients> zs,
                                         double lambda, double delta);

struct Pi2Options {
  bool assume_symmetric = false;  // accept operators without the symmetric flag
  bool allow_counting = false;
};

/// (sum_i max_j ||T_{ij}||_2^2)^(1/2); an upper bound on pi_2 when the
/// entries form a symmetric sequence.
double pi2_upper_sym(const FiniteOperator& op, const Pi2Options& options = {});

struct Pi2Estimate {
  double value = 0.0;
  bool lower_bound_based = false;  // the norm came from search mode
};

Pi2Estimate pi2_groth(const FiniteOperator& op, const NormOptions& norm = {},
                      double grothendieck = kGrothendieck);

using Family = std::vector<Coefficients>;

struct Pi2Lower {
  double value = 0.0;
  std::size_t best = 0;
  double numerator = 0.0;
  double denominator = 0.0;
};

/// (sum_s ||T z_s||_1^2)^(1/2) / weak-2 norm of (z_s), maximised over the
/// given families.  The weak norm enumerates sign vectors on each block.
Pi2Lower pi2_lower(const FiniteOperator& op, std::span<const Family> families,
                   std::uint64_t cap = kDefaultEnumerationCap);

/// Ratio for a single family.
Pi2Lower pi2_ratio(const FiniteOperator& op, const Family& family,
                   std::uint64_t cap = kDefaultEnumerationCap);

struct Pi2SearchOptions {
  std::size_t family_size = 4;
  std::size_t iterations = 300;
  std::size_t restarts = 4;
  std::uint64_t seed = 0;
};

/// Seeded hill climbing over random families; still a certified lower bound.
Pi2Lower pi2_lower_search(const FiniteOperator& op, const Pi2SearchOptions& options = {});

}  // namespace bdlab
