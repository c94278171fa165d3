#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "bdlab/measure.hpp"
#include "bdlab/operator.hpp"

namespace bdlab {

inline constexpr std::size_t kMaxEquivalenceSize = 16;

/// alpha <= ||sum a_i f_i||_1 <= beta whenever sum |a_i| = 1.
struct L1EquivalenceCert {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> minimizer;  // sum |a_i| = 1, attains `lower`
  std::vector<int> orthant;       // sign pattern of the minimising LP

  double ratio() const {
    return lower > 0.0 ? upper / lower : std::numeric_limits<double>::infinity();
  }
};

/// Exact ell_1-basis constants of fs: beta from the vertices of the sphere,
/// alpha from one LP per sign orthant (orthants with a_1 >= 0 suffice since
/// the norm is even).  Ties keep the lexicographically first orthant.
L1EquivalenceCert l1_equivalence(const AtomSpace& space, std::span<const L1Fun> fs);

struct LatticeBoundCert {
  L1Fun bound;
  double mass = 0.0;  // ||g||_1
  double epsilon = 0.0;
  double worst_excess = 0.0;
  ExtremePoint witness;
  bool passed = false;
  bool exhaustive = true;  // false: worst_excess is a sampled lower bound
};

struct ExcessResult {
  double worst_excess = 0.0;
  ExtremePoint witness;
  bool exhaustive = true;
};

struct VerifyOptions {
  std::uint64_t cap = kDefaultEnumerationCap;
  std::size_t samples = 100000;  // used only beyond the cap
  std::uint64_t seed = 0;
};

/// max over extreme points x of ||(|Tx| - g)^+||_1.
ExcessResult verify_lattice_bound(const FiniteOperator& op, std::span<const double> bound,
                                  const VerifyOptions& options = {});

/// Builds a certificate for a given bound (runs verify_lattice_bound).
LatticeBoundCert certify_lattice_bound(const FiniteOperator& op, L1Fun bound, double epsilon,
                                       const VerifyOptions& options = {});

/// Smallest ||g||_1 with ||(|Tx| - g)^+||_1 <= eps at every extreme point.
LatticeBoundCert min_approx_lattice_bound(const FiniteOperator& op, double epsilon,
                                          std::uint64_t cap = kDefaultEnumerationCap);

/// T = B A with A x = Tx / g' (bounded functions) and B f = g' f, g' = g + eta.
struct ExactFactorization {
  L1Fun multiplier;
  std::vector<L1Fun> bounded_columns;
  double eta = 0.0;
  double a_norm = 0.0;  // sup-norm operator norm of A
  double b_norm = 0.0;  // ||g'||_1
  double residual = 0.0;
};

double default_eta(std::span<const double> bound);

ExactFactorization lattice_factorize_exact(const FiniteOperator& op, std::span<const double> bound,
                                           double eta);

/// S e_i = (T e_i ^ g) v (-g) on a single l1 block, with ||T - S|| <= eps.
struct ApproxFactorization {
  FiniteOperator clamped;
  std::vector<double> deviations;  // ||(T - S) e_i||_1
  double distance = 0.0;           // ||T - S||
  LatticeBoundCert exact_cert;     // g as an exact bound for S
};

ApproxFactorization lattice_factorize_approx(const FiniteOperator& op, const L1Fun& bound,
                                             double epsilon);

}  // namespace bdlab
