#pragma once

// Constructive dichotomy: either a small approximate lattice bound exists,
// or the operator maps extreme points to functions with large pieces on
// disjoint sets.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bdlab/l1_geometry.hpp"
#include "bdlab/measure.hpp"
#include "bdlab/operator.hpp"

namespace bdlab {

struct DisjointPiece {
  L1Fun f;
  AtomSet support;
};

/// Functions f_s with ||f_s 1_{E_s}||_1 >= delta on pairwise disjoint E_s.
struct DisjointFamily {
  std::vector<DisjointPiece> pieces;
  double delta = 0.0;
};

struct FamilyCheck {
  bool disjoint = true;
  double min_restricted = 0.0;
  bool ok = false;
};

FamilyCheck check_family(const AtomSpace& space, const DisjointFamily& family);

struct EscapeTrace {
  std::size_t floor_steps = 0;  // floor(4 n^2 / eps)
  std::size_t steps = 0;        // N actually used (>= floor_steps)
  bool bumped = false;
  std::vector<ExtremePoint> points;
  std::vector<double> gains;
  std::vector<AtomSet> regions;          // D_i
  std::vector<std::size_t> chain;        // 0-based step indices, descending
  std::vector<std::vector<double>> cross_excess;  // [s][r] for r < s
  std::string outcome;                   // "lattice-bound" | "disjoint-family"
};

struct EscapeResult {
  std::variant<LatticeBoundCert, DisjointFamily> outcome;
  EscapeTrace trace;

  bool found_bound() const noexcept { return outcome.index() == 0; }
  const LatticeBoundCert& bound() const { return std::get<LatticeBoundCert>(outcome); }
  const DisjointFamily& family() const { return std::get<DisjointFamily>(outcome); }
};

/// Smallest N >= floor(4n^2/eps) with N - 1 >= n * ceil(2n/eps).
std::size_t escape_steps(double epsilon, std::size_t n, std::size_t* floor_value = nullptr);

/// Greedy: x_i maximises the gain ||(|Tx| - max_{j<i}|Tx_j|)^+||_1.  Stops
/// with a verified lattice bound as soon as the gain is <= eps; after N
/// steps extracts a chain of n indices and returns the disjoint family.
/// Requires ||T|| <= 1.
EscapeResult greedy_escape(const FiniteOperator& op, double epsilon, std::size_t n,
                           std::uint64_t cap = kDefaultEnumerationCap);

struct SelectionResult {
  std::vector<std::size_t> selected;     // ascending
  std::vector<double> row_sums;          // within the selection, same order
  L1EquivalenceCert cert;
  std::size_t rounds = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kMaxSelectionRounds = 10000;

/// Random 2k-subsets until the mean within-subset row sum of
/// alpha_{ij} = ||f_i 1_{E_j}||_1 is at most 4k/(n-1) and the k rows with the
/// smallest sums have pairwise row sums <= delta/2.
SelectionResult rosenthal_select(const AtomSpace& space, std::span<const L1Fun> fs,
                                 std::span<const AtomSet> sets, double delta, std::size_t k,
                                 std::uint64_t seed);

/// alpha_{ij} with a zero diagonal.
std::vector<std::vector<double>> overlap_matrix(const AtomSpace& space, std::span<const L1Fun> fs,
                                                std::span<const AtomSet> sets);

struct ConflictBound {
  double certified = 0.0;     // sum_s ||min(|f_s|, g) 1_{E_s}||_1 <= ||g||_1
  double closed_form = 0.0;   // k (delta - eps'), meaningful when precondition_held
  double worst_excess = 0.0;  // max_s ||(|f_s| - g)^+||_1
  bool precondition_held = false;
};

ConflictBound conflict_bound(const AtomSpace& space, const DisjointFamily& family,
                             std::span<const double> bound, double epsilon_prime);

}  // namespace bdlab
