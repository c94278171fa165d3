#pragma once

// Atomic measure spaces and the lattice/norm primitives used everywhere else.

#include <cstddef>
#include <span>
#include <vector>

namespace bdlab {

/// Absolute tolerance for invariant checks unless an operation says otherwise.
inline constexpr double kTolerance = 1e-9;

enum class MeasureKind { probability, counting };

class AtomSpace {
 public:
  /// Throws Error(contract) unless every weight is positive and the kind's
  /// normalisation holds (probability: |sum - 1| <= 1e-12, counting: all 1).
  AtomSpace(MeasureKind kind, std::vector<double> weights);

  static AtomSpace counting(std::size_t n);
  static AtomSpace uniform(std::size_t n);
  static AtomSpace probability(std::vector<double> weights);

  MeasureKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return weights_.size(); }
  double weight(std::size_t atom) const { return weights_.at(atom); }
  std::span<const double> weights() const noexcept { return weights_; }

  bool operator==(const AtomSpace&) const = default;

 private:
  MeasureKind kind_;
  std::vector<double> weights_;
};

/// A function on the atoms of some AtomSpace.
struct L1Fun {
  std::vector<double> values;

  L1Fun() = default;
  explicit L1Fun(std::vector<double> v) : values(std::move(v)) {}
  L1Fun(std::initializer_list<double> v) : values(v) {}
  static L1Fun zeros(std::size_t n) { return L1Fun(std::vector<double>(n, 0.0)); }

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  operator std::span<const double>() const noexcept { return values; }

  bool operator==(const L1Fun&) const = default;
};

/// Sorted set of atom indices without duplicates.
class AtomSet {
 public:
  AtomSet() = default;
  /// Sorts the input; throws Error(contract) on duplicates.
  explicit AtomSet(std::vector<std::size_t> indices);
  AtomSet(std::initializer_list<std::size_t> indices)
      : AtomSet(std::vector<std::size_t>(indices)) {}

  std::span<const std::size_t> indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  bool contains(std::size_t atom) const;

  bool operator==(const AtomSet&) const = default;

 private:
  std::vector<std::size_t> indices_;
};

enum class Norm { l1, l2, linf };

/// (sum_w w |f|^p)^(1/p), or max |f| for p = infinity.
double weighted_norm(const AtomSpace& space, std::span<const double> f, Norm p);

/// ||(|f| - g)^+||_1.  g must be entrywise nonnegative.
double pos_excess(const AtomSpace& space, std::span<const double> f, std::span<const double> g);

/// Pointwise max of absolute values.
L1Fun abs_join(std::span<const L1Fun> fs);

/// ||f 1_E||_1.
double restrict_norm(const AtomSpace& space, std::span<const double> f, const AtomSet& set);

void require_same_size(const AtomSpace& space, std::span<const double> f, const char* what);

}  // namespace bdlab
