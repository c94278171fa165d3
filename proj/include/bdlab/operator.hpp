#pragma once

// Operators from l_inf-sums of l1-blocks into atomic L1, stored as one
// column per basis vector e_{i,j} in block-major order.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bdlab/measure.hpp"

namespace bdlab {

inline constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 24;

/// l_inf^a(l1^{b_1}, ..., l1^{b_a}).
class DomainShape {
 public:
  explicit DomainShape(std::vector<std::size_t> blocks);

  static DomainShape single_block(std::size_t n) { return DomainShape({n}); }
  static DomainShape linf(std::size_t n) { return DomainShape(std::vector<std::size_t>(n, 1)); }
  static DomainShape square(std::size_t m) { return DomainShape(std::vector<std::size_t>(m, m)); }

  std::span<const std::size_t> blocks() const noexcept { return blocks_; }
  std::size_t num_blocks() const noexcept { return blocks_.size(); }
  std::size_t block_size(std::size_t i) const { return blocks_.at(i); }
  std::size_t dimension() const noexcept { return offsets_.back(); }
  /// First column of block i.
  std::size_t offset(std::size_t i) const { return offsets_.at(i); }
  std::size_t column(std::size_t block, std::size_t coord) const;

  /// max_i sum_j |x_{i,j}|.
  double norm(std::span<const double> x) const;

  /// prod_i (2 b_i), saturating at UINT64_MAX.
  std::uint64_t extreme_point_count() const noexcept;
  /// prod_i b_i, saturating.
  std::uint64_t sign_free_count() const noexcept;

  bool operator==(const DomainShape&) const = default;

 private:
  std::vector<std::size_t> blocks_;
  std::vector<std::size_t> offsets_;
};

struct BlockChoice {
  std::size_t coord;
  int sign;  // +1 or -1
  bool operator==(const BlockChoice&) const = default;
};

/// One signed coordinate per block: a vertex of the domain unit ball.
struct ExtremePoint {
  std::vector<BlockChoice> choices;

  std::vector<double> coefficients(const DomainShape& shape) const;
  bool operator==(const ExtremePoint&) const = default;
};

/// Lexicographic order: block 0 most significant, digit = 2*coord + (sign<0).
ExtremePoint extreme_point_at(const DomainShape& shape, std::uint64_t index);
/// Same as extreme_point_at but with every sign +1 (radix b_i per block).
ExtremePoint sign_free_point_at(const DomainShape& shape, std::uint64_t index);
/// Throws Error(scale) when the count exceeds cap.
std::vector<ExtremePoint> extreme_points(const DomainShape& shape,
                                         std::uint64_t cap = kDefaultEnumerationCap);
void require_enumerable(const DomainShape& shape, std::uint64_t cap);

class FiniteOperator {
 public:
  FiniteOperator(DomainShape domain, AtomSpace range, std::vector<L1Fun> columns,
                 bool symmetric_entries = false);

  static FiniteOperator zero(DomainShape domain, AtomSpace range);
  /// id: l1^n -> counting measure on n atoms.
  static FiniteOperator identity(std::size_t n);

  const DomainShape& domain() const noexcept { return domain_; }
  const AtomSpace& range() const noexcept { return range_; }
  std::size_t num_columns() const noexcept { return domain_.dimension(); }
  std::size_t num_atoms() const noexcept { return range_.size(); }
  std::span<const double> column(std::size_t c) const;
  std::span<const double> column(std::size_t block, std::size_t coord) const {
    return column(domain_.column(block, coord));
  }
  L1Fun column_fun(std::size_t c) const;
  std::vector<L1Fun> columns() const;

  /// Set by builders whose entries are independent symmetric random
  /// variables; enables NormMode::symmetric and the pi2 upper estimate.
  bool symmetric_entries() const noexcept { return symmetric_; }
  void set_symmetric_entries(bool value) noexcept { symmetric_ = value; }

  bool operator==(const FiniteOperator&) const = default;

 private:
  DomainShape domain_;
  AtomSpace range_;
  std::vector<double> data_;  // column-major, num_atoms per column
  bool symmetric_ = false;
};

/// sum_c x_c T e_c.
L1Fun apply(const FiniteOperator& op, std::span<const double> coefficients);
L1Fun apply(const FiniteOperator& op, const ExtremePoint& point);
/// Writes T x into out (size num_atoms), summing blocks in ascending order.
void apply_into(const FiniteOperator& op, const ExtremePoint& point, std::span<double> out);

enum class NormMode { exact, symmetric, search };

struct NormOptions {
  NormMode mode = NormMode::exact;
  std::uint64_t seed = 0;
  std::size_t iterations = 1000;  // improvement steps per restart (search)
  std::size_t restarts = 50;
  std::uint64_t cap = kDefaultEnumerationCap;
};

struct NormResult {
  double value = 0.0;
  bool lower_bound = false;  // true for search mode
  ExtremePoint witness;
  std::uint64_t evaluated = 0;
};

NormResult operator_norm(const FiniteOperator& op, const NormOptions& options = {});

/// sum_i max_j ||T e_{i,j}||_1, an upper bound on ||T||.
double triangle_bound(const FiniteOperator& op);

}  // namespace bdlab
