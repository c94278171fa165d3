#include "bdlab/operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "bdlab/error.hpp"
#include "bdlab/parallel.hpp"

namespace bdlab {

namespace {

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return a * b;
}

}  // namespace

DomainShape::DomainShape(std::vector<std::size_t> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw Error(ErrorKind::contract, "domain needs at least one block");
  offsets_.reserve(blocks_.size() + 1);
  offsets_.push_back(0);
  for (std::size_t b : blocks_) {
    if (b == 0) throw Error(ErrorKind::contract, "domain blocks must be nonempty");
    offsets_.push_back(offsets_.back() + b);
  }
}

std::size_t DomainShape::column(std::size_t block, std::size_t coord) const {
  if (block >= blocks_.size() || coord >= blocks_[block]) {
    throw Error(ErrorKind::index_range, "basis vector (" + std::to_string(block) + "," +
                                            std::to_string(coord) + ") outside domain");
  }
  return offsets_[block] + coord;
}

double DomainShape::norm(std::span<const double> x) const {
  if (x.size() != dimension()) throw Error(ErrorKind::dimension, "coefficient vector length mismatch");
  double best = 0.0;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    double s = 0.0;
    for (std::size_t c = offsets_[i]; c < offsets_[i + 1]; ++c) s += std::abs(x[c]);
    best = std::max(best, s);
  }
  return best;
}

std::uint64_t DomainShape::extreme_point_count() const noexcept {
  std::uint64_t n = 1;
  for (std::size_t b : blocks_) n = saturating_mul(n, 2 * static_cast<std::uint64_t>(b));
  return n;
}

std::uint64_t DomainShape::sign_free_count() const noexcept {
  std::uint64_t n = 1;
  for (std::size_t b : blocks_) n = saturating_mul(n, b);
  return n;
}

std::vector<double> ExtremePoint::coefficients(const DomainShape& shape) const {
  if (choices.size() != shape.num_blocks()) throw Error(ErrorKind::dimension, "extreme point block count mismatch");
  std::vector<double> x(shape.dimension(), 0.0);
  for (std::size_t i = 0; i < choices.size(); ++i) {
    x[shape.column(i, choices[i].coord)] = static_cast<double>(choices[i].sign);
  }
  return x;
}

ExtremePoint extreme_point_at(const DomainShape& shape, std::uint64_t index) {
  ExtremePoint p;
  p.choices.resize(shape.num_blocks());
  for (std::size_t i = shape.num_blocks(); i-- > 0;) {
    const std::uint64_t radix = 2 * static_cast<std::uint64_t>(shape.block_size(i));
    const std::uint64_t digit = index % radix;
    index /= radix;
    p.choices[i] = BlockChoice{static_cast<std::size_t>(digit / 2), (digit % 2) ? -1 : 1};
  }
  return p;
}

ExtremePoint sign_free_point_at(const DomainShape& shape, std::uint64_t index) {
  ExtremePoint p;
  p.choices.resize(shape.num_blocks());
  for (std::size_t i = shape.num_blocks(); i-- > 0;) {
    const std::uint64_t radix = shape.block_size(i);
    p.choices[i] = BlockChoice{static_cast<std::size_t>(index % radix), 1};
    index /= radix;
  }
  return p;
}

void require_enumerable(const DomainShape& shape, std::uint64_t cap) {
  const std::uint64_t count = shape.extreme_point_count();
  if (count > cap) {
    throw Error(ErrorKind::scale, "domain has " + std::to_string(count) +
                                      " extreme points (cap " + std::to_string(cap) +
                                      "); use search mode for a lower bound");
  }
}

std::vector<ExtremePoint> extreme_points(const DomainShape& shape, std::uint64_t cap) {
  require_enumerable(shape, cap);
  const std::uint64_t count = shape.extreme_point_count();
  std::vector<ExtremePoint> out;
  out.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) out.push_back(extreme_point_at(shape, k));
  return out;
}

FiniteOperator::FiniteOperator(DomainShape domain, AtomSpace range, std::vector<L1Fun> columns,
                               bool symmetric_entries)
    : domain_(std::move(domain)), range_(std::move(range)), symmetric_(symmetric_entries) {
  if (columns.size() != domain_.dimension()) {
    throw Error(ErrorKind::dimension, "operator has " + std::to_string(columns.size()) +
                                          " columns but domain dimension " +
                                          std::to_string(domain_.dimension()));
  }
  data_.reserve(columns.size() * range_.size());
  for (const auto& c : columns) {
    require_same_size(range_, c, "operator column");
    data_.insert(data_.end(), c.values.begin(), c.values.end());
  }
}

FiniteOperator FiniteOperator::zero(DomainShape domain, AtomSpace range) {
  std::vector<L1Fun> cols(domain.dimension(), L1Fun::zeros(range.size()));
  return FiniteOperator(std::move(domain), std::move(range), std::move(cols));
}

FiniteOperator FiniteOperator::identity(std::size_t n) {
  std::vector<L1Fun> cols(n, L1Fun::zeros(n));
  for (std::size_t i = 0; i < n; ++i) cols[i][i] = 1.0;
  return FiniteOperator(DomainShape::single_block(n), AtomSpace::counting(n), std::move(cols));
}

std::span<const double> FiniteOperator::column(std::size_t c) const {
  if (c >= num_columns()) throw Error(ErrorKind::index_range, "column index out of range");
  return std::span<const double>(data_).subspan(c * num_atoms(), num_atoms());
}

L1Fun FiniteOperator::column_fun(std::size_t c) const {
  const auto col = column(c);
  return L1Fun(std::vector<double>(col.begin(), col.end()));
}

std::vector<L1Fun> FiniteOperator::columns() const {
  std::vector<L1Fun> out;
  out.reserve(num_columns());
  for (std::size_t c = 0; c < num_columns(); ++c) out.push_back(column_fun(c));
  return out;
}

L1Fun apply(const FiniteOperator& op, std::span<const double> coefficients) {
  if (coefficients.size() != op.num_columns()) {
    throw Error(ErrorKind::dimension, "coefficient vector length differs from domain dimension");
  }
  L1Fun out = L1Fun::zeros(op.num_atoms());
  for (std::size_t c = 0; c < coefficients.size(); ++c) {
    const double a = coefficients[c];
    if (a == 0.0) continue;
    const auto col = op.column(c);
    for (std::size_t w = 0; w < col.size(); ++w) out[w] += a * col[w];
  }
  return out;
}

void apply_into(const FiniteOperator& op, const ExtremePoint& point, std::span<double> out) {
  const auto& shape = op.domain();
  if (point.choices.size() != shape.num_blocks()) {
    throw Error(ErrorKind::dimension, "extreme point block count mismatch");
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < point.choices.size(); ++i) {
    const auto col = op.column(i, point.choices[i].coord);
    if (point.choices[i].sign > 0) {
      for (std::size_t w = 0; w < col.size(); ++w) out[w] += col[w];
    } else {
      for (std::size_t w = 0; w < col.size(); ++w) out[w] -= col[w];
    }
  }
}

L1Fun apply(const FiniteOperator& op, const ExtremePoint& point) {
  L1Fun out = L1Fun::zeros(op.num_atoms());
  apply_into(op, point, out.values);
  return out;
}

double triangle_bound(const FiniteOperator& op) {
  const auto& shape = op.domain();
  double total = 0.0;
  for (std::size_t i = 0; i < shape.num_blocks(); ++i) {
    double best = 0.0;
    for (std::size_t j = 0; j < shape.block_size(i); ++j) {
      best = std::max(best, weighted_norm(op.range(), op.column(i, j), Norm::l1));
    }
    total += best;
  }
  return total;
}

namespace {

struct Best {
  double value = -1.0;
  std::uint64_t index = 0;
};

template <class PointAt>
NormResult enumerate_max(const FiniteOperator& op, std::uint64_t count, PointAt point_at) {
  const std::size_t chunks = plan_chunks(count, 4096);
  std::vector<Best> best(chunks);
  run_chunks(count, chunks, [&](std::size_t c, std::uint64_t begin, std::uint64_t end) {
    std::vector<double> image(op.num_atoms());
    for (std::uint64_t k = begin; k < end; ++k) {
      apply_into(op, point_at(k), image);
      const double v = weighted_norm(op.range(), image, Norm::l1);
      if (v > best[c].value) best[c] = Best{v, k};
    }
  });
  Best overall;
  for (const auto& b : best) {
    if (b.value > overall.value) overall = b;
  }
  NormResult r;
  r.value = std::max(0.0, overall.value);
  r.witness = point_at(overall.index);
  r.evaluated = count;
  return r;
}

NormResult hill_climb(const FiniteOperator& op, const NormOptions& opt) {
  const auto& shape = op.domain();
  const auto& space = op.range();
  std::mt19937_64 rng(opt.seed);
  NormResult result;
  result.lower_bound = true;
  result.value = -1.0;
  std::vector<double> image(op.num_atoms());
  std::vector<double> trial(op.num_atoms());
  const std::size_t restarts = std::max<std::size_t>(1, opt.restarts);
  for (std::size_t r = 0; r < restarts; ++r) {
    ExtremePoint x;
    x.choices.resize(shape.num_blocks());
    for (std::size_t i = 0; i < shape.num_blocks(); ++i) {
      std::uniform_int_distribution<std::size_t> pick(0, shape.block_size(i) - 1);
      x.choices[i] = BlockChoice{pick(rng), (rng() & 1) ? -1 : 1};
    }
    apply_into(op, x, image);
    double value = weighted_norm(space, image, Norm::l1);
    ++result.evaluated;
    for (std::size_t step = 0; step < opt.iterations; ++step) {
      double best_value = value;
      std::size_t best_block = shape.num_blocks();
      BlockChoice best_choice{};
      for (std::size_t i = 0; i < shape.num_blocks(); ++i) {
        const auto old_col = op.column(i, x.choices[i].coord);
        const double old_sign = x.choices[i].sign;
        for (std::size_t j = 0; j < shape.block_size(i); ++j) {
          for (int s : {1, -1}) {
            if (j == x.choices[i].coord && s == x.choices[i].sign) continue;
            const auto col = op.column(i, j);
            for (std::size_t w = 0; w < trial.size(); ++w) {
              trial[w] = image[w] - old_sign * old_col[w] + s * col[w];
            }
            const double v = weighted_norm(space, trial, Norm::l1);
            ++result.evaluated;
            if (v > best_value * (1.0 + 1e-14) + 1e-300) {
              best_value = v;
              best_block = i;
              best_choice = BlockChoice{j, s};
            }
          }
        }
      }
      if (best_block == shape.num_blocks()) break;
      x.choices[best_block] = best_choice;
      apply_into(op, x, image);
      value = weighted_norm(space, image, Norm::l1);
    }
    if (value > result.value) {
      result.value = value;
      result.witness = x;
    }
  }
  result.value = std::max(0.0, result.value);
  return result;
}

}  // namespace

NormResult operator_norm(const FiniteOperator& op, const NormOptions& options) {
  const auto& shape = op.domain();
  switch (options.mode) {
    case NormMode::exact: {
      require_enumerable(shape, options.cap);
      return enumerate_max(op, shape.extreme_point_count(),
                           [&](std::uint64_t k) { return extreme_point_at(shape, k); });
    }
    case NormMode::symmetric: {
      if (!op.symmetric_entries()) {
        throw Error(ErrorKind::contract, "symmetric norm mode requires an operator with symmetric entries");
      }
      const std::uint64_t count = shape.sign_free_count();
      if (count > options.cap) {
        throw Error(ErrorKind::scale, "too many column functions for symmetric mode");
      }
      return enumerate_max(op, count, [&](std::uint64_t k) { return sign_free_point_at(shape, k); });
    }
    case NormMode::search:
      return hill_climb(op, options);
  }
  return {};
}

}  // namespace bdlab
