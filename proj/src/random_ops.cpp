#include "bdlab/random_ops.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "bdlab/error.hpp"
#include "bdlab/parallel.hpp"

namespace bdlab {

SymmetricDistribution::SymmetricDistribution(std::vector<std::pair<double, double>> support)
    : support_(std::move(support)) {
  if (support_.empty()) throw Error(ErrorKind::contract, "empty support");
  std::sort(support_.begin(), support_.end());
  double total = 0.0;
  for (std::size_t i = 0; i < support_.size(); ++i) {
    const auto [v, p] = support_[i];
    if (!std::isfinite(v) || !(p > 0.0)) throw Error(ErrorKind::contract, "support needs finite values and p > 0");
    if (i > 0 && support_[i - 1].first == v) throw Error(ErrorKind::contract, "repeated support point");
    // Sorted order pairs the i-th point with the i-th from the end.
    const auto [mv, mp] = support_[support_.size() - 1 - i];
    if (mv != -v || std::abs(mp - p) > 1e-12) throw Error(ErrorKind::contract, "support is not sign-symmetric");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorKind::contract, "probabilities do not sum to 1");
}

SymmetricDistribution SymmetricDistribution::rademacher(double v) {
  if (v == 0.0) return SymmetricDistribution({{0.0, 1.0}});
  return SymmetricDistribution({{-v, 0.5}, {v, 0.5}});
}

SymmetricDistribution SymmetricDistribution::two_level(double small, double large, double p) {
  if (!(small > 0.0 && small < large && p > 0.0 && p < 1.0)) {
    throw Error(ErrorKind::contract, "two-level law needs 0 < small < large and 0 < p < 1");
  }
  return SymmetricDistribution(
      {{-large, p / 2}, {-small, (1 - p) / 2}, {small, (1 - p) / 2}, {large, p / 2}});
}

const SymmetricDistribution& SymmetricRandomMatrixSpec::entry(std::size_t i, std::size_t j) const {
  if (i >= m || j >= m) throw Error(ErrorKind::index_range, "entry outside the matrix");
  if (entries.size() == 1) return entries.front();
  if (entries.size() != m * m) throw Error(ErrorKind::contract, "need one shared law or m*m entry laws");
  return entries[i * m + j];
}

std::uint64_t SymmetricRandomMatrixSpec::product_atoms() const noexcept {
  std::uint64_t total = 1;
  for (std::size_t e = 0; e < m * m; ++e) {
    const std::size_t s = entries.size() == 1 ? entries[0].size() : entries[e].size();
    if (total > UINT64_MAX / s) return UINT64_MAX;
    total *= s;
  }
  return total;
}

namespace {

// Joint outcomes of independent laws, first law most significant.
struct Product {
  std::vector<double> weights;
  std::vector<std::vector<double>> values;  // per law, per atom
};

Product enumerate_product(const std::vector<const SymmetricDistribution*>& laws) {
  std::uint64_t atoms = 1;
  for (const auto* law : laws) {
    atoms *= law->size();
    if (atoms > kMaxProductAtoms) {
      throw Error(ErrorKind::scale, "exact product space exceeds 2^20 atoms; use the Monte Carlo backend");
    }
  }
  Product out;
  out.weights.assign(atoms, 1.0);
  out.values.assign(laws.size(), std::vector<double>(atoms));
  std::uint64_t stride = atoms;
  for (std::size_t e = 0; e < laws.size(); ++e) {
    const auto support = laws[e]->support();
    stride /= support.size();
    for (std::uint64_t a = 0; a < atoms; ++a) {
      const auto& [v, p] = support[(a / stride) % support.size()];
      out.values[e][a] = v;
      out.weights[a] *= p;
    }
  }
  double total = 0.0;
  for (double w : out.weights) total += w;
  for (double& w : out.weights) w /= total;
  return out;
}

}  // namespace

FiniteOperator build_symmetric_matrix(const SymmetricRandomMatrixSpec& spec) {
  const std::size_t m = spec.m;
  if (m == 0) throw Error(ErrorKind::contract, "m must be positive");
  std::vector<const SymmetricDistribution*> laws;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) laws.push_back(&spec.entry(i, j));
  }
  const auto shape = DomainShape::square(m);
  if (spec.exact) {
    auto product = enumerate_product(laws);
    std::vector<L1Fun> cols;
    for (auto& v : product.values) cols.emplace_back(std::move(v));
    return FiniteOperator(shape, AtomSpace::probability(std::move(product.weights)), std::move(cols), true);
  }
  const std::size_t samples = spec.monte_carlo.samples;
  if (samples == 0) throw Error(ErrorKind::contract, "Monte Carlo backend needs samples > 0");
  std::mt19937_64 rng(spec.monte_carlo.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<L1Fun> cols(m * m, L1Fun::zeros(samples));
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t e = 0; e < laws.size(); ++e) {
      const auto support = laws[e]->support();
      double u = unit(rng);
      std::size_t idx = 0;
      while (idx + 1 < support.size() && u >= support[idx].second) u -= support[idx++].second;
      cols[e][s] = support[idx].first;
    }
  }
  return FiniteOperator(shape, AtomSpace::uniform(samples), std::move(cols), false);
}

bool ColumnFunction::disjoint_from(const ColumnFunction& other) const {
  if (j.size() != other.j.size()) throw Error(ErrorKind::dimension, "column functions differ in length");
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i] == other.j[i]) return false;
  }
  return true;
}

namespace {

void require_column_function(const DomainShape& shape, const ColumnFunction& j) {
  if (j.j.size() != shape.num_blocks()) throw Error(ErrorKind::dimension, "column function length mismatch");
  for (std::size_t i = 0; i < j.j.size(); ++i) {
    if (j.j[i] >= shape.block_size(i)) throw Error(ErrorKind::index_range, "column function value out of range");
  }
}

double tail_unchecked(const FiniteOperator& op, const ColumnFunction& j, double level) {
  const auto& space = op.range();
  double total = 0.0;
  for (std::size_t w = 0; w < op.num_atoms(); ++w) {
    double v = 0.0;
    for (std::size_t i = 0; i < j.j.size(); ++i) {
      const double t = op.column(i, j.j[i])[w];
      if (std::abs(t) > level) v += t;
    }
    total += space.weight(w) * std::abs(v);
  }
  return total;
}

ColumnFunction function_at(const DomainShape& shape, std::uint64_t index) {
  ColumnFunction f{std::vector<std::size_t>(shape.num_blocks())};
  for (std::size_t i = shape.num_blocks(); i-- > 0;) {
    f.j[i] = static_cast<std::size_t>(index % shape.block_size(i));
    index /= shape.block_size(i);
  }
  return f;
}

}  // namespace

double tail_quantity(const FiniteOperator& op, const ColumnFunction& j, double level) {
  require_column_function(op.domain(), j);
  return tail_unchecked(op, j, level);
}

CaseSplit case_split_test(const FiniteOperator& op, double epsilon, double level, std::size_t n,
                          const CaseSplitOptions& options) {
  const auto& shape = op.domain();
  std::size_t min_block = shape.block_size(0);
  for (std::size_t b : shape.blocks()) min_block = std::min(min_block, b);
  if (n == 0 || n > min_block) throw Error(ErrorKind::parameter, "need 1 <= n <= m");

  CaseSplit out;
  std::vector<ColumnFunction> candidates;
  const std::uint64_t total = shape.sign_free_count();
  if (total <= options.cap) {
    for (std::uint64_t k = 0; k < total; ++k) candidates.push_back(function_at(shape, k));
  } else {
    out.heuristic = true;
    std::mt19937_64 rng(options.seed);
    for (std::size_t s = 0; s < options.samples; ++s) {
      ColumnFunction f{std::vector<std::size_t>(shape.num_blocks())};
      for (std::size_t i = 0; i < f.j.size(); ++i) {
        f.j[i] = std::uniform_int_distribution<std::size_t>(0, shape.block_size(i) - 1)(rng);
      }
      candidates.push_back(std::move(f));
    }
  }
  const std::size_t count = candidates.size();
  std::vector<double> tails(count);
  const std::size_t chunks = plan_chunks(count, 16);
  run_chunks(count, chunks, [&](std::size_t, std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t c = begin; c < end; ++c) tails[c] = tail_unchecked(op, candidates[c], level);
  });

  // Case A: n pairwise disjoint functions, each with tail >= eps.
  std::vector<std::size_t> chosen;
  std::function<bool(std::size_t)> find_heavy = [&](std::size_t from) {
    if (chosen.size() == n) return true;
    for (std::size_t c = from; c < count; ++c) {
      if (tails[c] < epsilon) continue;
      if (!std::all_of(chosen.begin(), chosen.end(),
                       [&](std::size_t o) { return candidates[c].disjoint_from(candidates[o]); })) {
        continue;
      }
      chosen.push_back(c);
      if (find_heavy(c + 1)) return true;
      chosen.pop_back();
    }
    return false;
  };
  if (find_heavy(0)) {
    out.case_a = true;
    for (std::size_t c : chosen) {
      out.family.push_back(candidates[c]);
      out.family_tails.push_back(tails[c]);
    }
    return out;
  }

  // Case B: the family whose disjoint complement has the smallest max tail.
  constexpr std::uint64_t kBudget = 50'000'000;
  std::uint64_t work = 0;
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_family;
  std::size_t best_witness = count;
  chosen.clear();
  std::function<void(std::size_t)> search = [&](std::size_t from) {
    if (work > kBudget) return;
    if (chosen.size() == n) {
      ++out.families_checked;
      double worst = 0.0;
      std::size_t witness = count;
      for (std::size_t c = 0; c < count; ++c) {
        ++work;
        if (tails[c] <= worst && witness != count) continue;
        bool disjoint = true;
        for (std::size_t o : chosen) disjoint = disjoint && candidates[c].disjoint_from(candidates[o]);
        if (disjoint && (witness == count || tails[c] > worst)) {
          worst = tails[c];
          witness = c;
        }
      }
      if (worst < best) {
        best = worst;
        best_family = chosen;
        best_witness = witness;
      }
      return;
    }
    for (std::size_t c = from; c < count; ++c) {
      if (!std::all_of(chosen.begin(), chosen.end(),
                       [&](std::size_t o) { return candidates[c].disjoint_from(candidates[o]); })) {
        continue;
      }
      chosen.push_back(c);
      search(c + 1);
      chosen.pop_back();
      if (work > kBudget) return;
    }
  };
  search(0);
  if (work > kBudget) out.heuristic = true;
  out.residual_tail = std::isfinite(best) ? best : 0.0;
  for (std::size_t c : best_family) {
    out.family.push_back(candidates[c]);
    out.family_tails.push_back(tails[c]);
  }
  if (best_witness < count) out.residual_witness = candidates[best_witness];
  return out;
}

DisjointifyResult independent_disjointify(const FiniteOperator& op, double level, std::size_t n,
                                          std::optional<double> epsilon) {
  if (!(level > 2.0)) throw Error(ErrorKind::parameter, "level C must exceed 2");
  if (std::pow(1.0 - 2.0 / level, static_cast<double>(n)) < 0.5) {
    throw Error(ErrorKind::parameter, "need (1 - 2/C)^n >= 1/2");
  }
  const auto& shape = op.domain();
  for (std::size_t b : shape.blocks()) {
    if (n == 0 || n > b) throw Error(ErrorKind::parameter, "need 1 <= n <= every block size");
  }
  const auto& space = op.range();
  const std::size_t atoms = op.num_atoms();
  DisjointifyResult out;
  std::vector<L1Fun> fs;
  std::vector<std::vector<std::size_t>> level_sets(n);
  for (std::size_t s = 0; s < n; ++s) {
    L1Fun f = L1Fun::zeros(atoms);
    double prob = 0.0;
    double big_sum = 0.0;
    for (std::size_t w = 0; w < atoms; ++w) {
      double top = 0.0;
      for (std::size_t i = 0; i < shape.num_blocks(); ++i) {
        const double t = op.column(i, s)[w];
        f[w] += t;
        top = std::max(top, std::abs(t));
      }
      if (top > level) {
        level_sets[s].push_back(w);
        prob += space.weight(w);
      }
      if (std::abs(f[w]) > level) big_sum += space.weight(w);
    }
    out.level_probability.push_back(prob);
    out.levy_bound.push_back(2.0 * big_sum);
    out.tails.push_back(tail_unchecked(op, ColumnFunction{std::vector<std::size_t>(shape.num_blocks(), s)}, level));
    out.empty = out.empty || level_sets[s].empty();
    fs.push_back(std::move(f));
  }
  for (auto& e : level_sets) out.level_sets.emplace_back(e);
  if (out.empty) return out;

  std::vector<int> hits(atoms, 0);
  for (const auto& e : level_sets) {
    for (std::size_t w : e) ++hits[w];
  }
  double delta = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::size_t> own;
    for (std::size_t w : level_sets[s]) {
      if (hits[w] == 1) own.push_back(w);
    }
    AtomSet set(std::move(own));
    delta = std::min(delta, restrict_norm(space, fs[s], set));
    out.family.pieces.push_back({std::move(fs[s]), std::move(set)});
  }
  out.family.delta = delta;

  if (epsilon) {
    bool held = op.symmetric_entries();
    for (std::size_t s = 0; s < n; ++s) {
      held = held && out.tails[s] >= *epsilon &&
             weighted_norm(space, out.family.pieces[s].f, Norm::l1) <= 1.0 + kTolerance;
    }
    out.hypothesis_held = held;
    out.guaranteed = *epsilon / (2.0 * kKhintchine);
    if (held && delta < out.guaranteed - kTolerance) {
      throw Error(ErrorKind::internal_invariant,
                  "disjointified family has delta " + std::to_string(delta) + " below eps/(2K)");
    }
  }
  return out;
}

TruncationSplit truncation_split(const FiniteOperator& op, double level, std::size_t n) {
  const auto& shape = op.domain();
  std::vector<L1Fun> kept;
  std::vector<L1Fun> truncated;
  std::vector<L1Fun> remainder;
  for (std::size_t i = 0; i < shape.num_blocks(); ++i) {
    for (std::size_t j = 0; j < shape.block_size(i); ++j) {
      const auto col = op.column(i, j);
      L1Fun s1 = L1Fun::zeros(col.size());
      L1Fun s2 = L1Fun::zeros(col.size());
      L1Fun rest = L1Fun::zeros(col.size());
      for (std::size_t w = 0; w < col.size(); ++w) {
        if (j < n) {
          s1[w] = col[w];
        } else if (std::abs(col[w]) <= level) {
          s2[w] = col[w];
        }
        rest[w] = col[w] - s1[w] - s2[w];
        const double expected = (j >= n && std::abs(col[w]) > level) ? col[w] : 0.0;
        if (rest[w] != expected) throw Error(ErrorKind::internal_invariant, "truncation remainder mismatch");
      }
      kept.push_back(std::move(s1));
      truncated.push_back(std::move(s2));
      remainder.push_back(std::move(rest));
    }
  }
  const bool sym = op.symmetric_entries();
  return {FiniteOperator(shape, op.range(), std::move(kept), sym),
          FiniteOperator(shape, op.range(), std::move(truncated), sym),
          FiniteOperator(shape, op.range(), std::move(remainder), sym)};
}

void require_independent_symmetric(const AtomSpace& space, std::span<const L1Fun> fs) {
  if (space.kind() != MeasureKind::probability) {
    throw Error(ErrorKind::precondition, "independence needs a probability space");
  }
  std::vector<std::map<double, double>> marginals(fs.size());
  std::map<std::vector<double>, double> joint;
  std::vector<double> key(fs.size());
  for (std::size_t w = 0; w < space.size(); ++w) {
    for (std::size_t i = 0; i < fs.size(); ++i) {
      require_same_size(space, fs[i], "random variable");
      key[i] = fs[i][w] == 0.0 ? 0.0 : fs[i][w];  // fold -0 into 0
      marginals[i][key[i]] += space.weight(w);
    }
    joint[key] += space.weight(w);
  }
  double expected_tuples = 1.0;
  for (const auto& m : marginals) {
    expected_tuples *= static_cast<double>(m.size());
    for (const auto& [v, p] : m) {
      const auto mirror = m.find(-v);
      if (mirror == m.end() || std::abs(mirror->second - p) > 1e-12) {
        throw Error(ErrorKind::precondition, "a variable is not symmetric");
      }
    }
  }
  if (static_cast<double>(joint.size()) != expected_tuples) {
    throw Error(ErrorKind::precondition, "not a product space: joint support is not the product of marginals");
  }
  for (const auto& [tuple, p] : joint) {
    double prod = 1.0;
    for (std::size_t i = 0; i < tuple.size(); ++i) prod *= marginals[i].at(tuple[i]);
    if (std::abs(prod - p) > 1e-12 + 1e-9 * prod) {
      throw Error(ErrorKind::precondition, "not a product space: joint law differs from the product");
    }
  }
}

std::pair<AtomSpace, std::vector<L1Fun>> product_space(std::span<const SymmetricDistribution> laws) {
  if (laws.empty()) throw Error(ErrorKind::arity, "need at least one law");
  std::vector<const SymmetricDistribution*> ptrs;
  for (const auto& l : laws) ptrs.push_back(&l);
  auto product = enumerate_product(ptrs);
  std::vector<L1Fun> fs;
  for (auto& v : product.values) fs.emplace_back(std::move(v));
  return {AtomSpace::probability(std::move(product.weights)), std::move(fs)};
}

namespace {

double lp_norm(const AtomSpace& space, std::span<const double> f, int p) {
  return weighted_norm(space, f, p == 1 ? Norm::l1 : Norm::l2);
}

}  // namespace

HjResult hj_check(const AtomSpace& space, std::span<const L1Fun> fs, int p, int q) {
  if ((p != 1 && p != 2) || (q != 1 && q != 2)) throw Error(ErrorKind::parameter, "p and q must be 1 or 2");
  if (fs.empty()) throw Error(ErrorKind::arity, "need at least one variable");
  require_independent_symmetric(space, fs);
  const double threshold = 1.0 / (8.0 * std::pow(3.0, p));
  auto tail_sum = [&](double t) {
    double s = 0.0;
    for (const auto& f : fs) {
      for (std::size_t w = 0; w < space.size(); ++w) {
        if (std::abs(f[w]) > t) s += space.weight(w);
      }
    }
    return s;
  };
  HjResult out;
  if (tail_sum(0.0) > threshold) {
    std::vector<double> levels;
    for (const auto& f : fs) {
      for (double v : f.values) {
        if (v != 0.0) levels.push_back(std::abs(v));
      }
    }
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (double v : levels) {
      if (tail_sum(v) <= threshold) {
        out.delta0 = v;
        break;
      }
    }
  }
  const std::size_t atoms = space.size();
  std::vector<double> sum(atoms, 0.0);
  std::vector<double> top(atoms, 0.0);
  std::vector<double> small(atoms, 0.0);
  for (const auto& f : fs) {
    for (std::size_t w = 0; w < atoms; ++w) {
      sum[w] += f[w];
      top[w] = std::max(top[w], std::abs(f[w]));
      if (std::abs(f[w]) <= out.delta0) small[w] += f[w];
    }
  }
  out.lhs = lp_norm(space, sum, p);
  out.rhs = lp_norm(space, top, p) + lp_norm(space, small, q);
  out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : 0.0;
  return out;
}

HjResult hj_check(std::span<const SymmetricDistribution> laws, int p, int q) {
  const auto [space, fs] = product_space(laws);
  return hj_check(space, fs, p, q);
}

LevyResult levy_check(const AtomSpace& space, std::span<const L1Fun> fs, double level) {
  if (fs.empty()) throw Error(ErrorKind::arity, "need at least one variable");
  require_independent_symmetric(space, fs);
  LevyResult out;
  double big_sum = 0.0;
  for (std::size_t w = 0; w < space.size(); ++w) {
    double s = 0.0;
    double top = 0.0;
    for (const auto& f : fs) {
      s += f[w];
      top = std::max(top, std::abs(f[w]));
    }
    if (top > level) out.lhs += space.weight(w);
    if (std::abs(s) > level) big_sum += space.weight(w);
  }
  out.rhs = 2.0 * big_sum;
  out.holds = out.lhs <= out.rhs + 1e-12;
  return out;
}

LevyResult levy_check(std::span<const SymmetricDistribution> laws, double level) {
  const auto [space, fs] = product_space(laws);
  return levy_check(space, fs, level);
}

KhintchineResult khintchine_square_check(std::span<const double> a) {
  const std::size_t m = a.size();
  if (m == 0) throw Error(ErrorKind::arity, "empty coefficient vector");
  if (m > kMaxKhintchineLength) throw Error(ErrorKind::scale, "at most 20 coefficients can be enumerated");
  // The sum is even in the signs, so fix r_1 = +1.
  const std::uint64_t patterns = std::uint64_t{1} << (m - 1);
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    double s = a[0];
    for (std::size_t i = 1; i < m; ++i) s += ((mask >> (i - 1)) & 1) ? -a[i] : a[i];
    total += std::abs(s);
  }
  KhintchineResult out;
  out.mean_abs = total / static_cast<double>(patterns);
  double sq = 0.0;
  for (double v : a) sq += v * v;
  out.upper = std::sqrt(sq);
  out.lower = out.upper / kKhintchine;
  const double tol = 1e-12 * std::max(1.0, out.upper);
  out.holds = out.mean_abs >= out.lower - tol && out.mean_abs <= out.upper + tol;
  return out;
}

SquareFunctionResult square_function_check(const AtomSpace& space, std::span<const L1Fun> fs) {
  if (fs.empty()) throw Error(ErrorKind::arity, "need at least one function");
  require_independent_symmetric(space, fs);
  std::vector<double> square(space.size(), 0.0);
  std::vector<double> sum(space.size(), 0.0);
  for (const auto& f : fs) {
    for (std::size_t w = 0; w < space.size(); ++w) {
      square[w] += f[w] * f[w];
      sum[w] += f[w];
    }
  }
  for (double& v : square) v = std::sqrt(v);
  SquareFunctionResult out;
  out.square = weighted_norm(space, square, Norm::l1);
  out.sum = weighted_norm(space, sum, Norm::l1);
  const double tol = 1e-12 * std::max(1.0, out.square);
  out.holds = out.square / kKhintchine <= out.sum + tol && out.sum <= out.square + tol;
  return out;
}

}  // namespace bdlab
