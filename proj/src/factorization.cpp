#include "bdlab/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "bdlab/error.hpp"
#include "bdlab/lp.hpp"

namespace bdlab {

namespace {

L1Fun image_of(const FiniteOperator& op, const Coefficients& z) {
  if (z.size() != op.num_columns()) throw Error(ErrorKind::dimension, "coefficient vector length mismatch");
  return apply(op, std::span<const double>(z));
}

std::size_t gram_rank(const AtomSpace& space, std::span<const L1Fun> hs) {
  const std::size_t k = hs.size();
  std::vector<std::vector<double>> g(k, std::vector<double>(k, 0.0));
  double scale = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      for (std::size_t w = 0; w < space.size(); ++w) g[a][b] += space.weight(w) * hs[a][w] * hs[b][w];
    }
    scale = std::max(scale, g[a][a]);
  }
  if (scale == 0.0) return 0;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < k && rank < k; ++c) {
    std::size_t p = rank;
    for (std::size_t r = rank; r < k; ++r) {
      if (std::abs(g[r][c]) > std::abs(g[p][c])) p = r;
    }
    if (std::abs(g[p][c]) <= 1e-10 * scale) continue;
    std::swap(g[p], g[rank]);
    for (std::size_t r = rank + 1; r < k; ++r) {
      const double f = g[r][c] / g[rank][c];
      for (std::size_t cc = c; cc < k; ++cc) g[r][cc] -= f * g[rank][cc];
    }
    ++rank;
  }
  return rank;
}

}  // namespace

JamesResult james_improve(const FiniteOperator& op, std::span<const Coefficients> ys, std::size_t k,
                          std::size_t r, double delta) {
  if (k == 0 || r == 0 || !(delta > 0.0)) throw Error(ErrorKind::parameter, "need k, r >= 1 and delta > 0");
  std::size_t expected = 1;
  for (std::size_t i = 0; i < r; ++i) {
    if (expected > ys.size()) break;
    expected *= k;
  }
  if (expected != ys.size()) {
    throw Error(ErrorKind::parameter, "expected k^r vectors, got " + std::to_string(ys.size()));
  }
  if (ys.size() > kMaxEquivalenceSize) {
    throw Error(ErrorKind::scale, "the precondition check is limited to " +
                                      std::to_string(kMaxEquivalenceSize) + " vectors");
  }
  std::vector<Coefficients> current(ys.begin(), ys.end());
  std::vector<L1Fun> images;
  for (const auto& y : current) {
    images.push_back(image_of(op, y));
    if (op.domain().norm(y) > 1.0 + kTolerance) throw Error(ErrorKind::contract, "vector outside the unit ball");
  }
  const double alpha = l1_equivalence(op.range(), images).lower;
  if (alpha < delta / 2.0 - kTolerance) {
    throw Error(ErrorKind::contract, "images have lower constant " + std::to_string(alpha) + " < delta/2");
  }

  JamesResult result;
  result.threshold = std::pow(2.0 / delta, 1.0 / static_cast<double>(r));
  for (std::size_t level = 0; level < r; ++level) {
    const std::size_t tuples = current.size() / k;
    std::vector<Coefficients> next;
    std::vector<L1Fun> next_images;
    result.level_ratios.emplace_back();
    for (std::size_t t = 0; t < tuples; ++t) {
      const std::span<const L1Fun> group(images.data() + t * k, k);
      auto cert = l1_equivalence(op.range(), group);
      result.level_ratios.back().push_back(cert.ratio());
      if (cert.ratio() <= result.threshold * (1.0 + 1e-12)) {
        result.blocks.assign(current.begin() + static_cast<std::ptrdiff_t>(t * k),
                             current.begin() + static_cast<std::ptrdiff_t>((t + 1) * k));
        result.cert = std::move(cert);
        result.level = level;
        result.tuple = t;
        return result;
      }
      Coefficients block(op.num_columns(), 0.0);
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t c = 0; c < block.size(); ++c) block[c] += cert.minimizer[i] * current[t * k + i][c];
      }
      next_images.push_back(image_of(op, block));
      next.push_back(std::move(block));
    }
    current = std::move(next);
    images = std::move(next_images);
  }
  std::ostringstream msg;
  msg << "no tuple reached ratio " << result.threshold << " in " << r << " levels; ratios:";
  for (const auto& lv : result.level_ratios) {
    msg << " [";
    for (double v : lv) msg << ' ' << v;
    msg << " ]";
  }
  throw Error(ErrorKind::internal_invariant, msg.str());
}

ProjectionCert min_projection(const AtomSpace& space, std::span<const L1Fun> hs) {
  const std::size_t k = hs.size();
  if (k == 0) throw Error(ErrorKind::arity, "min_projection needs at least one function");
  if (k > kMaxProjectionRank) throw Error(ErrorKind::scale, "min_projection is limited to rank 8");
  for (const auto& h : hs) require_same_size(space, h, "spanning function");
  std::vector<std::size_t> support;
  for (std::size_t w = 0; w < space.size(); ++w) {
    if (std::any_of(hs.begin(), hs.end(), [w](const L1Fun& h) { return h[w] != 0.0; })) support.push_back(w);
  }
  if (support.size() > kMaxProjectionAtoms) {
    throw Error(ErrorKind::scale, "min_projection is limited to 200 support atoms");
  }
  if (gram_rank(space, hs) < k) throw Error(ErrorKind::rank, "spanning functions are linearly dependent");

  const std::size_t n = support.size();
  lp::Problem p;
  auto phi = [n](std::size_t j, std::size_t s) { return j * n + s; };
  for (std::size_t v = 0; v < k * n; ++v) p.add_variable(0.0, -lp::kInfinity, lp::kInfinity);
  const std::size_t t = p.add_variable(1.0);
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<lp::Term> budget;
    for (std::size_t s2 = 0; s2 < n; ++s2) {
      const std::size_t pos = p.add_variable();
      const std::size_t neg = p.add_variable();
      std::vector<lp::Term> row;
      for (std::size_t j = 0; j < k; ++j) {
        const double h = hs[j][support[s2]];
        if (h != 0.0) row.push_back({phi(j, s), h});
      }
      row.push_back({pos, -1.0});
      row.push_back({neg, 1.0});
      p.add_row(std::move(row), lp::Sense::equal, 0.0);
      const double w = space.weight(support[s2]);
      budget.push_back({pos, w});
      budget.push_back({neg, w});
    }
    budget.push_back({t, -1.0});
    p.add_row(std::move(budget), lp::Sense::less_equal, 0.0);
  }
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<lp::Term> row;
      for (std::size_t s = 0; s < n; ++s) {
        const double v = space.weight(support[s]) * hs[i][support[s]];
        if (v != 0.0) row.push_back({phi(j, s), v});
      }
      p.add_row(std::move(row), lp::Sense::equal, i == j ? 1.0 : 0.0);
    }
  }
  const auto sol = lp::solve(p);
  if (sol.status != lp::Status::optimal) throw Error(ErrorKind::internal_invariant, "projection LP not optimal");

  ProjectionCert cert;
  cert.lp_value = sol.objective;
  for (std::size_t j = 0; j < k; ++j) {
    L1Fun f = L1Fun::zeros(space.size());
    for (std::size_t s = 0; s < n; ++s) f[support[s]] = sol.x[phi(j, s)];
    cert.functionals.push_back(std::move(f));
  }
  for (std::size_t w = 0; w < space.size(); ++w) {
    double total = 0.0;
    for (std::size_t w2 = 0; w2 < space.size(); ++w2) {
      double v = 0.0;
      for (std::size_t j = 0; j < k; ++j) v += cert.functionals[j][w] * hs[j][w2];
      total += space.weight(w2) * std::abs(v);
    }
    cert.norm = std::max(cert.norm, total);
  }
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < k; ++i) {
      double v = 0.0;
      for (std::size_t w = 0; w < space.size(); ++w) v += space.weight(w) * cert.functionals[j][w] * hs[i][w];
      cert.biorthogonality_residual = std::max(cert.biorthogonality_residual, std::abs(v - (i == j ? 1.0 : 0.0)));
    }
  }
  if (std::abs(cert.norm - cert.lp_value) > 1e-6 || cert.biorthogonality_residual > 1e-7) {
    throw Error(ErrorKind::internal_invariant, "projection certificate does not re-verify");
  }
  return cert;
}

double dor_bound(double lambda) {
  if (!(lambda > 0.0) || lambda * lambda >= 2.0) {
    throw Error(ErrorKind::precondition, "projection bound needs 0 < lambda < sqrt(2)");
  }
  return 1.0 / (2.0 / (lambda * lambda) - 1.0);
}

FactorizationCert build_l1_factorization(const FiniteOperator& op, std::span<const Coefficients> zs,
                                         double lambda, double delta) {
  if (!(lambda * lambda < 2.0)) throw Error(ErrorKind::precondition, "distortion must be below sqrt(2)");
  if (!(delta > 0.0)) throw Error(ErrorKind::parameter, "delta must be positive");
  if (zs.empty()) throw Error(ErrorKind::arity, "need at least one block");
  FactorizationCert cert;
  cert.k = zs.size();
  cert.lambda = lambda;
  std::vector<L1Fun> images;
  for (const auto& z : zs) images.push_back(image_of(op, z));
  const auto equiv = l1_equivalence(op.range(), images);
  cert.measured_ratio = equiv.ratio();
  if (cert.measured_ratio > lambda + kTolerance) {
    throw Error(ErrorKind::precondition, "measured distortion " + std::to_string(cert.measured_ratio) +
                                             " exceeds lambda");
  }
  const auto proj = min_projection(op.range(), images);
  cert.projection_norm = proj.norm;

  const auto& space = op.range();
  for (const auto& z : zs) {
    cert.a_columns.push_back(z);
    cert.a_norm = std::max(cert.a_norm, op.domain().norm(z));
  }
  for (std::size_t j = 0; j < cert.k; ++j) {
    std::vector<double> row(space.size());
    for (std::size_t w = 0; w < space.size(); ++w) row[w] = space.weight(w) * proj.functionals[j][w];
    cert.b_rows.push_back(std::move(row));
  }
  for (std::size_t w = 0; w < space.size(); ++w) {
    double total = 0.0;
    for (std::size_t j = 0; j < cert.k; ++j) total += std::abs(proj.functionals[j][w]);
    cert.b_norm = std::max(cert.b_norm, total);
  }
  for (std::size_t j = 0; j < cert.k; ++j) {
    double err = 0.0;
    for (std::size_t i = 0; i < cert.k; ++i) {
      double v = 0.0;
      for (std::size_t w = 0; w < space.size(); ++w) v += cert.b_rows[i][w] * images[j][w];
      err += std::abs(v - (i == j ? 1.0 : 0.0));
    }
    cert.residual = std::max(cert.residual, err);
  }
  if (cert.residual > 1e-6) throw Error(ErrorKind::internal_invariant, "B T A differs from the identity");
  cert.product_bound = 2.0 * lambda / delta * dor_bound(lambda);
  return cert;
}

double pi2_upper_sym(const FiniteOperator& op, const Pi2Options& options) {
  if (op.range().kind() != MeasureKind::probability && !options.allow_counting) {
    throw Error(ErrorKind::contract, "the L2 estimate needs a probability range");
  }
  if (!op.symmetric_entries() && !options.assume_symmetric) {
    throw Error(ErrorKind::contract, "entries are not asserted to form a symmetric sequence");
  }
  const auto& shape = op.domain();
  double total = 0.0;
  for (std::size_t i = 0; i < shape.num_blocks(); ++i) {
    double best = 0.0;
    for (std::size_t j = 0; j < shape.block_size(i); ++j) {
      best = std::max(best, std::pow(weighted_norm(op.range(), op.column(i, j), Norm::l2), 2));
    }
    total += best;
  }
  return std::sqrt(total);
}

Pi2Estimate pi2_groth(const FiniteOperator& op, const NormOptions& norm, double grothendieck) {
  if (!(grothendieck >= 1.0)) throw Error(ErrorKind::parameter, "Grothendieck constant must be >= 1");
  const auto r = operator_norm(op, norm);
  return {grothendieck * r.value, r.lower_bound};
}

namespace {

// Squared weak-2 norm: max over blocks and sign vectors of sum_s <z_s, rho>^2.
double weak_norm_squared(const DomainShape& shape, const Family& family) {
  double best = 0.0;
  std::vector<double> dots(family.size());
  for (std::size_t i = 0; i < shape.num_blocks(); ++i) {
    const std::size_t b = shape.block_size(i);
    const std::size_t off = shape.offset(i);
    // rho_0 = +1 without loss: the expression is even in rho.
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (b - 1)); ++mask) {
      double total = 0.0;
      for (std::size_t s = 0; s < family.size(); ++s) {
        double d = family[s][off];
        for (std::size_t j = 1; j < b; ++j) d += ((mask >> (j - 1)) & 1) ? -family[s][off + j] : family[s][off + j];
        total += d * d;
      }
      best = std::max(best, total);
    }
  }
  return best;
}

void require_weak_enumerable(const DomainShape& shape, std::uint64_t cap) {
  std::uint64_t total = 0;
  for (std::size_t b : shape.blocks()) {
    if (b > 62) throw Error(ErrorKind::scale, "block too large for sign enumeration");
    total += std::uint64_t{1} << (b - 1);
    if (total > cap) throw Error(ErrorKind::scale, "sign enumeration exceeds the cap");
  }
}

}  // namespace

Pi2Lower pi2_ratio(const FiniteOperator& op, const Family& family, std::uint64_t cap) {
  if (family.empty()) throw Error(ErrorKind::arity, "empty family");
  require_weak_enumerable(op.domain(), cap);
  Pi2Lower out;
  double num = 0.0;
  for (const auto& z : family) num += std::pow(weighted_norm(op.range(), image_of(op, z), Norm::l1), 2);
  out.numerator = std::sqrt(num);
  out.denominator = std::sqrt(weak_norm_squared(op.domain(), family));
  out.value = out.denominator > 0.0 ? out.numerator / out.denominator : 0.0;
  return out;
}

Pi2Lower pi2_lower(const FiniteOperator& op, std::span<const Family> families, std::uint64_t cap) {
  if (families.empty()) throw Error(ErrorKind::arity, "no families given");
  Pi2Lower best;
  best.value = -1.0;
  for (std::size_t f = 0; f < families.size(); ++f) {
    auto r = pi2_ratio(op, families[f], cap);
    if (r.value > best.value) {
      best = r;
      best.best = f;
    }
  }
  return best;
}

Pi2Lower pi2_lower_search(const FiniteOperator& op, const Pi2SearchOptions& options) {
  const auto& shape = op.domain();
  require_weak_enumerable(shape, kDefaultEnumerationCap);
  const std::size_t dim = op.num_columns();
  const std::size_t size = std::max<std::size_t>(1, options.family_size);
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_s(0, size - 1);
  std::uniform_int_distribution<std::size_t> pick_c(0, dim - 1);

  Pi2Lower best;
  for (std::size_t restart = 0; restart < std::max<std::size_t>(1, options.restarts); ++restart) {
    Family family(size, Coefficients(dim, 0.0));
    if (restart == 0 && shape.extreme_point_count() <= kDefaultEnumerationCap) {
      family[0] = operator_norm(op).witness.coefficients(shape);
    } else {
      for (auto& z : family) {
        for (auto& v : z) v = unit(rng);
      }
    }
    std::vector<L1Fun> images;
    std::vector<double> norms_sq;
    for (const auto& z : family) {
      images.push_back(image_of(op, z));
      norms_sq.push_back(std::pow(weighted_norm(op.range(), images.back(), Norm::l1), 2));
    }
    auto ratio = [&](double num_sq) {
      const double den = weak_norm_squared(shape, family);
      return den > 0.0 ? std::sqrt(num_sq / den) : 0.0;
    };
    double num_sq = 0.0;
    for (double v : norms_sq) num_sq += v;
    double current = ratio(num_sq);
    double step = 0.5;
    for (std::size_t it = 0; it < options.iterations; ++it) {
      const std::size_t s = pick_s(rng);
      const std::size_t c = pick_c(rng);
      const double d = step * unit(rng);
      family[s][c] += d;
      L1Fun moved = images[s];
      const auto col = op.column(c);
      for (std::size_t w = 0; w < moved.size(); ++w) moved[w] += d * col[w];
      const double moved_sq = std::pow(weighted_norm(op.range(), moved, Norm::l1), 2);
      const double candidate_sq = num_sq - norms_sq[s] + moved_sq;
      const double candidate = ratio(candidate_sq);
      if (candidate > current) {
        current = candidate;
        images[s] = std::move(moved);
        norms_sq[s] = moved_sq;
        num_sq = candidate_sq;
      } else {
        family[s][c] -= d;
        step = std::max(step * 0.995, 1e-3);
      }
    }
    // Report the ratio recomputed from scratch for the final family.
    const auto exact = pi2_ratio(op, family);
    if (exact.value > best.value) best = exact;
  }
  return best;
}

}  // namespace bdlab
