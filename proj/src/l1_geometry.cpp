#include "bdlab/l1_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "bdlab/error.hpp"
#include "bdlab/lp.hpp"
#include "bdlab/parallel.hpp"

namespace bdlab {

namespace {

struct OrthantResult {
  double value;
  std::vector<double> weights;  // nonnegative magnitudes, sum 1
};

OrthantResult minimise_in_orthant(const AtomSpace& space, std::span<const L1Fun> fs,
                                  std::span<const int> signs, std::span<const std::size_t> support) {
  const std::size_t k = fs.size();
  lp::Problem p(k);
  std::vector<lp::Term> simplex;
  for (std::size_t i = 0; i < k; ++i) simplex.push_back({i, 1.0});
  p.add_row(std::move(simplex), lp::Sense::equal, 1.0);
  for (std::size_t atom : support) {
    const double w = space.weight(atom);
    const std::size_t pos = p.add_variable(w);
    const std::size_t neg = p.add_variable(w);
    std::vector<lp::Term> row;
    for (std::size_t i = 0; i < k; ++i) {
      const double v = signs[i] * fs[i][atom];
      if (v != 0.0) row.push_back({i, v});
    }
    row.push_back({pos, -1.0});
    row.push_back({neg, 1.0});
    p.add_row(std::move(row), lp::Sense::equal, 0.0);
  }
  const auto sol = lp::solve(p);
  if (sol.status != lp::Status::optimal) {
    throw Error(ErrorKind::internal_invariant, "orthant LP not optimal");
  }
  return {sol.objective, std::vector<double>(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(k))};
}

}  // namespace

L1EquivalenceCert l1_equivalence(const AtomSpace& space, std::span<const L1Fun> fs) {
  if (fs.empty()) throw Error(ErrorKind::arity, "l1_equivalence needs at least one function");
  if (fs.size() > kMaxEquivalenceSize) {
    throw Error(ErrorKind::scale, "l1_equivalence is limited to " +
                                      std::to_string(kMaxEquivalenceSize) + " functions");
  }
  const std::size_t k = fs.size();
  L1EquivalenceCert cert;
  std::vector<std::size_t> support;
  for (std::size_t atom = 0; atom < space.size(); ++atom) {
    bool any = false;
    for (const auto& f : fs) {
      require_same_size(space, f, "function");
      any = any || f[atom] != 0.0;
    }
    if (any) support.push_back(atom);
  }
  for (const auto& f : fs) cert.upper = std::max(cert.upper, weighted_norm(space, f, Norm::l1));

  const std::uint64_t orthants = std::uint64_t{1} << (k - 1);
  const std::size_t chunks = plan_chunks(orthants, 8);
  std::vector<std::pair<double, std::uint64_t>> best(chunks, {std::numeric_limits<double>::infinity(), 0});
  std::vector<std::vector<double>> best_weights(chunks);
  auto signs_of = [k](std::uint64_t code) {
    std::vector<int> s(k, 1);
    for (std::size_t i = 1; i < k; ++i) s[i] = ((code >> (k - 1 - i)) & 1) ? -1 : 1;
    return s;
  };
  run_chunks(orthants, chunks, [&](std::size_t c, std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t code = begin; code < end; ++code) {
      const auto s = signs_of(code);
      auto r = minimise_in_orthant(space, fs, s, support);
      if (r.value < best[c].first - 1e-12) {
        best[c] = {r.value, code};
        best_weights[c] = std::move(r.weights);
      }
    }
  });
  std::size_t winner = 0;
  for (std::size_t c = 1; c < chunks; ++c) {
    if (best[c].first < best[winner].first - 1e-12) winner = c;
  }
  cert.orthant = signs_of(best[winner].second);
  cert.minimizer.resize(k);
  for (std::size_t i = 0; i < k; ++i) cert.minimizer[i] = cert.orthant[i] * best_weights[winner][i];
  // Report the norm of the actual minimiser rather than the LP objective.
  L1Fun combo = L1Fun::zeros(space.size());
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t a = 0; a < space.size(); ++a) combo[a] += cert.minimizer[i] * fs[i][a];
  }
  cert.lower = weighted_norm(space, combo, Norm::l1);
  return cert;
}

ExcessResult verify_lattice_bound(const FiniteOperator& op, std::span<const double> bound,
                                  const VerifyOptions& options) {
  require_same_size(op.range(), bound, "lattice bound");
  for (double v : bound) {
    if (v < 0.0) throw Error(ErrorKind::invalid_bound, "lattice bound has a negative entry");
  }
  const auto& shape = op.domain();
  const std::uint64_t count = shape.extreme_point_count();
  ExcessResult result;
  if (count <= options.cap) {
    const std::size_t chunks = plan_chunks(count, 4096);
    std::vector<std::pair<double, std::uint64_t>> best(chunks, {-1.0, 0});
    run_chunks(count, chunks, [&](std::size_t c, std::uint64_t begin, std::uint64_t end) {
      std::vector<double> image(op.num_atoms());
      for (std::uint64_t k = begin; k < end; ++k) {
        apply_into(op, extreme_point_at(shape, k), image);
        const double e = pos_excess(op.range(), image, bound);
        if (e > best[c].first) best[c] = {e, k};
      }
    });
    std::pair<double, std::uint64_t> overall{-1.0, 0};
    for (const auto& b : best) {
      if (b.first > overall.first) overall = b;
    }
    result.worst_excess = overall.first;
    result.witness = extreme_point_at(shape, overall.second);
    result.exhaustive = true;
    return result;
  }
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::uint64_t> pick(0, count - 1);
  std::vector<double> image(op.num_atoms());
  result.worst_excess = -1.0;
  for (std::size_t s = 0; s < std::max<std::size_t>(1, options.samples); ++s) {
    const auto x = extreme_point_at(shape, pick(rng));
    apply_into(op, x, image);
    const double e = pos_excess(op.range(), image, bound);
    if (e > result.worst_excess) {
      result.worst_excess = e;
      result.witness = x;
    }
  }
  result.exhaustive = false;
  return result;
}

LatticeBoundCert certify_lattice_bound(const FiniteOperator& op, L1Fun bound, double epsilon,
                                       const VerifyOptions& options) {
  if (epsilon < 0.0) throw Error(ErrorKind::parameter, "epsilon must be nonnegative");
  const auto check = verify_lattice_bound(op, bound, options);
  LatticeBoundCert cert;
  cert.mass = weighted_norm(op.range(), bound, Norm::l1);
  cert.bound = std::move(bound);
  cert.epsilon = epsilon;
  cert.worst_excess = check.worst_excess;
  cert.witness = check.witness;
  cert.exhaustive = check.exhaustive;
  cert.passed = check.worst_excess <= epsilon + 1e-6;
  return cert;
}

LatticeBoundCert min_approx_lattice_bound(const FiniteOperator& op, double epsilon, std::uint64_t cap) {
  if (epsilon < 0.0) throw Error(ErrorKind::parameter, "epsilon must be nonnegative");
  const auto& shape = op.domain();
  require_enumerable(shape, cap);
  const std::size_t atoms = op.num_atoms();

  // |T(-x)| = |Tx|: one representative per sign pair (first block sign +1).
  std::vector<std::vector<double>> images;
  const std::uint64_t count = shape.extreme_point_count();
  std::vector<double> image(atoms);
  for (std::uint64_t k = 0; k < count; ++k) {
    const auto x = extreme_point_at(shape, k);
    if (x.choices[0].sign < 0) continue;
    apply_into(op, x, image);
    for (auto& v : image) v = std::abs(v);
    images.push_back(image);
  }
  std::sort(images.begin(), images.end());
  images.erase(std::unique(images.begin(), images.end()), images.end());

  // Drop |Tx| dominated pointwise by another |Tx'|; its constraint is implied.
  const auto& space = op.range();
  std::stable_sort(images.begin(), images.end(), [&](const auto& a, const auto& b) {
    return weighted_norm(space, a, Norm::l1) > weighted_norm(space, b, Norm::l1);
  });
  std::vector<std::vector<double>> kept;
  if (images.size() <= 20000) {
    for (auto& v : images) {
      const bool dominated = std::any_of(kept.begin(), kept.end(), [&](const auto& u) {
        for (std::size_t a = 0; a < atoms; ++a) {
          if (v[a] > u[a]) return false;
        }
        return true;
      });
      if (!dominated) kept.push_back(std::move(v));
    }
  } else {
    kept = std::move(images);
  }

  lp::Problem p(atoms);
  for (std::size_t a = 0; a < atoms; ++a) p.set_cost(a, space.weight(a));
  for (const auto& v : kept) {
    if (weighted_norm(space, v, Norm::l1) <= epsilon) continue;  // satisfied by g = 0
    std::vector<lp::Term> budget;
    for (std::size_t a = 0; a < atoms; ++a) {
      if (v[a] <= 0.0) continue;
      const std::size_t u = p.add_variable(0.0);
      p.add_row({{u, 1.0}, {a, 1.0}}, lp::Sense::greater_equal, v[a]);
      budget.push_back({u, space.weight(a)});
    }
    p.add_row(std::move(budget), lp::Sense::less_equal, epsilon);
  }
  L1Fun g = L1Fun::zeros(atoms);
  if (p.num_rows() > 0) {
    const auto sol = lp::solve(p);
    if (sol.status != lp::Status::optimal) {
      throw Error(ErrorKind::internal_invariant, "lattice-bound LP not optimal");
    }
    for (std::size_t a = 0; a < atoms; ++a) g[a] = std::max(0.0, sol.x[a]);
  }
  return certify_lattice_bound(op, std::move(g), epsilon, VerifyOptions{cap, 0, 0});
}

double default_eta(std::span<const double> bound) {
  double top = 0.0;
  for (double v : bound) top = std::max(top, v);
  return top > 0.0 ? 1e-9 * top : 1e-9;
}

ExactFactorization lattice_factorize_exact(const FiniteOperator& op, std::span<const double> bound,
                                           double eta) {
  if (!(eta > 0.0)) throw Error(ErrorKind::parameter, "eta must be positive");
  const auto check = verify_lattice_bound(op, bound);
  if (check.worst_excess > kTolerance) {
    throw Error(ErrorKind::precondition,
                "bound is not an exact lattice bound (excess " + std::to_string(check.worst_excess) + ")");
  }
  const std::size_t atoms = op.num_atoms();
  const auto& space = op.range();
  ExactFactorization f;
  f.eta = eta;
  f.multiplier = L1Fun::zeros(atoms);
  for (std::size_t a = 0; a < atoms; ++a) f.multiplier[a] = bound[a] + eta;
  f.b_norm = weighted_norm(space, f.multiplier, Norm::l1);
  for (std::size_t c = 0; c < op.num_columns(); ++c) {
    const auto col = op.column(c);
    L1Fun q = L1Fun::zeros(atoms);
    for (std::size_t a = 0; a < atoms; ++a) q[a] = col[a] / f.multiplier[a];
    double err = 0.0;
    for (std::size_t a = 0; a < atoms; ++a) err = std::max(err, std::abs(f.multiplier[a] * q[a] - col[a]));
    f.residual = std::max(f.residual, err);
    f.bounded_columns.push_back(std::move(q));
  }
  // ||A|| = max_w sup_x |Tx(w)| / g'(w), and sup_x |Tx(w)| = sum_i max_j |T_ij(w)|.
  const auto& shape = op.domain();
  for (std::size_t a = 0; a < atoms; ++a) {
    double peak = 0.0;
    for (std::size_t i = 0; i < shape.num_blocks(); ++i) {
      double m = 0.0;
      for (std::size_t j = 0; j < shape.block_size(i); ++j) m = std::max(m, std::abs(op.column(i, j)[a]));
      peak += m;
    }
    f.a_norm = std::max(f.a_norm, peak / f.multiplier[a]);
  }
  return f;
}

ApproxFactorization lattice_factorize_approx(const FiniteOperator& op, const L1Fun& bound, double epsilon) {
  if (op.domain().num_blocks() != 1) {
    throw Error(ErrorKind::contract, "clamped factorization needs a single l1 block domain");
  }
  if (epsilon < 0.0) throw Error(ErrorKind::parameter, "epsilon must be nonnegative");
  const auto& space = op.range();
  require_same_size(space, bound, "lattice bound");
  std::vector<L1Fun> cols;
  std::vector<double> deviations;
  for (std::size_t c = 0; c < op.num_columns(); ++c) {
    const auto col = op.column(c);
    const double excess = pos_excess(space, col, bound);
    if (excess > epsilon + kTolerance) {
      throw Error(ErrorKind::precondition, "column " + std::to_string(c) + " has excess " +
                                               std::to_string(excess) + " > epsilon");
    }
    L1Fun s = L1Fun::zeros(op.num_atoms());
    L1Fun diff = L1Fun::zeros(op.num_atoms());
    for (std::size_t a = 0; a < op.num_atoms(); ++a) {
      s[a] = std::max(std::min(col[a], bound[a]), -bound[a]);
      diff[a] = col[a] - s[a];
    }
    deviations.push_back(weighted_norm(space, diff, Norm::l1));
    cols.push_back(std::move(s));
  }
  FiniteOperator clamped(op.domain(), space, std::move(cols));
  const double distance = *std::max_element(deviations.begin(), deviations.end());
  if (distance > epsilon + kTolerance) {
    throw Error(ErrorKind::internal_invariant, "clamped operator is farther than epsilon");
  }
  auto cert = certify_lattice_bound(clamped, bound, 0.0);
  if (cert.worst_excess > kTolerance) {
    throw Error(ErrorKind::internal_invariant, "clamped operator escapes its bound");
  }
  return ApproxFactorization{std::move(clamped), std::move(deviations), distance, std::move(cert)};
}

}  // namespace bdlab
