#include "bdlab/dichotomy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "bdlab/error.hpp"

namespace bdlab {

namespace {

void require_disjoint(std::size_t atoms, std::span<const AtomSet> sets, const char* what) {
  std::vector<char> seen(atoms, 0);
  for (const auto& s : sets) {
    for (std::size_t a : s.indices()) {
      if (a >= atoms) throw Error(ErrorKind::index_range, std::string(what) + " index out of range");
      if (seen[a]) throw Error(ErrorKind::contract, std::string(what) + " are not pairwise disjoint");
      seen[a] = 1;
    }
  }
}

}  // namespace

FamilyCheck check_family(const AtomSpace& space, const DisjointFamily& family) {
  FamilyCheck check;
  std::vector<char> seen(space.size(), 0);
  check.min_restricted = family.pieces.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  for (const auto& piece : family.pieces) {
    require_same_size(space, piece.f, "family member");
    for (std::size_t a : piece.support.indices()) {
      if (a >= space.size()) throw Error(ErrorKind::index_range, "family support out of range");
      if (seen[a]) check.disjoint = false;
      seen[a] = 1;
    }
    check.min_restricted = std::min(check.min_restricted, restrict_norm(space, piece.f, piece.support));
  }
  check.ok = check.disjoint && (family.pieces.empty() || check.min_restricted >= family.delta - kTolerance);
  return check;
}

std::size_t escape_steps(double epsilon, std::size_t n, std::size_t* floor_value) {
  if (!(epsilon > 0.0) || n == 0) throw Error(ErrorKind::parameter, "need eps > 0 and n >= 1");
  const double nn = static_cast<double>(n);
  const auto floor_n = static_cast<std::size_t>(std::floor(4.0 * nn * nn / epsilon + 1e-9));
  const auto per_index = static_cast<std::size_t>(std::ceil(2.0 * nn / epsilon - 1e-9));
  if (floor_value) *floor_value = floor_n;
  return std::max(floor_n, n * per_index + 1);
}

EscapeResult greedy_escape(const FiniteOperator& op, double epsilon, std::size_t n, std::uint64_t cap) {
  std::size_t floor_n = 0;
  const std::size_t steps = escape_steps(epsilon, n, &floor_n);
  require_enumerable(op.domain(), cap);
  const double norm = operator_norm(op, {.mode = NormMode::exact, .cap = cap}).value;
  if (norm > 1.0 + kTolerance) {
    throw Error(ErrorKind::contract, "greedy_escape needs ||T|| <= 1, got " + std::to_string(norm));
  }

  const auto& space = op.range();
  const std::size_t atoms = op.num_atoms();
  EscapeTrace trace;
  trace.floor_steps = floor_n;
  trace.steps = steps;
  trace.bumped = steps != floor_n;

  L1Fun join = L1Fun::zeros(atoms);
  std::vector<L1Fun> images;
  std::vector<std::vector<double>> excess;  // (|Tx_i| - join_{i-1})^+
  for (std::size_t i = 0; i < steps; ++i) {
    const auto best = verify_lattice_bound(op, join.values, {.cap = cap});
    if (best.worst_excess <= epsilon) {
      trace.outcome = "lattice-bound";
      LatticeBoundCert cert;
      cert.mass = weighted_norm(space, join, Norm::l1);
      cert.bound = join;
      cert.epsilon = epsilon;
      cert.worst_excess = best.worst_excess;
      cert.witness = best.witness;
      cert.passed = true;
      cert.exhaustive = true;
      return {std::move(cert), std::move(trace)};
    }
    L1Fun image = apply(op, best.witness);
    std::vector<double> e(atoms, 0.0);
    std::vector<std::size_t> region;
    for (std::size_t w = 0; w < atoms; ++w) {
      const double v = std::abs(image[w]);
      if (v > join[w]) {
        region.push_back(w);
        e[w] = v - join[w];
      }
    }
    for (std::size_t w = 0; w < atoms; ++w) join[w] = std::max(join[w], std::abs(image[w]));
    trace.points.push_back(best.witness);
    trace.gains.push_back(best.worst_excess);
    trace.regions.emplace_back(std::move(region));
    images.push_back(std::move(image));
    excess.push_back(std::move(e));
  }

  // Chain N = i_1 > i_2 > ... with small cross-excess on earlier regions.
  const double budget = epsilon / (2.0 * static_cast<double>(n));
  auto cross = [&](std::size_t i, std::size_t r) {
    double s = 0.0;
    for (std::size_t w : trace.regions[r].indices()) s += space.weight(w) * excess[i][w];
    return s;
  };
  trace.chain.push_back(steps - 1);
  trace.cross_excess.push_back({});
  for (std::size_t i = steps - 1; i-- > 0 && trace.chain.size() < n;) {
    std::vector<double> row;
    bool ok = true;
    for (std::size_t r : trace.chain) {
      row.push_back(cross(i, r));
      if (row.back() >= budget) {
        ok = false;
        break;
      }
    }
    if (ok) {
      trace.chain.push_back(i);
      trace.cross_excess.push_back(std::move(row));
    }
  }
  if (trace.chain.size() < n) {
    std::ostringstream msg;
    msg << "chain selection found " << trace.chain.size() << " of " << n << " indices after " << steps
        << " steps; gains:";
    for (double g : trace.gains) msg << ' ' << g;
    throw Error(ErrorKind::internal_invariant, msg.str());
  }

  DisjointFamily family;
  family.delta = epsilon / 2.0;
  std::vector<char> used(atoms, 0);
  for (std::size_t idx : trace.chain) {
    std::vector<std::size_t> own;
    for (std::size_t w : trace.regions[idx].indices()) {
      if (!used[w]) own.push_back(w);
    }
    for (std::size_t w : trace.regions[idx].indices()) used[w] = 1;
    family.pieces.push_back({images[idx], AtomSet(std::move(own))});
  }
  const auto check = check_family(space, family);
  if (!check.ok) {
    throw Error(ErrorKind::internal_invariant,
                "extracted family fails its invariants (min restricted norm " +
                    std::to_string(check.min_restricted) + ")");
  }
  trace.outcome = "disjoint-family";
  return {std::move(family), std::move(trace)};
}

std::vector<std::vector<double>> overlap_matrix(const AtomSpace& space, std::span<const L1Fun> fs,
                                                std::span<const AtomSet> sets) {
  if (fs.size() != sets.size()) throw Error(ErrorKind::dimension, "functions and sets differ in count");
  const std::size_t n = fs.size();
  std::vector<std::vector<double>> alpha(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) alpha[i][j] = restrict_norm(space, fs[i], sets[j]);
    }
  }
  return alpha;
}

SelectionResult rosenthal_select(const AtomSpace& space, std::span<const L1Fun> fs,
                                 std::span<const AtomSet> sets, double delta, std::size_t k,
                                 std::uint64_t seed) {
  const std::size_t n = fs.size();
  if (!(delta > 0.0) || k == 0) throw Error(ErrorKind::contract, "need delta > 0 and k >= 1");
  if (sets.size() != n) throw Error(ErrorKind::contract, "one set per function is required");
  const auto needed = static_cast<std::size_t>(std::floor(10.0 / delta)) * k;
  if (n < needed || n < 2 * k) {
    throw Error(ErrorKind::contract, "need at least " + std::to_string(std::max(needed, 2 * k)) +
                                         " functions, got " + std::to_string(n));
  }
  if (k > kMaxEquivalenceSize) throw Error(ErrorKind::scale, "k exceeds the equivalence LP limit");
  require_disjoint(space.size(), sets, "sets");
  for (std::size_t i = 0; i < n; ++i) {
    require_same_size(space, fs[i], "function");
    if (weighted_norm(space, fs[i], Norm::l1) > 1.0 + kTolerance) {
      throw Error(ErrorKind::contract, "function " + std::to_string(i) + " is outside the unit ball");
    }
    if (restrict_norm(space, fs[i], sets[i]) < delta - kTolerance) {
      throw Error(ErrorKind::contract, "function " + std::to_string(i) + " is below delta on its set");
    }
  }

  const auto alpha = overlap_matrix(space, fs, sets);
  const double mean_threshold = 4.0 * static_cast<double>(k) / static_cast<double>(n - 1);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);

  for (std::size_t round = 1; round <= kMaxSelectionRounds; ++round) {
    for (std::size_t i = 0; i < 2 * k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    std::vector<std::size_t> subset(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(2 * k));
    std::sort(subset.begin(), subset.end());
    std::vector<std::pair<double, std::size_t>> sums;
    double total = 0.0;
    for (std::size_t i : subset) {
      double s = 0.0;
      for (std::size_t j : subset) s += alpha[i][j];
      sums.emplace_back(s, i);
      total += s;
    }
    if (total / static_cast<double>(2 * k) > mean_threshold) continue;
    std::stable_sort(sums.begin(), sums.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < k; ++i) chosen.push_back(sums[i].second);
    std::sort(chosen.begin(), chosen.end());
    std::vector<double> row_sums;
    bool ok = true;
    for (std::size_t i : chosen) {
      double s = 0.0;
      for (std::size_t j : chosen) s += alpha[i][j];
      row_sums.push_back(s);
      ok = ok && s <= delta / 2.0 + kTolerance;
    }
    if (!ok) continue;

    std::vector<L1Fun> picked;
    for (std::size_t i : chosen) picked.push_back(fs[i]);
    SelectionResult result{chosen, row_sums, l1_equivalence(space, picked), round, seed};
    if (result.cert.lower < delta / 2.0 - 1e-7) {
      throw Error(ErrorKind::internal_invariant,
                  "selected functions have lower constant " + std::to_string(result.cert.lower));
    }
    return result;
  }
  throw Error(ErrorKind::retry_exhausted, "no admissible subset after " + std::to_string(kMaxSelectionRounds) +
                                              " rounds (seed " + std::to_string(seed) + ")");
}

ConflictBound conflict_bound(const AtomSpace& space, const DisjointFamily& family,
                             std::span<const double> bound, double epsilon_prime) {
  require_same_size(space, bound, "bound");
  ConflictBound out;
  std::vector<AtomSet> sets;
  for (const auto& piece : family.pieces) {
    require_same_size(space, piece.f, "family member");
    sets.push_back(piece.support);
    out.worst_excess = std::max(out.worst_excess, pos_excess(space, piece.f, bound));
    for (std::size_t w : piece.support.indices()) {
      out.certified += space.weight(w) * std::min(std::abs(piece.f[w]), bound[w]);
    }
  }
  require_disjoint(space.size(), sets, "family supports");
  out.precondition_held = out.worst_excess <= epsilon_prime + kTolerance;
  out.closed_form = static_cast<double>(family.pieces.size()) * (family.delta - epsilon_prime);
  return out;
}

}  // namespace bdlab
