#include "bdlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bdlab/error.hpp"

namespace bdlab {

AtomSpace::AtomSpace(MeasureKind kind, std::vector<double> weights)
    : kind_(kind), weights_(std::move(weights)) {
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw Error(ErrorKind::contract, "atom weights must be finite and positive");
    }
  }
  if (kind_ == MeasureKind::probability) {
    double total = 0.0;
    for (double w : weights_) total += w;
    if (std::abs(total - 1.0) > 1e-12) {
      throw Error(ErrorKind::contract, "probability weights sum to " + std::to_string(total));
    }
  } else if (std::any_of(weights_.begin(), weights_.end(), [](double w) { return w != 1.0; })) {
    throw Error(ErrorKind::contract, "counting measure requires unit weights");
  }
}

AtomSpace AtomSpace::counting(std::size_t n) {
  return AtomSpace(MeasureKind::counting, std::vector<double>(n, 1.0));
}

AtomSpace AtomSpace::uniform(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::contract, "uniform probability space needs atoms");
  return AtomSpace(MeasureKind::probability, std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

AtomSpace AtomSpace::probability(std::vector<double> weights) {
  return AtomSpace(MeasureKind::probability, std::move(weights));
}

AtomSet::AtomSet(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
    throw Error(ErrorKind::contract, "atom set contains duplicate indices");
  }
}

bool AtomSet::contains(std::size_t atom) const {
  return std::binary_search(indices_.begin(), indices_.end(), atom);
}

void require_same_size(const AtomSpace& space, std::span<const double> f, const char* what) {
  if (f.size() != space.size()) {
    throw Error(ErrorKind::dimension, std::string(what) + " has " + std::to_string(f.size()) +
                                          " values but the space has " +
                                          std::to_string(space.size()) + " atoms");
  }
}

double weighted_norm(const AtomSpace& space, std::span<const double> f, Norm p) {
  require_same_size(space, f, "function");
  const auto w = space.weights();
  double acc = 0.0;
  switch (p) {
    case Norm::l1:
      for (std::size_t i = 0; i < f.size(); ++i) acc += w[i] * std::abs(f[i]);
      return acc;
    case Norm::l2:
      for (std::size_t i = 0; i < f.size(); ++i) acc += w[i] * f[i] * f[i];
      return std::sqrt(acc);
    case Norm::linf:
      for (double v : f) acc = std::max(acc, std::abs(v));
      return acc;
  }
  return acc;
}

double pos_excess(const AtomSpace& space, std::span<const double> f, std::span<const double> g) {
  require_same_size(space, f, "function");
  require_same_size(space, g, "bound");
  const auto w = space.weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (g[i] < 0.0) throw Error(ErrorKind::invalid_bound, "bound has a negative entry");
    const double e = std::abs(f[i]) - g[i];
    if (e > 0.0) acc += w[i] * e;
  }
  return acc;
}

L1Fun abs_join(std::span<const L1Fun> fs) {
  if (fs.empty()) throw Error(ErrorKind::arity, "abs_join needs at least one function");
  L1Fun out = L1Fun::zeros(fs.front().size());
  for (const auto& f : fs) {
    if (f.size() != out.size()) throw Error(ErrorKind::dimension, "abs_join length mismatch");
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::max(out[i], std::abs(f[i]));
  }
  return out;
}

double restrict_norm(const AtomSpace& space, std::span<const double> f, const AtomSet& set) {
  require_same_size(space, f, "function");
  double acc = 0.0;
  for (std::size_t atom : set.indices()) {
    if (atom >= space.size()) {
      throw Error(ErrorKind::index_range, "atom " + std::to_string(atom) + " out of range");
    }
    acc += space.weight(atom) * std::abs(f[atom]);
  }
  return acc;
}

}  // namespace bdlab
