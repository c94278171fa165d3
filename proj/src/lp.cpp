#include "bdlab/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bdlab/error.hpp"

namespace bdlab::lp {

const char* to_string(Status status) noexcept {
  switch (status) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
  }
  return "unknown";
}

Problem::Problem(std::size_t num_vars)
    : cost_(num_vars, 0.0), lower_(num_vars, 0.0), upper_(num_vars, kInfinity) {}

std::size_t Problem::add_variable(double cost, double lower, double upper) {
  cost_.push_back(cost);
  lower_.push_back(lower);
  upper_.push_back(upper);
  return cost_.size() - 1;
}

void Problem::set_cost(std::size_t var, double cost) { cost_.at(var) = cost; }

void Problem::set_bounds(std::size_t var, double lower, double upper) {
  lower_.at(var) = lower;
  upper_.at(var) = upper;
}

std::size_t Problem::add_row(std::vector<Term> terms, Sense sense, double rhs) {
  for (const auto& t : terms) {
    if (t.var >= num_vars()) {
      throw Error(ErrorKind::malformed_problem, "row references unknown variable " + std::to_string(t.var));
    }
  }
  rows_.push_back(Row{std::move(terms), sense, rhs});
  return rows_.size() - 1;
}

std::size_t Problem::add_dense_row(const std::vector<double>& coeffs, Sense sense, double rhs) {
  if (coeffs.size() != num_vars()) {
    throw Error(ErrorKind::malformed_problem, "dense row length differs from variable count");
  }
  std::vector<Term> terms;
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    if (coeffs[j] != 0.0) terms.push_back({j, coeffs[j]});
  }
  return add_row(std::move(terms), sense, rhs);
}

double Problem::objective_at(const std::vector<double>& x) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < num_vars(); ++j) acc += cost_[j] * x[j];
  return acc;
}

double Problem::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < num_vars(); ++j) {
    worst = std::max(worst, lower_[j] - x[j]);
    worst = std::max(worst, x[j] - upper_[j]);
  }
  for (const auto& row : rows_) {
    double a = 0.0;
    for (const auto& t : row.terms) a += t.coeff * x[t.var];
    switch (row.sense) {
      case Sense::less_equal: worst = std::max(worst, a - row.rhs); break;
      case Sense::greater_equal: worst = std::max(worst, row.rhs - a); break;
      case Sense::equal: worst = std::max(worst, std::abs(a - row.rhs)); break;
    }
  }
  return worst;
}

namespace {

void validate(const Problem& p) {
  auto bad = [](double v) { return !std::isfinite(v); };
  for (std::size_t j = 0; j < p.num_vars(); ++j) {
    if (bad(p.cost(j))) throw Error(ErrorKind::malformed_problem, "non-finite objective coefficient");
    const double lo = p.lower(j);
    const double up = p.upper(j);
    if (std::isnan(lo) || std::isnan(up) || lo == kInfinity || up == -kInfinity || lo > up) {
      throw Error(ErrorKind::malformed_problem, "inconsistent bounds on variable " + std::to_string(j));
    }
  }
  for (const auto& row : p.rows()) {
    if (bad(row.rhs)) throw Error(ErrorKind::malformed_problem, "non-finite right-hand side");
    for (const auto& t : row.terms) {
      if (bad(t.coeff)) throw Error(ErrorKind::malformed_problem, "non-finite constraint coefficient");
    }
  }
}

enum class VarState : unsigned char { basic, at_lower, at_upper, at_zero };

class Simplex {
 public:
  Simplex(const Problem& p, const Options& o) : problem_(p), opt_(o) { build(); }

  Solution run() {
    Solution sol;
    // Phase 1: drive artificials to zero.
    std::vector<double> phase1(num_cols_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) phase1[first_artificial_ + i] = 1.0;
    cost_ = phase1;
    iterate(sol.iterations);
    refactor();
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < m_; ++i) infeasibility += x_[first_artificial_ + i];
    double scale = 1.0;
    for (double b : rhs_) scale = std::max(scale, std::abs(b));
    if (infeasibility > 1e-8 * scale) {
      sol.status = Status::infeasible;
      return sol;
    }
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t a = first_artificial_ + i;
      upper_[a] = 0.0;
      if (state_[a] != VarState::basic) {
        state_[a] = VarState::at_lower;
        x_[a] = 0.0;
      }
    }
    // Phase 2.
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (std::size_t j = 0; j < n_; ++j) cost_[j] = problem_.cost(j);
    const bool bounded = iterate(sol.iterations);
    refactor();
    if (!bounded) {
      sol.status = Status::unbounded;
      return sol;
    }
    sol.status = Status::optimal;
    sol.x.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
    for (std::size_t j = 0; j < n_; ++j) {
      sol.x[j] = std::clamp(sol.x[j], problem_.lower(j), problem_.upper(j));
    }
    sol.objective = problem_.objective_at(sol.x);
    compute_duals();
    sol.duals = y_;
    sol.max_violation = problem_.max_violation(sol.x);
    return sol;
  }

 private:
  void build() {
    n_ = problem_.num_vars();
    m_ = problem_.num_rows();
    const auto& rows = problem_.rows();
    std::size_t slacks = 0;
    for (const auto& r : rows) slacks += r.sense != Sense::equal ? 1 : 0;
    first_artificial_ = n_ + slacks;
    num_cols_ = first_artificial_ + m_;

    // Column-compressed copy of [A | slacks | artificials].
    std::vector<std::vector<std::pair<std::size_t, double>>> cols(num_cols_);
    rhs_.resize(m_);
    std::size_t slack = n_;
    lower_.assign(num_cols_, 0.0);
    upper_.assign(num_cols_, kInfinity);
    for (std::size_t j = 0; j < n_; ++j) {
      lower_[j] = problem_.lower(j);
      upper_[j] = problem_.upper(j);
    }
    for (std::size_t i = 0; i < m_; ++i) {
      rhs_[i] = rows[i].rhs;
      for (const auto& t : rows[i].terms) cols[t.var].push_back({i, t.coeff});
      if (rows[i].sense == Sense::less_equal) cols[slack++].push_back({i, 1.0});
      if (rows[i].sense == Sense::greater_equal) cols[slack++].push_back({i, -1.0});
    }
    // Merge duplicate terms within a column.
    for (std::size_t j = 0; j < first_artificial_; ++j) {
      auto& c = cols[j];
      std::stable_sort(c.begin(), c.end(), [](auto& a, auto& b) { return a.first < b.first; });
      std::vector<std::pair<std::size_t, double>> merged;
      for (const auto& e : c) {
        if (!merged.empty() && merged.back().first == e.first) merged.back().second += e.second;
        else merged.push_back(e);
      }
      c = std::move(merged);
    }

    x_.assign(num_cols_, 0.0);
    state_.assign(num_cols_, VarState::at_lower);
    for (std::size_t j = 0; j < first_artificial_; ++j) {
      if (std::isfinite(lower_[j])) {
        x_[j] = lower_[j];
        state_[j] = VarState::at_lower;
      } else if (std::isfinite(upper_[j])) {
        x_[j] = upper_[j];
        state_[j] = VarState::at_upper;
      } else {
        x_[j] = 0.0;
        state_[j] = VarState::at_zero;
      }
    }
    std::vector<double> residual = rhs_;
    for (std::size_t j = 0; j < first_artificial_; ++j) {
      if (x_[j] == 0.0) continue;
      for (const auto& [i, v] : cols[j]) residual[i] -= v * x_[j];
    }
    head_.resize(m_);
    binv_.assign(m_ * m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const double sign = residual[i] >= 0.0 ? 1.0 : -1.0;
      const std::size_t a = first_artificial_ + i;
      cols[a].push_back({i, sign});
      x_[a] = std::abs(residual[i]);
      state_[a] = VarState::basic;
      head_[i] = a;
      binv_[i * m_ + i] = sign;
    }

    col_start_.assign(num_cols_ + 1, 0);
    for (std::size_t j = 0; j < num_cols_; ++j) col_start_[j + 1] = col_start_[j] + cols[j].size();
    col_row_.reserve(col_start_.back());
    col_val_.reserve(col_start_.back());
    for (const auto& c : cols) {
      for (const auto& [i, v] : c) {
        col_row_.push_back(i);
        col_val_.push_back(v);
      }
    }
    cost_.assign(num_cols_, 0.0);
    y_.assign(m_, 0.0);
    w_.assign(m_, 0.0);
  }

  void compute_duals() {
    std::fill(y_.begin(), y_.end(), 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost_[head_[i]];
      if (cb == 0.0) continue;
      const double* row = &binv_[i * m_];
      for (std::size_t k = 0; k < m_; ++k) y_[k] += cb * row[k];
    }
  }

  double reduced_cost(std::size_t j) const {
    double d = cost_[j];
    for (std::size_t p = col_start_[j]; p < col_start_[j + 1]; ++p) d -= y_[col_row_[p]] * col_val_[p];
    return d;
  }

  void ftran(std::size_t j) {
    std::fill(w_.begin(), w_.end(), 0.0);
    for (std::size_t p = col_start_[j]; p < col_start_[j + 1]; ++p) {
      const std::size_t k = col_row_[p];
      const double v = col_val_[p];
      for (std::size_t i = 0; i < m_; ++i) w_[i] += binv_[i * m_ + k] * v;
    }
  }

  /// Rebuilds the basis inverse from scratch and recomputes basic values.
  void refactor() {
    std::vector<double> basis(m_ * m_, 0.0);
    for (std::size_t c = 0; c < m_; ++c) {
      const std::size_t j = head_[c];
      for (std::size_t p = col_start_[j]; p < col_start_[j + 1]; ++p) basis[col_row_[p] * m_ + c] = col_val_[p];
    }
    std::vector<double> inv(m_ * m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) inv[i * m_ + i] = 1.0;
    for (std::size_t col = 0; col < m_; ++col) {
      std::size_t piv = col;
      double best = std::abs(basis[col * m_ + col]);
      for (std::size_t r = col + 1; r < m_; ++r) {
        const double v = std::abs(basis[r * m_ + col]);
        if (v > best) {
          best = v;
          piv = r;
        }
      }
      if (best < 1e-13) throw Error(ErrorKind::internal_invariant, "simplex basis became singular");
      if (piv != col) {
        std::swap_ranges(basis.begin() + static_cast<std::ptrdiff_t>(piv * m_),
                         basis.begin() + static_cast<std::ptrdiff_t>((piv + 1) * m_),
                         basis.begin() + static_cast<std::ptrdiff_t>(col * m_));
        std::swap_ranges(inv.begin() + static_cast<std::ptrdiff_t>(piv * m_),
                         inv.begin() + static_cast<std::ptrdiff_t>((piv + 1) * m_),
                         inv.begin() + static_cast<std::ptrdiff_t>(col * m_));
      }
      const double d = basis[col * m_ + col];
      for (std::size_t k = 0; k < m_; ++k) {
        basis[col * m_ + k] /= d;
        inv[col * m_ + k] /= d;
      }
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == col) continue;
        const double f = basis[r * m_ + col];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < m_; ++k) {
          basis[r * m_ + k] -= f * basis[col * m_ + k];
          inv[r * m_ + k] -= f * inv[col * m_ + k];
        }
      }
    }
    binv_ = std::move(inv);

    std::vector<double> r = rhs_;
    for (std::size_t j = 0; j < num_cols_; ++j) {
      if (state_[j] == VarState::basic || x_[j] == 0.0) continue;
      for (std::size_t p = col_start_[j]; p < col_start_[j + 1]; ++p) r[col_row_[p]] -= col_val_[p] * x_[j];
    }
    for (std::size_t i = 0; i < m_; ++i) {
      double v = 0.0;
      for (std::size_t k = 0; k < m_; ++k) v += binv_[i * m_ + k] * r[k];
      x_[head_[i]] = v;
    }
  }

  /// Returns false when the objective is unbounded below.
  bool iterate(std::size_t& iterations) {
    std::size_t since_refactor = 0;
    std::size_t degenerate_run = 0;
    const double ftol = opt_.feasibility_tol;
    for (;;) {
      if (iterations >= opt_.max_iterations) {
        throw Error(ErrorKind::internal_invariant, "simplex iteration limit reached");
      }
      if (since_refactor >= opt_.refactor_interval) {
        refactor();
        since_refactor = 0;
      }
      const bool bland = degenerate_run >= opt_.bland_after;
      compute_duals();

      std::size_t entering = num_cols_;
      double best = 0.0;
      for (std::size_t j = 0; j < num_cols_; ++j) {
        const VarState s = state_[j];
        if (s == VarState::basic || lower_[j] == upper_[j]) continue;
        const double d = reduced_cost(j);
        const bool eligible = (s == VarState::at_lower && d < -opt_.optimality_tol) ||
                              (s == VarState::at_upper && d > opt_.optimality_tol) ||
                              (s == VarState::at_zero && std::abs(d) > opt_.optimality_tol);
        if (!eligible) continue;
        if (bland) {
          entering = j;
          best = d;
          break;
        }
        if (std::abs(d) > std::abs(best)) {
          best = d;
          entering = j;
        }
      }
      if (entering == num_cols_) return true;

      const double dir = best < 0.0 ? 1.0 : -1.0;
      ftran(entering);

      // Harris two-pass ratio test.  Basic value i moves at rate -dir*w_i.
      // Tiny pivots are skipped unless nothing else blocks the step.
      std::size_t leave_row = m_;
      double step = 0.0;
      bool to_lower = false;
      double relaxed = 0.0;
      for (const double ptol : {1e-7, 1e-11}) {
        relaxed = upper_[entering] - lower_[entering];
        for (std::size_t i = 0; i < m_; ++i) {
          const double rate = -dir * w_[i];
          const std::size_t b = head_[i];
          if (rate < -ptol && std::isfinite(lower_[b])) {
            relaxed = std::min(relaxed, (x_[b] - lower_[b] + ftol) / -rate);
          } else if (rate > ptol && std::isfinite(upper_[b])) {
            relaxed = std::min(relaxed, (upper_[b] - x_[b] + ftol) / rate);
          }
        }
        if (!std::isfinite(relaxed)) continue;
        double pivot_size = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
          const double rate = -dir * w_[i];
          const std::size_t b = head_[i];
          double ratio = 0.0;
          bool hits_lower = false;
          if (rate < -ptol && std::isfinite(lower_[b])) {
            ratio = std::max(0.0, (x_[b] - lower_[b]) / -rate);
            hits_lower = true;
          } else if (rate > ptol && std::isfinite(upper_[b])) {
            ratio = std::max(0.0, (upper_[b] - x_[b]) / rate);
          } else {
            continue;
          }
          if (ratio > relaxed) continue;
          bool take = false;
          if (leave_row == m_) {
            take = true;
          } else if (bland) {
            take = ratio < step - 1e-12 || (ratio <= step + 1e-12 && std::abs(w_[i]) > 10.0 * pivot_size) ||
                   (ratio <= step + 1e-12 && std::abs(w_[i]) >= pivot_size && b < head_[leave_row]);
          } else {
            take = std::abs(w_[i]) > pivot_size;
          }
          if (take) {
            leave_row = i;
            step = ratio;
            to_lower = hits_lower;
            pivot_size = std::abs(w_[i]);
          }
        }
        break;
      }
      if (!std::isfinite(relaxed)) return false;

      const double flip = upper_[entering] - lower_[entering];
      ++iterations;
      ++since_refactor;
      if (leave_row == m_ || flip <= step) {
        // Bound flip of the entering variable; basis unchanged.
        const double t = flip;
        for (std::size_t i = 0; i < m_; ++i) x_[head_[i]] -= dir * t * w_[i];
        if (state_[entering] == VarState::at_lower) {
          state_[entering] = VarState::at_upper;
          x_[entering] = upper_[entering];
        } else {
          state_[entering] = VarState::at_lower;
          x_[entering] = lower_[entering];
        }
        degenerate_run = 0;
        continue;
      }

      degenerate_run = step <= 1e-12 ? degenerate_run + 1 : 0;
      for (std::size_t i = 0; i < m_; ++i) x_[head_[i]] -= dir * step * w_[i];
      x_[entering] += dir * step;
      const std::size_t leaving = head_[leave_row];
      x_[leaving] = to_lower ? lower_[leaving] : upper_[leaving];
      state_[leaving] = to_lower ? VarState::at_lower : VarState::at_upper;
      state_[entering] = VarState::basic;
      head_[leave_row] = entering;

      const double pivot = w_[leave_row];
      // Refactor soon after a small pivot before its error spreads.
      if (std::abs(pivot) < 1e-5) since_refactor = opt_.refactor_interval;
      double* prow = &binv_[leave_row * m_];
      for (std::size_t k = 0; k < m_; ++k) prow[k] /= pivot;
      for (std::size_t i = 0; i < m_; ++i) {
        if (i == leave_row || w_[i] == 0.0) continue;
        const double f = w_[i];
        double* row = &binv_[i * m_];
        for (std::size_t k = 0; k < m_; ++k) row[k] -= f * prow[k];
      }
    }
  }

  const Problem& problem_;
  Options opt_;
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::size_t first_artificial_ = 0;
  std::size_t num_cols_ = 0;
  std::vector<std::size_t> col_start_;
  std::vector<std::size_t> col_row_;
  std::vector<double> col_val_;
  std::vector<double> rhs_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> cost_;
  std::vector<double> x_;
  std::vector<VarState> state_;
  std::vector<std::size_t> head_;
  std::vector<double> binv_;
  std::vector<double> y_;
  std::vector<double> w_;
};

}  // namespace

Solution solve(const Problem& problem, const Options& options) {
  validate(problem);
  Simplex simplex(problem, options);
  return simplex.run();
}

}  // namespace bdlab::lp
