#pragma once

// Dense bounded revised simplex for the small convex programs this library
// builds (minimisation over l1 spheres, lattice-bound programs, projection
// constants).  Rows are given sparsely; the basis inverse is kept dense.

#include <cstddef>
#include <limits>
#include <vector>

namespace bdlab::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Sense { less_equal, equal, greater_equal };
enum class Status { optimal, infeasible, unbounded };

const char* to_string(Status status) noexcept;

struct Term {
  std::size_t var;
  double coeff;
};

struct Row {
  std::vector<Term> terms;
  Sense sense;
  double rhs;
};

/// minimise c.x subject to rows and lower <= x <= upper.
class Problem {
 public:
  explicit Problem(std::size_t num_vars = 0);

  std::size_t add_variable(double cost = 0.0, double lower = 0.0, double upper = kInfinity);
  void set_cost(std::size_t var, double cost);
  void set_bounds(std::size_t var, double lower, double upper);
  std::size_t add_row(std::vector<Term> terms, Sense sense, double rhs);
  /// Dense convenience overload; zero coefficients are dropped.
  std::size_t add_dense_row(const std::vector<double>& coeffs, Sense sense, double rhs);

  std::size_t num_vars() const noexcept { return cost_.size(); }
  std::size_t num_rows() const noexcept { return rows_.size(); }
  double cost(std::size_t var) const { return cost_.at(var); }
  double lower(std::size_t var) const { return lower_.at(var); }
  double upper(std::size_t var) const { return upper_.at(var); }
  const std::vector<Row>& rows() const noexcept { return rows_; }

  double objective_at(const std::vector<double>& x) const;
  /// Largest violation of any row or bound at x.
  double max_violation(const std::vector<double>& x) const;

 private:
  std::vector<double> cost_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<Row> rows_;
};

struct Options {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  std::size_t max_iterations = 2'000'000;
  std::size_t refactor_interval = 100;
  /// Consecutive degenerate pivots before switching to Bland's rule.
  std::size_t bland_after = 50;
};

struct Solution {
  Status status = Status::infeasible;
  std::vector<double> x;
  double objective = 0.0;
  /// Row multipliers y of the final basis; reduced costs are c - A^T y.
  std::vector<double> duals;
  std::size_t iterations = 0;
  double max_violation = 0.0;
};

/// Throws Error(malformed_problem) on NaN/inf data or inconsistent bounds.
Solution solve(const Problem& problem, const Options& options = {});

}  // namespace bdlab::lp
