#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace vmot::lp {

struct Entry {
  std::size_t row;
  double value;
};

// min c^T x  subject to  A x = b,  x >= 0, with A stored column-wise.
class LinearProgram {
 public:
  explicit LinearProgram(std::size_t rows) : rhs_(rows, 0.0) {}

  std::size_t add_column(double cost, std::span<const Entry> entries);
  void set_rhs(std::size_t row, double value) { rhs_[row] = value; }
  void set_cost(std::size_t col, double value) { costs_[col] = value; }

  std::size_t rows() const noexcept { return rhs_.size(); }
  std::size_t cols() const noexcept { return costs_.size(); }
  std::size_t nonzeros() const noexcept { return values_.size(); }
  double rhs(std::size_t row) const { return rhs_[row]; }
  double cost(std::size_t col) const { return costs_[col]; }
  std::span<const double> costs() const noexcept { return costs_; }
  std::span<const double> rhs() const noexcept { return rhs_; }

  std::span<const std::size_t> column_rows(std::size_t col) const {
    return {row_index_.data() + start_[col], start_[col + 1] - start_[col]};
  }
  std::span<const double> column_values(std::size_t col) const {
    return {values_.data() + start_[col], start_[col + 1] - start_[col]};
  }
  double column_dot(std::size_t col, std::span<const double> y) const;

 private:
  std::vector<double> rhs_;
  std::vector<double> costs_;
  std::vector<std::size_t> start_{0};
  std::vector<std::size_t> row_index_;
  std::vector<double> values_;
};

enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };
const char* to_string(Status s);

struct Options {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-10;
  double pivot_tol = 1e-9;
  std::size_t max_iterations = 2'000'000;
  // Basis reinversion period; the explicit inverse is rank-one updated between.
  std::size_t refactor_interval = 128;
  // Consecutive degenerate pivots after which pricing falls back to Bland's
  // rule until the next nondegenerate step.
  std::size_t degenerate_streak_for_bland = 32;
  bool phase_one_only = false;
};

struct Solution {
  Status status = Status::kIterationLimit;
  double objective = 0.0;
  std::vector<double> primal;  // size cols()
  std::vector<double> duals;   // size rows(); A^T y <= c at optimality
  // Basic column per row; values >= cols() denote the artificial of row
  // (value - cols()), kept only on redundant rows.
  std::vector<std::size_t> basis;
  std::size_t iterations = 0;
  std::size_t redundant_rows = 0;
  double phase_one_infeasibility = 0.0;
};

// Two-phase revised primal simplex with a dense explicit basis inverse.
// Pricing is Dantzig's rule with smallest-index tie breaking; runs of
// degenerate pivots switch to Bland's rule so the method terminates.
Solution solve(const LinearProgram& lp, const Options& options = {});

struct ExactCheck {
  bool primal_feasible = false;
  bool dual_feasible = false;
  double objective = 0.0;
  double max_primal_error = 0.0;  // |double primal - exact primal|
};

// Re-solves the final basis in rational arithmetic. The double inputs are
// taken as exact binary fractions, so the verdict is exact for the LP as
// stored. Intended for small problems only.
ExactCheck check_basis_exact(const LinearProgram& lp, const Solution& solution);

}  // namespace vmot::lp
