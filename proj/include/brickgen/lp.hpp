#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace brickgen::lp {

/// min cost'x  s.t.  A x = rhs,  x >= 0.  A is stored as (row, col, value) triplets.
class LinearProgram {
 public:
  int add_column(double cost, std::string name = {});
  int add_row(double rhs, std::string name = {});
  void add_entry(int row, int col, double value);

  int num_rows() const { return static_cast<int>(rhs_.size()); }
  int num_cols() const { return static_cast<int>(cost_.size()); }
  const std::vector<double>& cost() const { return cost_; }
  const std::vector<double>& rhs() const { return rhs_; }

  struct Entry {
    int row;
    int col;
    double value;
  };
  const std::vector<Entry>& entries() const { return entries_; }
  const std::string& column_name(int c) const { return col_names_[c]; }
  const std::string& row_name(int r) const { return row_names_[r]; }

  /// CPLEX LP text, readable by external solvers for cross-checks.
  void write_lp_format(std::ostream& out) const;

 private:
  std::vector<double> cost_;
  std::vector<double> rhs_;
  std::vector<Entry> entries_;
  std::vector<std::string> col_names_;
  std::vector<std::string> row_names_;
};

enum class Status { optimal, iteration_limit, numerical_failure };
const char* to_string(Status s);

struct Options {
  double tolerance = 1e-9;  // relative primal and dual residuals, relative complementarity
  int max_iterations = 200;
  double primal_regularization = 1e-8;
  double step_factor = 0.99;  // fraction of the distance to the boundary
};

struct Solution {
  Status status = Status::numerical_failure;
  std::vector<double> x;  // primal
  std::vector<double> y;  // row duals
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;  // x'z / (1 + |c'x|)
};

/// Mehrotra predictor-corrector interior-point method on the regularized
/// normal equations (sparse LDLT with AMD ordering). Deterministic for a given program.
/// Returns the best iterate seen; status says whether it met the tolerance.
Solution solve(const LinearProgram& program, const Options& options = {});

}  // namespace brickgen::lp
