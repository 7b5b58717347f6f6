#pragma once

#include <vector>

#include <Eigen/Core>

namespace radarnav {

struct AssignmentResult {
  std::vector<int> row_to_col;  // one column per row
  double total_cost = 0.0;
};

/// Minimum-cost assignment of every row to a distinct column (Hungarian method
/// with row/column potentials, O(rows^2 * cols)). Requires rows <= cols.
/// Entries may be +infinity (forbidden pairs); throws std::invalid_argument if
/// no finite complete assignment exists or an entry is NaN / -infinity.
AssignmentResult solve_linear_assignment(const Eigen::MatrixXd& cost);

}  // namespace radarnav
