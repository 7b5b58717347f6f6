#include "radarnav/assignment.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace radarnav {

AssignmentResult solve_linear_assignment(const Eigen::MatrixXd& cost) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  if (rows > cols) throw std::invalid_argument("solve_linear_assignment: more rows than columns");
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      if (std::isnan(cost(i, j)) || cost(i, j) == -std::numeric_limits<double>::infinity())
        throw std::invalid_argument("solve_linear_assignment: NaN or -inf cost");

  AssignmentResult result;
  if (rows == 0) return result;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is a virtual source.
  std::vector<double> u(static_cast<std::size_t>(rows) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(cols) + 1, 0.0);
  std::vector<int> owner(static_cast<std::size_t>(cols) + 1, 0);  // row matched to column
  std::vector<int> way(static_cast<std::size_t>(cols) + 1, 0);

  for (int i = 1; i <= rows; ++i) {
    owner[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(cols) + 1, kInf);
    std::vector<char> used(static_cast<std::size_t>(cols) + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = owner[j0];
      double delta = kInf;
      int j1 = -1;
      for (int j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double c = cost(i0 - 1, j - 1);
        if (std::isfinite(c)) {
          const double reduced = c - u[i0] - v[j];
          if (reduced < minv[j]) {
            minv[j] = reduced;
            way[j] = j0;
          }
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      if (j1 < 0) throw std::invalid_argument("solve_linear_assignment: no feasible assignment");
      for (int j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else if (std::isfinite(minv[j])) {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    // augment along the alternating path
    do {
      const int j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  result.row_to_col.assign(static_cast<std::size_t>(rows), -1);
  for (int j = 1; j <= cols; ++j)
    if (owner[j] != 0) result.row_to_col[owner[j] - 1] = j - 1;
  for (int i = 0; i < rows; ++i) result.total_cost += cost(i, result.row_to_col[i]);
  return result;
}

}  // namespace radarnav
