#include <doctest.h>

#include <limits>
#include <random>
#include <set>

#include "radarnav/assignment.hpp"
#include "radarnav/tracker.hpp"
#include "support.hpp"

using namespace radarnav;
using doctest::Approx;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CostMatrix layout(const Eigen::MatrixXd& association, const std::vector<double>& miss) {
  const int n = static_cast<int>(association.rows());
  const int m = static_cast<int>(association.cols());
  CostMatrix c{Eigen::MatrixXd::Constant(n, m + n, kInf), n, m};
  c.L.leftCols(m) = association;
  for (int i = 0; i < n; ++i) c.L(i, m + i) = miss[static_cast<std::size_t>(i)];
  return c;
}

}  // namespace

TEST_SUITE("assignment") {
  TEST_CASE("square problem with a known optimum") {
    Eigen::MatrixXd cost(3, 3);
    cost << 4, 1, 3, 2, 0, 5, 3, 2, 2;
    const auto r = solve_linear_assignment(cost);
    CHECK(r.total_cost == Approx(5.0));
    CHECK(r.row_to_col == std::vector<int>{1, 0, 2});
  }

  TEST_CASE("rectangular problem uses distinct columns") {
    Eigen::MatrixXd cost(2, 4);
    cost << 1, 1, 9, 9, 1, 1, 9, 9;
    const auto r = solve_linear_assignment(cost);
    CHECK(r.total_cost == Approx(2.0));
    CHECK(r.row_to_col[0] != r.row_to_col[1]);
  }

  TEST_CASE("forbidden entries are avoided") {
    Eigen::MatrixXd cost(2, 2);
    cost << 0, kInf, 0, 100;
    const auto r = solve_linear_assignment(cost);
    CHECK(r.row_to_col == std::vector<int>{0, 1});
    CHECK(r.total_cost == Approx(100.0));
  }

  TEST_CASE("invalid inputs are rejected") {
    Eigen::MatrixXd tall(3, 2);
    tall.setZero();
    CHECK_THROWS_AS(solve_linear_assignment(tall), std::invalid_argument);
    Eigen::MatrixXd blocked(2, 2);
    blocked << 1, kInf, 2, kInf;
    CHECK_THROWS_AS(solve_linear_assignment(blocked), std::invalid_argument);
    Eigen::MatrixXd nan(1, 1);
    nan << std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(solve_linear_assignment(nan), std::invalid_argument);
  }

  TEST_CASE("empty problem") {
    const auto r = solve_linear_assignment(Eigen::MatrixXd(0, 3));
    CHECK(r.row_to_col.empty());
    CHECK(r.total_cost == 0.0);
  }

  TEST_CASE("random matrices match brute force") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> size(1, 6);
    std::uniform_real_distribution<double> value(-5.0, 5.0);
    std::bernoulli_distribution forbidden(0.2);
    int checked = 0;
    for (int trial = 0; trial < 500; ++trial) {
      const int rows = size(rng);
      const int cols = std::uniform_int_distribution<int>(rows, 6)(rng);
      Eigen::MatrixXd cost(rows, cols);
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) cost(i, j) = forbidden(rng) ? kInf : value(rng);
      const double oracle = testing::brute_force_assignment(cost);
      if (!std::isfinite(oracle)) {
        CHECK_THROWS_AS(solve_linear_assignment(cost), std::invalid_argument);
        continue;
      }
      const auto r = solve_linear_assignment(cost);
      CHECK(r.total_cost == Approx(oracle).epsilon(1e-12));
      double sum = 0.0;
      std::set<int> used;
      for (int i = 0; i < rows; ++i) {
        sum += cost(i, r.row_to_col[static_cast<std::size_t>(i)]);
        used.insert(r.row_to_col[static_cast<std::size_t>(i)]);
      }
      CHECK(sum == Approx(r.total_cost));
      CHECK(used.size() == static_cast<std::size_t>(rows));
      ++checked;
    }
    CHECK(checked > 300);
  }

  TEST_CASE("tracker layout example: diagonal association wins") {
    Eigen::MatrixXd a(2, 2);
    a << 1, 2, 3, 1;
    const auto r = solve_assignment(layout(a, {10, 10}));
    CHECK(r.track_to_detection[0] == 0);
    CHECK(r.track_to_detection[1] == 1);
    CHECK(r.total_cost == Approx(2.0));
    CHECK(r.unassigned_detections.empty());
  }

  TEST_CASE("tracker layout: all gated means all misdetected") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Constant(3, 2, kInf);
    const auto r = solve_assignment(layout(a, {2.3, 2.3, 2.3}));
    for (const auto& t : r.track_to_detection) CHECK_FALSE(t.has_value());
    CHECK(r.unassigned_detections == std::vector<int>{0, 1});
    CHECK(r.total_cost == Approx(6.9));
  }

  TEST_CASE("tracker layout: an expensive association loses to a misdetection") {
    Eigen::MatrixXd a(1, 1);
    a << 5.0;
    const auto r = solve_assignment(layout(a, {2.3}));
    CHECK_FALSE(r.track_to_detection[0].has_value());
    CHECK(r.unassigned_detections == std::vector<int>{0});
    CHECK(r.total_cost == Approx(2.3));
  }

  TEST_CASE("tracker layout: no tracks leaves every detection unassigned") {
    const auto r = solve_assignment(layout(Eigen::MatrixXd(0, 3), {}));
    CHECK(r.unassigned_detections == std::vector<int>{0, 1, 2});
  }

  TEST_CASE("tracker layout matches brute force and never uses a gated pair") {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> size(0, 6);
    std::uniform_real_distribution<double> value(0.0, 8.0);
    std::bernoulli_distribution gated(0.3);
    for (int trial = 0; trial < 500; ++trial) {
      const int n = std::max(1, size(rng));
      const int m = size(rng);
      Eigen::MatrixXd a(n, m);
      std::vector<double> miss;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) a(i, j) = gated(rng) ? kInf : value(rng);
        miss.push_back(value(rng));
      }
      const auto r = solve_assignment(layout(a, miss));
      CHECK(r.total_cost == Approx(testing::brute_force_association(a, miss)).epsilon(1e-12));
      std::set<int> taken;
      for (int i = 0; i < n; ++i) {
        if (const auto j = r.track_to_detection[static_cast<std::size_t>(i)]) {
          CHECK(std::isfinite(a(i, *j)));
          CHECK(taken.insert(*j).second);
        }
      }
      CHECK(taken.size() + r.unassigned_detections.size() == static_cast<std::size_t>(m));
    }
  }
}
