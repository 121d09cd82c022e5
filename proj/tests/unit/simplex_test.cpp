#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include "vmot/simplex.hpp"

using namespace vmot::lp;

namespace {

struct Dense {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<double> a;  // row-major m x n
  std::vector<double> b;
  std::vector<double> c;

  LinearProgram program() const {
    LinearProgram lp(m);
    for (std::size_t r = 0; r < m; ++r) lp.set_rhs(r, b[r]);
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<Entry> col;
      for (std::size_t r = 0; r < m; ++r) {
        if (a[r * n + j] != 0.0) col.push_back({r, a[r * n + j]});
      }
      lp.add_column(c[j], col);
    }
    return lp;
  }
};

// Solve the square system on the chosen columns by Gaussian elimination with
// partial pivoting; nullopt when singular.
std::optional<std::vector<double>> basic_solution(const Dense& p,
                                                  const std::vector<std::size_t>& cols) {
  const std::size_t m = p.m;
  std::vector<double> mat(m * (m + 1));
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t k = 0; k < m; ++k) mat[r * (m + 1) + k] = p.a[r * p.n + cols[k]];
    mat[r * (m + 1) + m] = p.b[r];
  }
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < m; ++r) {
      if (std::abs(mat[r * (m + 1) + k]) > std::abs(mat[piv * (m + 1) + k])) piv = r;
    }
    if (std::abs(mat[piv * (m + 1) + k]) < 1e-10) return std::nullopt;
    for (std::size_t q = 0; q <= m; ++q) std::swap(mat[k * (m + 1) + q], mat[piv * (m + 1) + q]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == k) continue;
      const double f = mat[r * (m + 1) + k] / mat[k * (m + 1) + k];
      for (std::size_t q = k; q <= m; ++q) mat[r * (m + 1) + q] -= f * mat[k * (m + 1) + q];
    }
  }
  std::vector<double> x(m);
  for (std::size_t k = 0; k < m; ++k) x[k] = mat[k * (m + 1) + m] / mat[k * (m + 1) + k];
  return x;
}

// Best basic feasible solution over every column subset of size m (the
// optimum of a bounded feasible LP with full row rank is attained at one).
std::optional<double> enumerate_vertices(const Dense& p) {
  std::optional<double> best;
  std::vector<bool> pick(p.n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(p.m), true);
  do {
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < p.n; ++j) {
      if (pick[j]) cols.push_back(j);
    }
    const auto x = basic_solution(p, cols);
    if (!x) continue;
    bool feasible = true;
    double obj = 0.0;
    for (std::size_t k = 0; k < p.m; ++k) {
      feasible = feasible && (*x)[k] >= -1e-9;
      obj += p.c[cols[k]] * (*x)[k];
    }
    if (feasible && (!best || obj < *best)) best = obj;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

Dense random_lp(std::mt19937_64& rng, std::size_t m, std::size_t n) {
  std::uniform_int_distribution<int> coef(-4, 4);
  std::uniform_int_distribution<int> cost(0, 6);
  Dense p{m, n, std::vector<double>(m * n), std::vector<double>(m), std::vector<double>(n)};
  for (double& v : p.a) v = coef(rng);
  for (double& v : p.c) v = cost(rng);  // c >= 0 keeps the LP bounded below
  // Half the time make b = A x0 for a random x0 >= 0 so the LP is feasible.
  if (rng() % 2 == 0) {
    std::uniform_int_distribution<int> xs(0, 3);
    std::vector<double> x0(n);
    for (double& v : x0) v = xs(rng);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t j = 0; j < n; ++j) p.b[r] += p.a[r * n + j] * x0[j];
    }
  } else {
    for (double& v : p.b) v = coef(rng);
  }
  return p;
}

bool full_row_rank(const Dense& p) {
  std::vector<bool> pick(p.n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(p.m), true);
  do {
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < p.n; ++j) {
      if (pick[j]) cols.push_back(j);
    }
    if (basic_solution(p, cols)) return true;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return false;
}

}  // namespace

TEST(Simplex, SmallKnownProgram) {
  // min -x1 - 2 x2  s.t. x1 + x2 + s1 = 4, x1 + 3 x2 + s2 = 6.
  Dense p{2, 4, {1, 1, 1, 0, 1, 3, 0, 1}, {4, 6}, {-1, -2, 0, 0}};
  const Solution s = solve(p.program());
  ASSERT_EQ(s.status, Status::kOptimal);
  EXPECT_NEAR(s.objective, -5.0, 1e-12);
  EXPECT_NEAR(s.primal[0], 3.0, 1e-12);
  EXPECT_NEAR(s.primal[1], 1.0, 1e-12);
  EXPECT_NEAR(s.duals[0] * 4 + s.duals[1] * 6, -5.0, 1e-12);
  const ExactCheck ex = check_basis_exact(p.program(), s);
  EXPECT_TRUE(ex.primal_feasible);
  EXPECT_TRUE(ex.dual_feasible);
  EXPECT_DOUBLE_EQ(ex.objective, -5.0);
}

TEST(Simplex, DetectsInfeasibleAndUnbounded) {
  Dense inf{1, 2, {1, 1}, {-1}, {1, 1}};
  EXPECT_EQ(solve(inf.program()).status, Status::kInfeasible);
  Dense unb{1, 2, {1, -1}, {1}, {0, -1}};
  EXPECT_EQ(solve(unb.program()).status, Status::kUnbounded);
}

TEST(Simplex, RedundantRowsAreTolerated) {
  // Second row duplicates the first.
  Dense p{2, 3, {1, 1, 1, 1, 1, 1}, {1, 1}, {3, 1, 2}};
  const Solution s = solve(p.program());
  ASSERT_EQ(s.status, Status::kOptimal);
  EXPECT_NEAR(s.objective, 1.0, 1e-12);
  EXPECT_EQ(s.redundant_rows, 1u);
}

TEST(Simplex, DegenerateCyclingExample) {
  // Beale's example in equality form; Dantzig pricing cycles without a guard.
  Dense p{3, 7,
          {0.25, -60, -0.04, 9, 1, 0, 0,
           0.5, -90, -0.02, 3, 0, 1, 0,
           0, 0, 1, 0, 0, 0, 1},
          {0, 0, 1},
          {-0.75, 150, -0.02, 6, 0, 0, 0}};
  const Solution s = solve(p.program());
  ASSERT_EQ(s.status, Status::kOptimal);
  EXPECT_NEAR(s.objective, -0.05, 1e-12);
}

TEST(Simplex, MatchesVertexEnumeration) {
  std::mt19937_64 rng(1234);
  int optimal = 0;
  int infeasible = 0;
  for (int rep = 0; rep < 400; ++rep) {
    const std::size_t m = 1 + rep % 4;
    const std::size_t n = m + 1 + rep % 4;
    const Dense p = random_lp(rng, m, n);
    if (!full_row_rank(p)) continue;
    const auto expect = enumerate_vertices(p);
    const Solution s = solve(p.program());
    if (!expect) {
      EXPECT_EQ(s.status, Status::kInfeasible) << "rep " << rep;
      ++infeasible;
      continue;
    }
    ASSERT_EQ(s.status, Status::kOptimal) << "rep " << rep;
    ++optimal;
    EXPECT_NEAR(s.objective, *expect, 1e-8) << "rep " << rep;
    // Primal feasibility, dual feasibility and strong duality.
    for (std::size_t r = 0; r < m; ++r) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += p.a[r * n + j] * s.primal[j];
      EXPECT_NEAR(row, p.b[r], 1e-8);
    }
    double by = 0.0;
    for (std::size_t r = 0; r < m; ++r) by += p.b[r] * s.duals[r];
    EXPECT_NEAR(by, s.objective, 1e-8);
    for (std::size_t j = 0; j < n; ++j) {
      EXPECT_GE(s.primal[j], -1e-9);
      double aty = 0.0;
      for (std::size_t r = 0; r < m; ++r) aty += p.a[r * n + j] * s.duals[r];
      EXPECT_LE(aty, p.c[j] + 1e-8);
    }
    const ExactCheck ex = check_basis_exact(p.program(), s);
    EXPECT_TRUE(ex.primal_feasible && ex.dual_feasible) << "rep " << rep;
  }
  EXPECT_GT(optimal, 100);
  EXPECT_GT(infeasible, 10);
}

TEST(Simplex, PhaseOneOnly) {
  Dense p{1, 2, {1, 1}, {2}, {5, 1}};
  Options opt;
  opt.phase_one_only = true;
  const Solution s = solve(p.program(), opt);
  EXPECT_EQ(s.status, Status::kOptimal);
  EXPECT_NEAR(s.primal[0] + s.primal[1], 2.0, 1e-12);
}
