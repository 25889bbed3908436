#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "brickgen/lp.hpp"
#include "oracles/dense_simplex.hpp"

using namespace brickgen;

namespace {

struct Dense {
  std::vector<std::vector<double>> A;
  std::vector<double> b, c;
};

// Feasible by construction (b = A x0, x0 >= 0) and bounded (c = A'y + s, s >= 0).
Dense random_lp(std::mt19937_64& rng, int m, int n, double density) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.0, 1.0);
  std::bernoulli_distribution keep(density);
  Dense d;
  d.A.assign(m, std::vector<double>(n, 0.0));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j)
      if (keep(rng)) d.A[i][j] = u(rng);
    d.A[i][rng() % n] = u(rng) + 2.0;
  }
  std::vector<double> x0(n), y(m);
  for (auto& v : x0) v = keep(rng) ? pos(rng) * 3 : 0.0;
  for (auto& v : y) v = u(rng);
  d.b.assign(m, 0.0);
  d.c.assign(n, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) d.b[i] += d.A[i][j] * x0[j];
  for (int j = 0; j < n; ++j) {
    d.c[j] = pos(rng) * 0.5;
    for (int i = 0; i < m; ++i) d.c[j] += d.A[i][j] * y[i];
  }
  return d;
}

lp::LinearProgram to_program(const Dense& d) {
  lp::LinearProgram p;
  for (double cj : d.c) p.add_column(cj);
  for (double bi : d.b) p.add_row(bi);
  for (std::size_t i = 0; i < d.A.size(); ++i)
    for (std::size_t j = 0; j < d.c.size(); ++j)
      if (d.A[i][j] != 0.0) p.add_entry(static_cast<int>(i), static_cast<int>(j), d.A[i][j]);
  return p;
}

}  // namespace

TEST(Lp, TinyKnownOptimum) {
  // min -x - y  s.t.  x + y + s = 4, x + 3y + t = 6  ->  objective -4
  lp::LinearProgram p;
  int x = p.add_column(-1), y = p.add_column(-1), s = p.add_column(0), t = p.add_column(0);
  int r0 = p.add_row(4), r1 = p.add_row(6);
  p.add_entry(r0, x, 1);
  p.add_entry(r0, y, 1);
  p.add_entry(r0, s, 1);
  p.add_entry(r1, x, 1);
  p.add_entry(r1, y, 3);
  p.add_entry(r1, t, 1);
  auto sol = lp::solve(p);
  EXPECT_EQ(sol.status, lp::Status::optimal);
  EXPECT_NEAR(sol.objective, -4.0, 1e-7);
}

TEST(Lp, DegenerateUniqueVertex) {
  // min x0 + 2 x1  s.t.  x0 + x1 = 1  ->  x = (1, 0)
  lp::LinearProgram p;
  p.add_column(1);
  p.add_column(2);
  p.add_row(1);
  p.add_entry(0, 0, 1);
  p.add_entry(0, 1, 1);
  auto sol = lp::solve(p);
  ASSERT_EQ(sol.status, lp::Status::optimal);
  EXPECT_NEAR(sol.x[0], 1.0, 1e-7);
  EXPECT_NEAR(sol.x[1], 0.0, 1e-7);
}

TEST(Lp, AgreesWithDenseSimplexOnRandomPrograms) {
  std::mt19937_64 rng(2024);
  int compared = 0;
  for (int trial = 0; trial < 150; ++trial) {
    int m = 2 + rng() % 12, n = m + 1 + rng() % 15;
    Dense d = random_lp(rng, m, n, 0.4);
    auto ref = oracle::dense_simplex(d.A, d.b, d.c);
    ASSERT_EQ(ref.status, oracle::LpStatus::optimal) << "trial " << trial;
    auto sol = lp::solve(to_program(d));
    ASSERT_EQ(sol.status, lp::Status::optimal) << "trial " << trial;
    ASSERT_NEAR(sol.objective, ref.objective, 1e-6 * (1 + std::abs(ref.objective))) << "trial " << trial;
    for (int i = 0; i < m; ++i) {
      double r = -d.b[i];
      for (int j = 0; j < n; ++j) r += d.A[i][j] * sol.x[j];
      ASSERT_NEAR(r, 0.0, 1e-6 * (1 + std::abs(d.b[i])));
    }
    for (double v : sol.x) ASSERT_GE(v, -1e-9);
    ++compared;
  }
  EXPECT_EQ(compared, 150);
}

TEST(Lp, DeterministicOutput) {
  std::mt19937_64 rng(1);
  Dense d = random_lp(rng, 20, 40, 0.3);
  auto a = lp::solve(to_program(d));
  auto b = lp::solve(to_program(d));
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Lp, WritesCplexFormat) {
  lp::LinearProgram p;
  p.add_column(1.5, "f0");
  p.add_row(2, "eq0");
  p.add_entry(0, 0, 1);
  std::ostringstream os;
  p.write_lp_format(os);
  const std::string text = os.str();
  EXPECT_NE(text.find("Minimize"), std::string::npos);
  EXPECT_NE(text.find("f0"), std::string::npos);
  EXPECT_NE(text.find("eq0"), std::string::npos);
  EXPECT_NE(text.find("End"), std::string::npos);
}

TEST(DenseSimplexOracle, DetectsInfeasible) {
  // x0 + x1 = -1 with x >= 0
  auto r = oracle::dense_simplex({{1, 1}}, {-1}, {0, 0});
  EXPECT_EQ(r.status, oracle::LpStatus::infeasible);
}
