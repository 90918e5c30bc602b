#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <opsplit/gark.hpp>
#include <opsplit/onestep.hpp>

#include <cmath>
#include <random>
#include <vector>

using namespace opsplit;

namespace {

// Three explicit stages coupled to two implicit ones (beta = 1/2 family).
GarkMethod<double> imex_pair2() {
  Matrix<double> Aee = {{0, 0, 0}, {0.5, 0, 0}, {0.5, 0.5, 0}};
  Matrix<double> Aei = {{0, 0}, {0.5, 0}, {0.5, 0.5}};
  Matrix<double> Aie = {{0.25, 0, 0}, {0.25, 0.5, 0}};
  Matrix<double> Aii = {{0.25, 0}, {0.5, 0.25}};
  return GarkMethod<double>({{Aee, Aei}, {Aie, Aii}},
                            {{0.25, 0.5, 0.25}, {0.5, 0.5}}, 2, "imex-pair2");
}

}  // namespace

TEST_CASE("validation rejects ragged blocks and weights") {
  Matrix<double> A11 = {{0.0}};
  Matrix<double> A12 = {{0.0, 0.0}};
  Matrix<double> A21 = {{0.0}, {0.0}};
  Matrix<double> A22 = {{0, 0}, {0.5, 0}};
  CHECK_NOTHROW(GarkMethod<double>({{A11, A12}, {A21, A22}}, {{1.0}, {0.5, 0.5}},
                                   1, "ok"));
  CHECK_THROWS_AS(GarkMethod<double>({{A11, A12}, {A21, A22}},
                                     {{1.0}, {0.5, 0.5, 0.0}}, 1, "bad"),
                  UsageError);
  CHECK_THROWS_AS(GarkMethod<double>({{A12, A12}, {A21, A22}}, {{1.0}, {0.5, 0.5}},
                                     1, "bad"),
                  UsageError);
  CHECK_THROWS_AS(GarkMethod<double>({{A11, A12}}, {{1.0}, {0.5, 0.5}}, 1, "bad"),
                  UsageError);
}

TEST_CASE("block abscissae are recomputed row sums") {
  auto m = imex_pair2();
  Vec<double> cEE = gark_c(m, 0, 0);
  CHECK(cEE == Vec<double>{0.0, 0.5, 1.0});
  Vec<double> cII = gark_c(m, 1, 1);
  CHECK(cII == Vec<double>{0.25, 0.75});
  Vec<double> cEI = gark_c(m, 0, 1);
  CHECK(cEI == Vec<double>{0.0, 0.5, 1.0});
  Vec<double> cIE = gark_c(m, 1, 0);
  CHECK(cIE == Vec<double>{0.25, 0.75});
}

TEST_CASE("conversion layout: operator-major stages, block-local weights") {
  auto ark = gark_to_ark(imex_pair2());
  REQUIRE(ark.stages() == 5);
  REQUIRE(ark.n_operators() == 2);
  const auto& Ae = ark.tableaux[0];
  const auto& Ai = ark.tableaux[1];
  // operator 1 columns live at global stages 0..2, operator 2 at 3..4
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 3; j < 5; ++j) CHECK(Ae.A[i][j] == 0.0);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(Ai.A[i][j] == 0.0);
  CHECK(Ae.A[1][0] == 0.5);   // explicit block row 2
  CHECK(Ae.A[4][1] == 0.5);   // coupling of implicit stage 2 to explicit stages
  CHECK(Ai.A[1][3] == 0.5);   // coupling of explicit stage 2 to implicit stage 1
  CHECK(Ai.A[4][4] == 0.25);  // implicit diagonal
  CHECK(Ae.b == Vec<double>{0.25, 0.5, 0.25, 0.0, 0.0});
  CHECK(Ai.b == Vec<double>{0.0, 0.0, 0.0, 0.5, 0.5});
  // each operator is evaluated at its diagonal-block abscissae
  CHECK(Ae.c[0] == 0.0);
  CHECK(Ae.c[1] == 0.5);
  CHECK(Ae.c[2] == 1.0);
  CHECK(Ai.c[3] == 0.25);
  CHECK(Ai.c[4] == 0.75);
}

TEST_CASE("stage plan interleaves the operator blocks") {
  auto plan = ark_stage_plan(gark_to_ark(imex_pair2()));
  REQUIRE(plan.size() == 5);
  std::vector<std::size_t> order;
  std::vector<bool> implicit;
  for (const auto& e : plan) {
    REQUIRE(e.stages.size() == 1);
    order.push_back(e.stages.front());
    implicit.push_back(e.implicit);
  }
  CHECK(order == std::vector<std::size_t>{0, 3, 1, 4, 2});
  CHECK(implicit == std::vector<bool>{false, true, false, true, false});
}

TEST_CASE("linear-problem oracle: direct solution of the stage equations") {
  // Random dense coupling over two 2-d linear operators; the stage equations
  // are assembled and solved here by straight Gaussian elimination, fully
  // independent of the library's execution path.
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> U(-0.4, 0.4);
  auto rnd_matrix = [&](std::size_t r, std::size_t c) {
    Matrix<double> M(r, Vec<double>(c));
    for (auto& row : M)
      for (auto& x : row) x = U(rng);
    return M;
  };
  const std::size_t s1 = 2, s2 = 3, n = 2;
  Matrix<double> A11 = rnd_matrix(s1, s1), A12 = rnd_matrix(s1, s2);
  Matrix<double> A21 = rnd_matrix(s2, s1), A22 = rnd_matrix(s2, s2);
  Vec<double> b1 = {0.3, 0.7}, b2 = {0.2, 0.5, 0.3};
  GarkMethod<double> m({{A11, A12}, {A21, A22}}, {b1, b2}, 1, "random-dense");

  std::vector<Matrix<double>> Mops = {rnd_matrix(n, n), rnd_matrix(n, n)};
  AdditiveProblem<double> p;
  for (const auto& M : Mops)
    p.operators.push_back([M](double, const Vec<double>& y) {
      Vec<double> r(y.size(), 0.0);
      for (std::size_t i = 0; i < y.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j) r[i] += M[i][j] * y[j];
      return r;
    });
  p.y0 = {0.9, -0.4};
  const double h = 0.2;

  // Unknowns: Y stacked block-major; equations Y^q_i = y0 + h sum a M Y.
  const std::size_t dim = (s1 + s2) * n;
  std::vector<Vec<double>> G(dim, Vec<double>(dim + 1, 0.0));
  auto block_of = [&](std::size_t global) { return global < s1 ? 0 : 1; };
  auto local_of = [&](std::size_t global) { return global < s1 ? global : global - s1; };
  auto coeff = [&](std::size_t gi, std::size_t gj) {
    const std::size_t q = block_of(gi), l = block_of(gj);
    const Matrix<double>& B = q == 0 ? (l == 0 ? A11 : A12) : (l == 0 ? A21 : A22);
    return B[local_of(gi)][local_of(gj)];
  };
  for (std::size_t gi = 0; gi < s1 + s2; ++gi)
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t row = gi * n + r;
      G[row][row] += 1.0;
      G[row][dim] = p.y0[r];
      for (std::size_t gj = 0; gj < s1 + s2; ++gj) {
        const auto& M = Mops[block_of(gj)];
        for (std::size_t cidx = 0; cidx < n; ++cidx)
          G[row][gj * n + cidx] -= h * coeff(gi, gj) * M[r][cidx];
      }
    }
  for (std::size_t col = 0; col < dim; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < dim; ++r)
      if (std::abs(G[r][col]) > std::abs(G[piv][col])) piv = r;
    std::swap(G[col], G[piv]);
    for (std::size_t r = 0; r < dim; ++r) {
      if (r == col) continue;
      double f = G[r][col] / G[col][col];
      for (std::size_t k = col; k <= dim; ++k) G[r][k] -= f * G[col][k];
    }
  }
  Vec<double> expect = p.y0;
  for (std::size_t gj = 0; gj < s1 + s2; ++gj) {
    const double bw = block_of(gj) == 0 ? b1[local_of(gj)] : b2[local_of(gj)];
    const auto& M = Mops[block_of(gj)];
    for (std::size_t r = 0; r < n; ++r) {
      double Fy = 0;
      for (std::size_t cidx = 0; cidx < n; ++cidx)
        Fy += M[r][cidx] * G[gj * n + cidx][dim] / G[gj * n + cidx][gj * n + cidx];
      expect[r] += h * bw * Fy;
    }
  }

  Vec<double> got = gark_step<double>(p, m, 0.0, p.y0, h, {1e-13, 80, 1e-8, 8});
  CHECK(std::abs(got[0] - expect[0]) <= 1e-12);
  CHECK(std::abs(got[1] - expect[1]) <= 1e-12);
}

TEST_CASE("identical blocks collapse to the underlying method on the sum") {
  auto rk4 = builtin_tableau<double>("RK4");
  Matrix<double> A = rk4.A;
  GarkMethod<double> m({{A, A}, {A, A}}, {rk4.b, rk4.b}, 4, "rk4-collapse");
  AdditiveProblem<double> p;
  p.operators = {[](double, const Vec<double>& y) { return Vec<double>{0.1 * y[0]}; },
                 [](double, const Vec<double>& y) {
                   return Vec<double>{-0.1 * y[0] * y[0] * y[0]};
                 }};
  p.y0 = {1.5};
  Operator<double> full = [&](double t, const Vec<double>& y) {
    return p.full_rhs(t, y);
  };
  Vec<double> a = gark_step<double>(p, m, 0.0, p.y0, 0.1);
  Vec<double> b = rk_step<double>(full, rk4, 0.0, p.y0, 0.1);
  CHECK(std::abs(a[0] - b[0]) <= 1e-14);
}

TEST_CASE("second-order convergence of the implicit-explicit pair") {
  AdditiveProblem<double> p;
  p.operators = {[](double, const Vec<double>& y) {
                   return Vec<double>{0.1 * y[0] - 0.1 * y[0] * y[0] * y[0]};
                 },
                 [](double, const Vec<double>& y) { return Vec<double>{-2.0 * y[0]}; }};
  p.y0 = {1.5};
  Operator<double> full = [&](double t, const Vec<double>& y) {
    return p.full_rhs(t, y);
  };
  Vec<double> ref = adaptive_integrate<double>(full, builtin_embedded<double>("DP54"),
                                               0.0, 2.0, p.y0, {1e-13, 1e-13});
  auto m = imex_pair2();
  auto run = [&](double dt) {
    auto traj = gark_solve<double>(p, m, 0.0, 2.0, dt);
    return std::abs(traj.back()[0] - ref[0]);
  };
  CHECK(std::log2(run(0.02) / run(0.01)) == doctest::Approx(2.0).epsilon(0.12));
}

TEST_CASE("implicit operator is evaluated only at its own stages") {
  std::vector<double> t_impl;
  AdditiveProblem<double> p;
  p.operators = {[](double, const Vec<double>& y) { return Vec<double>{0.1 * y[0]}; },
                 [&](double t, const Vec<double>& y) {
                   t_impl.push_back(t);
                   return Vec<double>{-0.5 * y[0]};
                 }};
  p.y0 = {1.0};
  gark_step<double>(p, imex_pair2(), 0.0, p.y0, 1.0);
  // all implicit evaluations sit at the diagonal-block abscissae {1/4, 3/4}
  REQUIRE(!t_impl.empty());
  for (double t : t_impl)
    CHECK((std::abs(t - 0.25) <= 1e-12 || std::abs(t - 0.75) <= 1e-12));
}
