#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "onm/linalg.hpp"
#include "onm/rng.hpp"
#include "test_support.hpp"

using namespace onm::linalg;
using onm::rng::Purpose;
using onm::rng::Stream;
using test_support::make_sym;

TEST_CASE("vector constructors reject non-finite entries") {
  CHECK_THROWS_AS(Vector({1.0, std::nan("")}), std::invalid_argument);
  CHECK_THROWS_AS(Vector({std::numeric_limits<double>::infinity()}), std::invalid_argument);
  const Vector v{3.0, -4.0};
  CHECK(norm(v) == 5.0);
  CHECK(inf_norm(v) == 4.0);
  CHECK(dot(v, v) == 25.0);
}

TEST_CASE("vector arithmetic") {
  const Vector a{1.0, 2.0};
  const Vector b{0.5, -1.0};
  const Vector s = a + b;
  CHECK(s[0] == 1.5);
  CHECK(s[1] == 1.0);
  const Vector d = a - b;
  CHECK(d[0] == 0.5);
  CHECK(d[1] == 3.0);
  const Vector t = 2.0 * a;
  CHECK(t[0] == 2.0);
  CHECK(t[1] == 4.0);
  CHECK(distance(a, b) == doctest::Approx(std::sqrt(0.25 + 9.0)));
}

TEST_CASE("symmetric storage shares (i,j) and (j,i)") {
  SymMatrix m(3);
  m.set(0, 2, 5.0);
  CHECK(m(2, 0) == 5.0);
  m.add(2, 0, 1.0);
  CHECK(m(0, 2) == 6.0);
  CHECK_THROWS_AS(m.set(1, 1, std::nan("")), std::invalid_argument);
}

TEST_CASE("matvec and rank-one updates") {
  SymMatrix m = SymMatrix::identity(2);
  m.add_outer(Vector{1.0, 1.0}, 2.0);
  // m = [[3,2],[2,3]]
  const Vector y = m.matvec(Vector{1.0, -1.0});
  CHECK(y[0] == 1.0);
  CHECK(y[1] == -1.0);
  CHECK(m.inf_norm() == 5.0);
  m.add_scaled_identity(-3.0);
  CHECK(m(0, 0) == 0.0);
  CHECK(m(0, 1) == 2.0);
}

TEST_CASE("eigenvalues of a 2x2 exchange-coupled matrix are exact") {
  const auto eig = symmetric_eigenvalues(make_sym(2, {3, 1, 1, 3}));
  CHECK(eig[0] == 2.0);
  CHECK(eig[1] == 4.0);
}

TEST_CASE("eigenvalues come back sorted ascending") {
  const auto eig = symmetric_eigenvalues(SymMatrix::diagonal(Vector{4.0, -1.0, 2.0}));
  CHECK(eig == std::vector<double>{-1.0, 2.0, 4.0});
}

TEST_CASE("eigenvalues match the closed form for random 2x2 matrices") {
  Stream s(11, 0, Purpose::instances);
  for (int rep = 0; rep < 200; ++rep) {
    const double a = 4.0 * (s.next_unit() - 0.5);
    const double b = 4.0 * (s.next_unit() - 0.5);
    const double d = 4.0 * (s.next_unit() - 0.5);
    const auto eig = symmetric_eigenvalues(make_sym(2, {a, b, b, d}));
    const auto [lo, hi] = test_support::eig_2x2(a, b, d);
    const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
    CHECK(std::abs(eig[0] - lo) <= 1e-12 * scale);
    CHECK(std::abs(eig[1] - hi) <= 1e-12 * scale);
  }
}

TEST_CASE("eigenvalues recover a planted spectrum") {
  Stream s(12, 0, Purpose::instances);
  for (std::size_t n : {3u, 5u, 8u, 12u}) {
    for (int rep = 0; rep < 20; ++rep) {
      auto spectrum = test_support::random_spectrum(s, n, 1e4);
      const SymMatrix m = test_support::matrix_with_spectrum(s, spectrum);
      auto eig = symmetric_eigenvalues(m);
      std::sort(spectrum.begin(), spectrum.end());
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(eig[i] - spectrum[i]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("operator norm picks the largest magnitude eigenvalue") {
  CHECK(operator_norm(SymMatrix::diagonal(Vector{2.0, -5.0})) == 5.0);
  CHECK(operator_norm(SymMatrix::identity(3)) == 1.0);
  CHECK(operator_norm(make_sym(2, {0, 1, 1, 0})) == 1.0);
}

TEST_CASE("operator norm is exactly negation invariant") {
  Stream s(13, 0, Purpose::instances);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rep % 6;
    const SymMatrix m = test_support::matrix_with_spectrum(
        s, test_support::random_spectrum(s, n, 1e3));
    CHECK(operator_norm(m) == operator_norm(-1.0 * m));
    CHECK(min_singular_value(m) == min_singular_value(-1.0 * m));
  }
}

TEST_CASE("smallest singular value on diagonal and coupled fixtures") {
  CHECK(min_singular_value(SymMatrix::diagonal(Vector{2.0, -5.0})) == 2.0);
  CHECK(min_singular_value(SymMatrix::diagonal(Vector{3.0, 0.0})) == 0.0);
  CHECK(min_singular_value(make_sym(2, {3, 1, 1, 3})) == 2.0);
}

TEST_CASE("identity and diagonal solves are exact") {
  const Vector b{3.0, 4.0};
  const Vector y = solve_symmetric(SymMatrix::identity(2), b);
  CHECK(y[0] == 3.0);
  CHECK(y[1] == 4.0);
  const Vector z = solve_symmetric(SymMatrix::diagonal(Vector{2.0, 4.0}), Vector{2.0, 8.0});
  CHECK(z[0] == 1.0);
  CHECK(z[1] == 2.0);
}

TEST_CASE("indefinite solves that require 2x2 pivots") {
  // Zero diagonal forces the Bunch-Kaufman 2x2 branch.
  const Vector y = solve_symmetric(make_sym(2, {0, 1, 1, 0}), Vector{1.0, 2.0});
  CHECK(y[0] == 2.0);
  CHECK(y[1] == 1.0);

  const SymMatrix m = make_sym(4, {0, 1, 0, 2,
                                   1, 0, 3, 0,
                                   0, 3, 0, 1,
                                   2, 0, 1, 0});
  const Vector b{1.0, -2.0, 0.5, 3.0};
  const Vector x = solve_symmetric(m, b);
  CHECK(norm(compensated_residual(m, x, b)) <= 1e-12 * norm(b));
}

TEST_CASE("singular matrices are rejected with a pivot index") {
  SymMatrix rank1(2);
  rank1.add_outer(Vector{1.0, 1.0}, 1.0);
  CHECK_THROWS_AS(solve_symmetric(rank1, Vector{1.0, 1.0}), SingularMatrix);

  try {
    solve_symmetric(SymMatrix::diagonal(Vector{3.0, 0.0}), Vector{1.0, 1.0});
    FAIL("expected SingularMatrix");
  } catch (const SingularMatrix& e) {
    CHECK(e.pivot_index() == 1);
  }

  CHECK_THROWS_AS(solve_symmetric(SymMatrix(3), Vector{1.0, 1.0, 1.0}), SingularMatrix);
}

TEST_CASE("solve residual stays below 1e-10 up to condition 1e5") {
  Stream s(14, 0, Purpose::instances);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 1 + rep % 8;
    const double cond = std::pow(10.0, 5.0 * s.next_unit());
    const SymMatrix m = test_support::matrix_with_spectrum(
        s, test_support::random_spectrum(s, n, cond));
    const Vector b = test_support::random_unit(s, n);
    const Vector y = solve_symmetric(m, b);
    CHECK(norm(compensated_residual(m, y, b)) <= 1e-10 * std::max(1.0, norm(b)));
  }
}

TEST_CASE("solve residual scales with condition up to 1e8") {
  Stream s(15, 0, Purpose::instances);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rep % 7;
    const double cond = std::pow(10.0, 5.0 + 3.0 * s.next_unit());
    const SymMatrix m = test_support::matrix_with_spectrum(
        s, test_support::random_spectrum(s, n, cond));
    const Vector b = test_support::random_unit(s, n);
    const Vector y = solve_symmetric(m, b);
    const double eps = std::numeric_limits<double>::epsilon();
    const double bound = 100.0 * static_cast<double>(n) * eps * cond * std::max(1.0, norm(b));
    CHECK(norm(compensated_residual(m, y, b)) <= bound);
  }
}

TEST_CASE("inverse norm equals reciprocal of smallest singular value") {
  // Two independent routes: Jacobi eigenvalues of M versus power iteration
  // on M^{-1} driven through repeated solves.
  Stream s(16, 0, Purpose::instances);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 2 + rep % 5;
    const double cond = std::pow(10.0, 1.0 + 3.0 * s.next_unit());
    const SymMatrix m = test_support::matrix_with_spectrum(
        s, test_support::random_spectrum(s, n, cond));
    const double smin = min_singular_value(m);

    Vector z = test_support::random_unit(s, n);
    double inv_norm = 0.0;
    for (int it = 0; it < 300; ++it) {
      const Vector w = solve_symmetric(m, z);
      inv_norm = norm(w);
      z = (1.0 / inv_norm) * w;
    }
    CHECK(inv_norm * smin == doctest::Approx(1.0).epsilon(1e-7));
  }
}

TEST_CASE("no sampled direction is contracted below the smallest singular value") {
  Stream s(17, 0, Purpose::instances);
  const SymMatrix m = test_support::matrix_with_spectrum(
      s, test_support::random_spectrum(s, 5, 100.0));
  const double smin = min_singular_value(m);
  for (int rep = 0; rep < 1000; ++rep) {
    const Vector v = test_support::random_unit(s, 5);
    CHECK(norm(m.matvec(v)) >= smin * (1.0 - 1e-9));
  }
}

TEST_CASE("compensated residual is exact on representable data") {
  const SymMatrix m = make_sym(2, {2, 0.5, 0.5, 1});
  const Vector y{0.25, 8.0};
  const Vector b = m.matvec(y);  // dyadic entries: products are exact
  const Vector r = compensated_residual(m, y, b);
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 0.0);
}
