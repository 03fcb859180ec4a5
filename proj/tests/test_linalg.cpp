#include <doctest.h>

#include <cmath>

#include "conefield/error.hpp"
#include "support.hpp"

using namespace conefield;
using test::max_diff;

TEST_CASE("jacobi reconstructs V diag V^T") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 4;
    const Mat s = test::random_sym(rng, n, 3.0);
    const Eigen e = jacobi_eigen(s);
    Mat d(n);
    for (int i = 0; i < n; ++i) d(i, i) = e.values[static_cast<std::size_t>(i)];
    CHECK(max_diff(e.vectors * d * e.vectors.transpose(), s) < 1e-12 * (1.0 + s.frobenius()));
    CHECK(max_diff(e.vectors.transpose() * e.vectors, Mat::identity(n)) < 1e-13);
    for (int i = 1; i < n; ++i) CHECK(e.values[static_cast<std::size_t>(i - 1)] <= e.values[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("jacobi on known spectra") {
  const Eigen e = jacobi_eigen(Mat::from_rows({2, 1, 1, 2}));
  CHECK(e.values[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(e.values[1] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(spectral_radius(Mat::diag({2.0, -3.0})) == 3.0);
  CHECK(min_eigenvalue(Mat::diag({2.0, -3.0, 5.0})) == -3.0);
  CHECK(jacobi_eigen(Mat::identity(3)).sweeps == 0);
}

TEST_CASE("cholesky, whiten, invert, determinant") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 4;
    const Mat z = test::random_spd(rng, n);
    Mat l;
    REQUIRE(cholesky(z, l));
    CHECK(max_diff(l * l.transpose(), z) < 1e-13);
    CHECK(max_diff(whiten(l, z), Mat::identity(n)) < 1e-13);
    Mat inv;
    REQUIRE(invert(z, inv));
    CHECK(max_diff(inv * z, Mat::identity(n)) < 1e-12);
    double root = 1.0;
    for (int i = 0; i < n; ++i) root *= l(i, i);
    CHECK(determinant(z) == doctest::Approx(root * root).epsilon(1e-12));
  }
  Mat l;
  CHECK_FALSE(cholesky(Mat::diag({1.0, 0.0}), l));
  CHECK_FALSE(cholesky(Mat::diag({1.0, -1.0}), l));
  Mat inv;
  CHECK_FALSE(invert(Mat::from_rows({1, 2, 2, 4}), inv));
}

TEST_CASE("congruence is exactly symmetric") {
  std::mt19937_64 rng(8);
  const Mat a = test::random_invertible(rng, 3);
  const Mat c = congruence(a, test::random_sym(rng, 3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(c(i, j) == c(j, i));
}
