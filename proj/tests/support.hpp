#pragma once

#include <random>

#include "conefield/linalg.hpp"

namespace conefield::test {

inline Mat random_sym(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Mat m(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m(i, j) = m(j, i) = u(rng);
  return m;
}

// M^T M + shift I, well conditioned for shift ~ 1.
inline Mat random_spd(std::mt19937_64& rng, int n, double shift = 0.5) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat a(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = u(rng);
  Mat s = a.transpose() * a;
  for (int i = 0; i < n; ++i) s(i, i) += shift;
  return s.symmetrized_upper();
}

inline Mat random_invertible(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    Mat a(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = u(rng) + (i == j ? 1.5 : 0.0);
    if (std::abs(determinant(a)) > 0.1) return a;
  }
}

inline double max_diff(const Mat& a, const Mat& b) { return (a - b).max_abs(); }

}  // namespace conefield::test
