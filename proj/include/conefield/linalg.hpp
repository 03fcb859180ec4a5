#pragma once

// Small dense matrices (n <= 4) and the eigen/Cholesky kernels the cone
// calculus is built on. Everything is stack allocated.

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>

namespace conefield {

inline constexpr int kMaxDim = 4;

// Coordinates of a sample point; only the first `dim` entries are meaningful.
using Point = std::array<double, kMaxDim>;

class Mat {
 public:
  Mat() = default;
  explicit Mat(int n) : n_(n) {}

  static Mat zeros(int n) { return Mat(n); }
  static Mat identity(int n);
  static Mat diag(std::initializer_list<double> d);
  static Mat diag(std::span<const double> d);
  // Row-major initialiser; size must be a perfect square <= 16.
  static Mat from_rows(std::initializer_list<double> values);

  int dim() const { return n_; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i * kMaxDim + j)]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * kMaxDim + j)]; }

  Mat& operator+=(const Mat& o);
  Mat& operator-=(const Mat& o);
  Mat& operator*=(double s);

  friend Mat operator+(Mat a, const Mat& b) { return a += b; }
  friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
  friend Mat operator*(Mat a, double s) { return a *= s; }
  friend Mat operator*(double s, Mat a) { return a *= s; }
  friend Mat operator-(Mat a) { return a *= -1.0; }
  friend Mat operator*(const Mat& a, const Mat& b);
  friend bool operator==(const Mat& a, const Mat& b);

  Mat transpose() const;
  double trace() const;
  double frobenius() const;
  double max_abs() const;
  bool is_finite() const;
  // Copies the upper triangle onto the lower one.
  Mat symmetrized_upper() const;
  std::string to_string() const;

 private:
  int n_ = 0;
  std::array<double, kMaxDim * kMaxDim> a_{};
};

// A^T S A, with the result symmetrised exactly.
Mat congruence(const Mat& a, const Mat& s);

struct Eigen {
  std::array<double, kMaxDim> values{};  // ascending
  Mat vectors;                           // columns are eigenvectors
  int sweeps = 0;
};

// Cyclic Jacobi iteration for symmetric S. Stops when the off-diagonal
// Frobenius mass drops below 1e-14 * ||S||_F; throws eigensolver_failure
// after 50 sweeps.
Eigen jacobi_eigen(const Mat& s);

double spectral_radius(const Mat& s);
double min_eigenvalue(const Mat& s);

// Lower-triangular L with S = L L^T. Returns false if a pivot is not
// strictly positive.
bool cholesky(const Mat& s, Mat& lower);

// L^{-1} S L^{-T} for lower-triangular L, symmetrised.
Mat whiten(const Mat& lower, const Mat& s);

// Inverse by Gauss-Jordan elimination with partial pivoting; returns false
// for (numerically) singular input.
bool invert(const Mat& a, Mat& inverse);
double determinant(const Mat& a);

}  // namespace conefield
