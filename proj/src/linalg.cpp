#include "conefield/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "conefield/error.hpp"

namespace conefield {

Mat Mat::identity(int n) {
  Mat m(n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::diag(std::initializer_list<double> d) {
  return diag(std::span<const double>(d.begin(), d.size()));
}

Mat Mat::diag(std::span<const double> d) {
  Mat m(static_cast<int>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
  return m;
}

Mat Mat::from_rows(std::initializer_list<double> values) {
  int n = 0;
  while (n * n < static_cast<int>(values.size())) ++n;
  if (n * n != static_cast<int>(values.size()) || n > kMaxDim)
    throw Error(Errc::invalid_argument, "Mat::from_rows: size is not a square <= 16");
  Mat m(n);
  auto it = values.begin();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = *it++;
  return m;
}

Mat& Mat::operator+=(const Mat& o) {
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) (*this)(i, j) += o(i, j);
  return *this;
}

Mat& Mat::operator-=(const Mat& o) {
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) (*this)(i, j) -= o(i, j);
  return *this;
}

Mat& Mat::operator*=(double s) {
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) (*this)(i, j) *= s;
  return *this;
}

Mat operator*(const Mat& a, const Mat& b) {
  const int n = a.dim();
  Mat c(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

bool operator==(const Mat& a, const Mat& b) {
  if (a.dim() != b.dim()) return false;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j)
      if (a(i, j) != b(i, j)) return false;
  return true;
}

Mat Mat::transpose() const {
  Mat t(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) t(i, j) = (*this)(j, i);
  return t;
}

double Mat::trace() const {
  double s = 0.0;
  for (int i = 0; i < n_; ++i) s += (*this)(i, i);
  return s;
}

double Mat::frobenius() const {
  double s = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) s += (*this)(i, j) * (*this)(i, j);
  return std::sqrt(s);
}

double Mat::max_abs() const {
  double m = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) m = std::max(m, std::abs((*this)(i, j)));
  return m;
}

bool Mat::is_finite() const {
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      if (!std::isfinite((*this)(i, j))) return false;
  return true;
}

Mat Mat::symmetrized_upper() const {
  Mat s = *this;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < i; ++j) s(i, j) = s(j, i);
  return s;
}

std::string Mat::to_string() const {
  std::string out = "[";
  char buf[32];
  for (int i = 0; i < n_; ++i) {
    out += i ? "; " : "";
    for (int j = 0; j < n_; ++j) {
      std::snprintf(buf, sizeof buf, "%s%.6g", j ? ", " : "", (*this)(i, j));
      out += buf;
    }
  }
  return out + "]";
}

Mat congruence(const Mat& a, const Mat& s) {
  const int n = a.dim();
  Mat sa = s * a;
  Mat out(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double v = 0.0;
      for (int k = 0; k < n; ++k) v += a(k, i) * sa(k, j);
      out(i, j) = v;
      out(j, i) = v;
    }
  return out;
}

namespace {

double off_diagonal_mass(const Mat& a) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

constexpr int kMaxSweeps = 50;

}  // namespace

Eigen jacobi_eigen(const Mat& s) {
  const int n = s.dim();
  Mat a = s;
  Mat v = Mat::identity(n);
  const double threshold = 1e-14 * s.frobenius();
  int sweep = 0;
  while (off_diagonal_mass(a) > threshold) {
    if (sweep == kMaxSweeps)
      throw Error(Errc::eigensolver_failure,
                  "Jacobi iteration did not converge in 50 sweeps for " + s.to_string());
    ++sweep;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
  }

  std::array<int, kMaxDim> order{};
  std::iota(order.begin(), order.begin() + n, 0);
  std::sort(order.begin(), order.begin() + n, [&](int x, int y) { return a(x, x) < a(y, y); });
  Eigen out;
  out.vectors = Mat(n);
  out.sweeps = sweep;
  for (int i = 0; i < n; ++i) {
    out.values[static_cast<std::size_t>(i)] = a(order[i], order[i]);
    for (int k = 0; k < n; ++k) out.vectors(k, i) = v(k, order[i]);
  }
  return out;
}

double spectral_radius(const Mat& s) {
  if (s.dim() == 1) return std::abs(s(0, 0));
  const Eigen e = jacobi_eigen(s);
  return std::max(std::abs(e.values[0]), std::abs(e.values[static_cast<std::size_t>(s.dim() - 1)]));
}

double min_eigenvalue(const Mat& s) {
  if (s.dim() == 1) return s(0, 0);
  return jacobi_eigen(s).values[0];
}

bool cholesky(const Mat& s, Mat& lower) {
  const int n = s.dim();
  lower = Mat(n);
  for (int j = 0; j < n; ++j) {
    double d = s(j, j);
    for (int k = 0; k < j; ++k) d -= lower(j, k) * lower(j, k);
    if (!(d > 0.0)) return false;
    const double ljj = std::sqrt(d);
    lower(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (int k = 0; k < j; ++k) v -= lower(i, k) * lower(j, k);
      lower(i, j) = v / ljj;
    }
  }
  return true;
}

namespace {

// Solves L Y = B column by column.
Mat forward_solve(const Mat& lower, const Mat& b) {
  const int n = b.dim();
  Mat y(n);
  for (int c = 0; c < n; ++c)
    for (int i = 0; i < n; ++i) {
      double v = b(i, c);
      for (int k = 0; k < i; ++k) v -= lower(i, k) * y(k, c);
      y(i, c) = v / lower(i, i);
    }
  return y;
}

}  // namespace

Mat whiten(const Mat& lower, const Mat& s) {
  const Mat y = forward_solve(lower, s);
  const Mat c = forward_solve(lower, y.transpose());
  Mat out(s.dim());
  for (int i = 0; i < s.dim(); ++i)
    for (int j = i; j < s.dim(); ++j) {
      const double v = 0.5 * (c(i, j) + c(j, i));
      out(i, j) = v;
      out(j, i) = v;
    }
  return out;
}

bool invert(const Mat& a, Mat& inverse) {
  const int n = a.dim();
  Mat m = a;
  inverse = Mat::identity(n);
  const double scale = std::max(a.max_abs(), 1e-300);
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(m(r, col)) > std::abs(m(pivot, col))) pivot = r;
    if (std::abs(m(pivot, col)) <= 1e-14 * scale) return false;
    if (pivot != col)
      for (int k = 0; k < n; ++k) {
        std::swap(m(pivot, k), m(col, k));
        std::swap(inverse(pivot, k), inverse(col, k));
      }
    const double p = m(col, col);
    for (int k = 0; k < n; ++k) {
      m(col, k) /= p;
      inverse(col, k) /= p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = m(r, col);
      if (f == 0.0) continue;
      for (int k = 0; k < n; ++k) {
        m(r, k) -= f * m(col, k);
        inverse(r, k) -= f * inverse(col, k);
      }
    }
  }
  return true;
}

double determinant(const Mat& a) {
  const int n = a.dim();
  Mat m = a;
  double det = 1.0;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(m(r, col)) > std::abs(m(pivot, col))) pivot = r;
    if (m(pivot, col) == 0.0) return 0.0;
    if (pivot != col) {
      for (int k = 0; k < n; ++k) std::swap(m(pivot, k), m(col, k));
      det = -det;
    }
    det *= m(col, col);
    for (int r = col + 1; r < n; ++r) {
      const double f = m(r, col) / m(col, col);
      for (int k = col; k < n; ++k) m(r, k) -= f * m(col, k);
    }
  }
  return det;
}

}  // namespace conefield
