#pragma once

// Symmetric 2-tensor fields in coordinates: expression fields, builtin
// families with closed-form jets, linear combinations, affine pullbacks,
// compactly supported bumps, and the field-spec file format.

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "conefield/expr.hpp"
#include "conefield/linalg.hpp"

namespace conefield {

// Value and partial derivatives up to order two at one point:
// a1[i] = d_i sigma, a2[i][j] = d_i d_j sigma.
struct Jet {
  int dim = 0;
  int order = 0;
  Mat a0;
  std::array<Mat, kMaxDim> a1{};
  std::array<std::array<Mat, kMaxDim>, kMaxDim> a2{};

  // A1(v) = sum_i v_i d_i sigma
  Mat first(std::span<const double> v) const;
  // A2(v, v) = sum_ij v_i v_j d_i d_j sigma
  Mat second(std::span<const double> v) const;

  Jet& operator+=(const Jet& o);
  Jet& operator*=(double s);
};

namespace detail {
class FieldNode;
}

class SymTensorField {
 public:
  SymTensorField() = default;
  explicit SymTensorField(std::shared_ptr<const detail::FieldNode> node) : node_(std::move(node)) {}

  int dim() const;
  // Exactly symmetric value at x.
  Mat operator()(const Point& x) const;
  // Same as operator() but throws non_finite_sample on NaN/inf entries.
  Mat checked(const Point& x) const;
  // Jet up to `order` (<= 2). Builtins are closed form; expression parts
  // use fourth-order central differences with step h.
  Jet jet(const Point& x, int order, double h) const;
  bool analytic_jets() const;
  std::string describe() const;
  bool valid() const { return node_ != nullptr; }

  friend SymTensorField operator+(const SymTensorField& a, const SymTensorField& b);
  friend SymTensorField operator-(const SymTensorField& a, const SymTensorField& b);
  friend SymTensorField operator*(double s, const SymTensorField& a);

 private:
  std::shared_ptr<const detail::FieldNode> node_;
};

// Linear combination sum_i coefficients[i] * fields[i]; all of one dimension.
SymTensorField linear_combination(std::span<const double> coefficients,
                                  std::span<const SymTensorField> fields);

// entries: row-major upper triangle, n(n+1)/2 expressions.
SymTensorField expr_field(int dim, std::span<const std::string> entries);
SymTensorField constant_field(const Mat& value);
SymTensorField zero_field(int dim);

// euclidean; gaussian_conformal(a); inverse_poly_conformal(p); exp_gauge(c)
// or exp_gauge(c1..cn); cusp2d (n = 2).
SymTensorField builtin_field(std::string_view name, int dim, std::span<const double> params = {});
std::vector<std::string> builtin_names();

// amplitude * m(|x - center| / radius) * direction, m(t) = exp(1 - 1/(1 - t^2)) on t < 1.
SymTensorField bump(std::span<const double> center, double radius, double amplitude, const Mat& direction);
double bump_profile(double t);

// (1 + ||sigma(x)||_F^2)^{1/2} * I
SymTensorField frobenius_envelope(const SymTensorField& sigma);

class AffineDiffeo {
 public:
  // x -> A x + b; requires |det A| > 1e-12.
  static AffineDiffeo make(const Mat& a, std::span<const double> b);
  static AffineDiffeo identity(int dim);

  int dim() const { return a_.dim(); }
  Point operator()(const Point& x) const;
  Point inverse_map(const Point& y) const;
  const Mat& jacobian() const { return a_; }
  const Mat& inverse_jacobian() const { return a_inv_; }
  const Point& shift() const { return b_; }
  double jacobian_determinant() const { return det_; }
  // (*this) o inner
  AffineDiffeo compose(const AffineDiffeo& inner) const;
  AffineDiffeo inverse() const;

 private:
  Mat a_;
  Mat a_inv_;
  Point b_{};
  double det_ = 1.0;
};

// (phi^* sigma)(x) = D phi^T sigma(phi(x)) D phi
SymTensorField pullback(const SymTensorField& sigma, const AffineDiffeo& phi);

// Field-spec file: `key = value` lines, `#` comments.
struct FieldSpec {
  int dim = 0;  // 0: not given, take it from the caller
  std::string kind;
  std::vector<std::string> entries;
  std::vector<std::size_t> entry_offsets;  // byte offset of each entry in the source text
  std::string name;
  std::vector<double> params;
};

FieldSpec parse_field_spec(std::string_view text);
FieldSpec load_field_spec(const std::string& path);
SymTensorField build_field(const FieldSpec& spec, int default_dim = 0);

}  // namespace conefield
