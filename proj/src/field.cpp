#include "conefield/field.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "conefield/error.hpp"
#include "conefield/grid.hpp"

namespace conefield {

Mat Jet::first(std::span<const double> v) const {
  Mat out(dim);
  for (int i = 0; i < dim; ++i)
    if (v[static_cast<std::size_t>(i)] != 0.0) out += v[static_cast<std::size_t>(i)] * a1[static_cast<std::size_t>(i)];
  return out;
}

Mat Jet::second(std::span<const double> v) const {
  Mat out(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      const double w = v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)];
      if (w != 0.0) out += w * a2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  return out;
}

Jet& Jet::operator+=(const Jet& o) {
  a0 += o.a0;
  for (int i = 0; i < dim; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (order >= 1) a1[ui] += o.a1[ui];
    if (order >= 2)
      for (int j = 0; j < dim; ++j) a2[ui][static_cast<std::size_t>(j)] += o.a2[ui][static_cast<std::size_t>(j)];
  }
  return *this;
}

Jet& Jet::operator*=(double s) {
  a0 *= s;
  for (int i = 0; i < dim; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (order >= 1) a1[ui] *= s;
    if (order >= 2)
      for (int j = 0; j < dim; ++j) a2[ui][static_cast<std::size_t>(j)] *= s;
  }
  return *this;
}

namespace {

Jet empty_jet(int dim, int order) {
  Jet j;
  j.dim = dim;
  j.order = order;
  j.a0 = Mat(dim);
  for (int i = 0; i < dim; ++i) {
    j.a1[static_cast<std::size_t>(i)] = Mat(dim);
    for (int k = 0; k < dim; ++k) j.a2[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = Mat(dim);
  }
  return j;
}

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string point_text(const Point& x, int dim) {
  std::string s = "(";
  for (int d = 0; d < dim; ++d) s += (d ? ", " : "") + fmt_num(x[static_cast<std::size_t>(d)]);
  return s + ")";
}

}  // namespace

namespace detail {

class FieldNode {
 public:
  explicit FieldNode(int dim) : dim_(dim) {}
  virtual ~FieldNode() = default;

  int dim() const { return dim_; }
  virtual Mat value(const Point& x) const = 0;
  virtual std::string describe() const = 0;
  virtual bool analytic() const { return false; }

  virtual Jet jet(const Point& x, int order, double h) const {
    Jet j = empty_jet(dim_, order);
    auto f = [this](const Point& y) { return value(y); };
    j.a0 = value(x);
    if (order >= 1)
      for (int i = 0; i < dim_; ++i) j.a1[static_cast<std::size_t>(i)] = stencil::first(f, x, i, h);
    if (order >= 2)
      for (int i = 0; i < dim_; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        j.a2[ui][ui] = stencil::second(f, x, i, h);
        for (int k = i + 1; k < dim_; ++k) {
          const auto uk = static_cast<std::size_t>(k);
          j.a2[ui][uk] = stencil::mixed(f, x, i, k, h);
          j.a2[uk][ui] = j.a2[ui][uk];
        }
      }
    return j;
  }

 private:
  int dim_;
};

}  // namespace detail

namespace {

using detail::FieldNode;

class ExprNode final : public FieldNode {
 public:
  ExprNode(int dim, std::vector<ScalarField> entries) : FieldNode(dim), entries_(std::move(entries)) {}

  Mat value(const Point& x) const override {
    const int n = dim();
    Mat m(n);
    std::size_t k = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const double v = entries_[k++](x);
        m(i, j) = v;
        m(j, i) = v;
      }
    return m;
  }

  std::string describe() const override {
    std::string s = "expr[";
    for (std::size_t k = 0; k < entries_.size(); ++k) s += (k ? ", " : "") + entries_[k].source();
    return s + "]";
  }

 private:
  std::vector<ScalarField> entries_;
};

class ConstantNode final : public FieldNode {
 public:
  explicit ConstantNode(const Mat& m) : FieldNode(m.dim()), value_(m.symmetrized_upper()) {}
  Mat value(const Point&) const override { return value_; }
  bool analytic() const override { return true; }
  Jet jet(const Point&, int order, double) const override {
    Jet j = empty_jet(dim(), order);
    j.a0 = value_;
    return j;
  }
  std::string describe() const override { return "constant" + value_.to_string(); }

 private:
  Mat value_;
};

enum class Builtin { euclidean, gaussian_conformal, inverse_poly_conformal, exp_gauge, cusp2d };

// Scalar factor phi with gradient and Hessian, for the conformal families phi * I.
struct ScalarJet {
  double v = 0.0;
  std::array<double, kMaxDim> d1{};
  std::array<std::array<double, kMaxDim>, kMaxDim> d2{};
};

class BuiltinNode final : public FieldNode {
 public:
  BuiltinNode(Builtin kind, int dim, std::vector<double> params, std::string label)
      : FieldNode(dim), kind_(kind), params_(std::move(params)), label_(std::move(label)) {}

  bool analytic() const override { return true; }
  std::string describe() const override { return label_; }

  Mat value(const Point& x) const override {
    if (kind_ == Builtin::cusp2d) return Mat::diag({1.0, std::exp(-2.0 * x[0])});
    return conformal(x, 0).v * Mat::identity(dim());
  }

  Jet jet(const Point& x, int order, double) const override {
    const int n = dim();
    Jet j = empty_jet(n, order);
    if (kind_ == Builtin::cusp2d) {
      const double e = std::exp(-2.0 * x[0]);
      j.a0 = Mat::diag({1.0, e});
      if (order >= 1) j.a1[0] = Mat::diag({0.0, -2.0 * e});
      if (order >= 2) j.a2[0][0] = Mat::diag({0.0, 4.0 * e});
      return j;
    }
    const ScalarJet s = conformal(x, order);
    const Mat id = Mat::identity(n);
    j.a0 = s.v * id;
    for (int i = 0; i < n && order >= 1; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      j.a1[ui] = s.d1[ui] * id;
      for (int k = 0; k < n && order >= 2; ++k)
        j.a2[ui][static_cast<std::size_t>(k)] = s.d2[ui][static_cast<std::size_t>(k)] * id;
    }
    return j;
  }

 private:
  Builtin kind_;
  std::vector<double> params_;
  std::string label_;

  ScalarJet conformal(const Point& x, int order) const {
    const int n = dim();
    ScalarJet s;
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) r2 += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
    switch (kind_) {
      case Builtin::euclidean:
        s.v = 1.0;
        break;
      case Builtin::gaussian_conformal: {
        const double a = params_[0];
        s.v = std::exp(-a * r2);
        for (int i = 0; i < n && order >= 1; ++i) {
          const auto ui = static_cast<std::size_t>(i);
          s.d1[ui] = -2.0 * a * x[ui] * s.v;
          for (int k = 0; k < n && order >= 2; ++k) {
            const auto uk = static_cast<std::size_t>(k);
            s.d2[ui][uk] = (4.0 * a * a * x[ui] * x[uk] - (i == k ? 2.0 * a : 0.0)) * s.v;
          }
        }
        break;
      }
      case Builtin::inverse_poly_conformal: {
        const double p = params_[0];
        const double base = 1.0 + r2;
        s.v = std::pow(base, -p);
        const double g1 = std::pow(base, -p - 1.0);
        const double g2 = std::pow(base, -p - 2.0);
        for (int i = 0; i < n && order >= 1; ++i) {
          const auto ui = static_cast<std::size_t>(i);
          s.d1[ui] = -2.0 * p * x[ui] * g1;
          for (int k = 0; k < n && order >= 2; ++k) {
            const auto uk = static_cast<std::size_t>(k);
            s.d2[ui][uk] = 4.0 * p * (p + 1.0) * x[ui] * x[uk] * g2 - (i == k ? 2.0 * p * g1 : 0.0);
          }
        }
        break;
      }
      case Builtin::exp_gauge: {
        std::array<double, kMaxDim> c{};
        if (params_.size() == 1) c[0] = params_[0];
        else std::copy(params_.begin(), params_.end(), c.begin());
        double arg = 0.0;
        for (int i = 0; i < n; ++i) arg += c[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
        s.v = std::exp(arg);
        for (int i = 0; i < n && order >= 1; ++i) {
          const auto ui = static_cast<std::size_t>(i);
          s.d1[ui] = c[ui] * s.v;
          for (int k = 0; k < n && order >= 2; ++k) s.d2[ui][static_cast<std::size_t>(k)] = c[ui] * c[static_cast<std::size_t>(k)] * s.v;
        }
        break;
      }
      case Builtin::cusp2d:
        break;
    }
    return s;
  }
};

class LinearNode final : public FieldNode {
 public:
  LinearNode(int dim, std::vector<double> coefs, std::vector<SymTensorField> parts)
      : FieldNode(dim), coefs_(std::move(coefs)), parts_(std::move(parts)) {}

  Mat value(const Point& x) const override {
    Mat m(dim());
    for (std::size_t i = 0; i < parts_.size(); ++i) m += coefs_[i] * parts_[i](x);
    return m;
  }

  bool analytic() const override {
    return std::all_of(parts_.begin(), parts_.end(), [](const auto& p) { return p.analytic_jets(); });
  }

  Jet jet(const Point& x, int order, double h) const override {
    Jet out = empty_jet(dim(), order);
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      Jet j = parts_[i].jet(x, order, h);
      j *= coefs_[i];
      out += j;
    }
    return out;
  }

  std::string describe() const override {
    std::string s = "(";
    for (std::size_t i = 0; i < parts_.size(); ++i)
      s += (i ? " + " : "") + fmt_num(coefs_[i]) + "*" + parts_[i].describe();
    return s + ")";
  }

 private:
  std::vector<double> coefs_;
  std::vector<SymTensorField> parts_;
};

class PullbackNode final : public FieldNode {
 public:
  PullbackNode(SymTensorField child, AffineDiffeo phi)
      : FieldNode(child.dim()), child_(std::move(child)), phi_(std::move(phi)) {}

  Mat value(const Point& x) const override { return congruence(phi_.jacobian(), child_(phi_(x))); }
  bool analytic() const override { return child_.analytic_jets(); }

  Jet jet(const Point& x, int order, double h) const override {
    const int n = dim();
    const Mat& a = phi_.jacobian();
    const Jet c = child_.jet(phi_(x), order, h);
    Jet j = empty_jet(n, order);
    j.a0 = congruence(a, c.a0);
    for (int i = 0; i < n && order >= 1; ++i) {
      Mat d(n);
      for (int m = 0; m < n; ++m) d += a(m, i) * c.a1[static_cast<std::size_t>(m)];
      j.a1[static_cast<std::size_t>(i)] = congruence(a, d);
    }
    for (int i = 0; i < n && order >= 2; ++i)
      for (int k = i; k < n; ++k) {
        Mat d(n);
        for (int m = 0; m < n; ++m)
          for (int l = 0; l < n; ++l)
            d += (a(m, i) * a(l, k)) * c.a2[static_cast<std::size_t>(m)][static_cast<std::size_t>(l)];
        j.a2[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = congruence(a, d);
        j.a2[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = j.a2[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      }
    return j;
  }

  std::string describe() const override {
    return "pullback(" + child_.describe() + ", A=" + phi_.jacobian().to_string() + ")";
  }

 private:
  SymTensorField child_;
  AffineDiffeo phi_;
};

class BumpNode final : public FieldNode {
 public:
  BumpNode(Point center, double radius, double amplitude, const Mat& direction)
      : FieldNode(direction.dim()), center_(center), radius_(radius), amplitude_(amplitude),
        direction_(direction.symmetrized_upper()) {}

  Mat value(const Point& x) const override {
    double r2 = 0.0;
    for (int i = 0; i < dim(); ++i) {
      const double d = x[static_cast<std::size_t>(i)] - center_[static_cast<std::size_t>(i)];
      r2 += d * d;
    }
    return (amplitude_ * bump_profile(std::sqrt(r2) / radius_)) * direction_;
  }

  std::string describe() const override {
    return "bump(center=" + point_text(center_, dim()) + ", radius=" + fmt_num(radius_) +
           ", amplitude=" + fmt_num(amplitude_) + ", direction=" + direction_.to_string() + ")";
  }

 private:
  Point center_;
  double radius_;
  double amplitude_;
  Mat direction_;
};

class EnvelopeNode final : public FieldNode {
 public:
  explicit EnvelopeNode(SymTensorField sigma) : FieldNode(sigma.dim()), sigma_(std::move(sigma)) {}

  Mat value(const Point& x) const override {
    const double f = sigma_(x).frobenius();
    return std::sqrt(1.0 + f * f) * Mat::identity(dim());
  }

  std::string describe() const override { return "envelope(" + sigma_.describe() + ")"; }

 private:
  SymTensorField sigma_;
};

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim)
    throw Error(Errc::invalid_dimension, "field dimension must be in 1..4, got " + std::to_string(dim));
}

void check_finite_params(std::span<const double> params) {
  for (double p : params)
    if (!std::isfinite(p)) throw Error(Errc::non_finite_parameter, "builtin parameter is not finite");
}

}  // namespace

int SymTensorField::dim() const { return node_->dim(); }

Mat SymTensorField::operator()(const Point& x) const { return node_->value(x); }

Mat SymTensorField::checked(const Point& x) const {
  Mat m = node_->value(x);
  if (!m.is_finite())
    throw Error(Errc::non_finite_sample, "field " + describe() + " is not finite at " + point_text(x, dim()));
  return m;
}

Jet SymTensorField::jet(const Point& x, int order, double h) const {
  if (order < 0 || order > 2) throw Error(Errc::invalid_argument, "jet order must be 0, 1 or 2");
  return node_->jet(x, order, h);
}

bool SymTensorField::analytic_jets() const { return node_->analytic(); }

std::string SymTensorField::describe() const { return node_->describe(); }

SymTensorField linear_combination(std::span<const double> coefficients, std::span<const SymTensorField> fields) {
  if (fields.empty() || coefficients.size() != fields.size())
    throw Error(Errc::invalid_argument, "linear combination needs matching, nonempty inputs");
  const int n = fields[0].dim();
  for (const auto& f : fields)
    if (f.dim() != n) throw Error(Errc::dimension_mismatch, "linear combination of fields of different dimension");
  return SymTensorField(std::make_shared<LinearNode>(
      n, std::vector<double>(coefficients.begin(), coefficients.end()),
      std::vector<SymTensorField>(fields.begin(), fields.end())));
}

SymTensorField operator+(const SymTensorField& a, const SymTensorField& b) {
  const double c[] = {1.0, 1.0};
  const SymTensorField f[] = {a, b};
  return linear_combination(c, f);
}

SymTensorField operator-(const SymTensorField& a, const SymTensorField& b) {
  const double c[] = {1.0, -1.0};
  const SymTensorField f[] = {a, b};
  return linear_combination(c, f);
}

SymTensorField operator*(double s, const SymTensorField& a) {
  const double c[] = {s};
  const SymTensorField f[] = {a};
  return linear_combination(c, f);
}

SymTensorField expr_field(int dim, std::span<const std::string> entries) {
  check_dim(dim);
  const std::size_t need = static_cast<std::size_t>(dim * (dim + 1) / 2);
  if (entries.size() != need)
    throw Error(Errc::bad_entry_count, "dimension " + std::to_string(dim) + " needs " + std::to_string(need) +
                                           " entries, got " + std::to_string(entries.size()));
  std::vector<ScalarField> parsed;
  parsed.reserve(need);
  for (const auto& e : entries) parsed.push_back(parse_expr(e, dim));
  return SymTensorField(std::make_shared<ExprNode>(dim, std::move(parsed)));
}

SymTensorField constant_field(const Mat& value) {
  check_dim(value.dim());
  return SymTensorField(std::make_shared<ConstantNode>(value));
}

SymTensorField zero_field(int dim) { return constant_field(Mat(dim)); }

std::vector<std::string> builtin_names() {
  return {"euclidean", "gaussian_conformal", "inverse_poly_conformal", "exp_gauge", "cusp2d"};
}

SymTensorField builtin_field(std::string_view name, int dim, std::span<const double> params) {
  check_dim(dim);
  check_finite_params(params);
  auto need = [&](std::size_t count) {
    if (params.size() != count)
      throw Error(Errc::invalid_argument, std::string(name) + " takes " + std::to_string(count) + " parameter(s)");
  };
  std::string label(name);
  if (!params.empty()) {
    label += "(";
    for (std::size_t i = 0; i < params.size(); ++i) label += (i ? ", " : "") + fmt_num(params[i]);
    label += ")";
  }
  std::vector<double> p(params.begin(), params.end());
  if (name == "euclidean") {
    need(0);
    return SymTensorField(std::make_shared<BuiltinNode>(Builtin::euclidean, dim, p, label));
  }
  if (name == "gaussian_conformal") {
    need(1);
    if (!(p[0] > 0)) throw Error(Errc::invalid_argument, "gaussian_conformal needs a > 0");
    return SymTensorField(std::make_shared<BuiltinNode>(Builtin::gaussian_conformal, dim, p, label));
  }
  if (name == "inverse_poly_conformal") {
    need(1);
    if (!(p[0] > 0)) throw Error(Errc::invalid_argument, "inverse_poly_conformal needs p > 0");
    return SymTensorField(std::make_shared<BuiltinNode>(Builtin::inverse_poly_conformal, dim, p, label));
  }
  if (name == "exp_gauge") {
    if (p.size() != 1 && p.size() != static_cast<std::size_t>(dim))
      throw Error(Errc::invalid_argument, "exp_gauge takes one coefficient or one per coordinate");
    return SymTensorField(std::make_shared<BuiltinNode>(Builtin::exp_gauge, dim, p, label));
  }
  if (name == "cusp2d") {
    need(0);
    if (dim != 2) throw Error(Errc::dimension_mismatch, "cusp2d is defined for dimension 2 only");
    return SymTensorField(std::make_shared<BuiltinNode>(Builtin::cusp2d, dim, p, label));
  }
  throw Error(Errc::unknown_builtin, "unknown builtin '" + std::string(name) + "'");
}

double bump_profile(double t) {
  if (!(t < 1.0) || t <= -1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

SymTensorField bump(std::span<const double> center, double radius, double amplitude, const Mat& direction) {
  check_dim(direction.dim());
  if (center.size() != static_cast<std::size_t>(direction.dim()))
    throw Error(Errc::dimension_mismatch, "bump center and direction dimensions differ");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw Error(Errc::invalid_argument, "bump radius must be positive");
  if (!std::isfinite(amplitude) || !direction.is_finite())
    throw Error(Errc::non_finite_parameter, "bump parameters must be finite");
  for (int i = 0; i < direction.dim(); ++i)
    for (int j = 0; j < i; ++j)
      if (direction(i, j) != direction(j, i)) throw Error(Errc::invalid_argument, "bump direction must be symmetric");
  Point c{};
  std::copy(center.begin(), center.end(), c.begin());
  return SymTensorField(std::make_shared<BumpNode>(c, radius, amplitude, direction));
}

SymTensorField frobenius_envelope(const SymTensorField& sigma) {
  return SymTensorField(std::make_shared<EnvelopeNode>(sigma));
}

AffineDiffeo AffineDiffeo::make(const Mat& a, std::span<const double> b) {
  check_dim(a.dim());
  if (b.size() != static_cast<std::size_t>(a.dim()))
    throw Error(Errc::dimension_mismatch, "affine shift has the wrong dimension");
  AffineDiffeo phi;
  phi.a_ = a;
  phi.det_ = determinant(a);
  if (!(std::abs(phi.det_) > 1e-12) || !invert(a, phi.a_inv_))
    throw Error(Errc::invalid_argument, "affine map is not invertible (|det A| <= 1e-12)");
  std::copy(b.begin(), b.end(), phi.b_.begin());
  return phi;
}

AffineDiffeo AffineDiffeo::identity(int dim) {
  const std::array<double, kMaxDim> zero{};
  return make(Mat::identity(dim), std::span<const double>(zero.data(), static_cast<std::size_t>(dim)));
}

Point AffineDiffeo::operator()(const Point& x) const {
  Point y{};
  for (int i = 0; i < dim(); ++i) {
    double v = b_[static_cast<std::size_t>(i)];
    for (int k = 0; k < dim(); ++k) v += a_(i, k) * x[static_cast<std::size_t>(k)];
    y[static_cast<std::size_t>(i)] = v;
  }
  return y;
}

Point AffineDiffeo::inverse_map(const Point& y) const {
  Point x{};
  for (int i = 0; i < dim(); ++i) {
    double v = 0.0;
    for (int k = 0; k < dim(); ++k) v += a_inv_(i, k) * (y[static_cast<std::size_t>(k)] - b_[static_cast<std::size_t>(k)]);
    x[static_cast<std::size_t>(i)] = v;
  }
  return x;
}

AffineDiffeo AffineDiffeo::compose(const AffineDiffeo& inner) const {
  if (inner.dim() != dim()) throw Error(Errc::dimension_mismatch, "composing affine maps of different dimension");
  const Point b = (*this)(inner.b_);
  return make(a_ * inner.a_, std::span<const double>(b.data(), static_cast<std::size_t>(dim())));
}

AffineDiffeo AffineDiffeo::inverse() const {
  Point b{};
  for (int i = 0; i < dim(); ++i) {
    double v = 0.0;
    for (int k = 0; k < dim(); ++k) v -= a_inv_(i, k) * b_[static_cast<std::size_t>(k)];
    b[static_cast<std::size_t>(i)] = v;
  }
  return make(a_inv_, std::span<const double>(b.data(), static_cast<std::size_t>(dim())));
}

SymTensorField pullback(const SymTensorField& sigma, const AffineDiffeo& phi) {
  if (sigma.dim() != phi.dim()) throw Error(Errc::dimension_mismatch, "pullback: field and map dimensions differ");
  return SymTensorField(std::make_shared<PullbackNode>(sigma, phi));
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void spec_error(Errc code, const std::string& what, std::size_t offset) {
  throw Error(code, "field spec: " + what + " at byte " + std::to_string(offset), offset);
}

// `"a", "b"` -> {a, b} with the source offset of each string's first byte.
void parse_quoted_list(std::string_view value, std::size_t base, FieldSpec& spec) {
  std::size_t i = 0;
  auto skip = [&] {
    while (i < value.size() && std::isspace(static_cast<unsigned char>(value[i]))) ++i;
  };
  skip();
  if (i == value.size()) return;
  for (;;) {
    skip();
    if (i >= value.size() || value[i] != '"') spec_error(Errc::syntax_error, "expected a quoted expression", base + i);
    const std::size_t start = ++i;
    while (i < value.size() && value[i] != '"') ++i;
    if (i >= value.size()) spec_error(Errc::syntax_error, "unterminated string", base + start - 1);
    spec.entries.emplace_back(value.substr(start, i - start));
    spec.entry_offsets.push_back(base + start);
    ++i;
    skip();
    if (i == value.size()) return;
    if (value[i] != ',') spec_error(Errc::syntax_error, "expected ','", base + i);
    ++i;
  }
}

}  // namespace

FieldSpec parse_field_spec(std::string_view text) {
  FieldSpec spec;
  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = text.size();
    std::string_view line = text.substr(line_start, line_end - line_start);

    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
      if (line[k] == '"') quoted = !quoted;
      else if (line[k] == '#' && !quoted) {
        line = line.substr(0, k);
        break;
      }
    }
    if (!trim(line).empty()) {
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos) spec_error(Errc::syntax_error, "expected 'key = value'", line_start);
      const std::string_view key = trim(line.substr(0, eq));
      std::string_view raw = line.substr(eq + 1);
      std::size_t value_offset = line_start + eq + 1;
      while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.front()))) {
        raw.remove_prefix(1);
        ++value_offset;
      }
      const std::string_view value = trim(raw);

      if (key == "dim") {
        int d = 0;
        const auto r = std::from_chars(value.data(), value.data() + value.size(), d);
        if (r.ec != std::errc() || r.ptr != value.data() + value.size())
          spec_error(Errc::syntax_error, "dim must be an integer", value_offset);
        check_dim(d);
        spec.dim = d;
      } else if (key == "kind") {
        if (value != "expr" && value != "builtin")
          spec_error(Errc::syntax_error, "kind must be 'expr' or 'builtin'", value_offset);
        spec.kind = std::string(value);
      } else if (key == "name") {
        spec.name = std::string(value);
      } else if (key == "entries") {
        parse_quoted_list(value, value_offset, spec);
      } else if (key == "params") {
        std::size_t i = 0;
        while (i < value.size()) {
          std::size_t j = value.find(',', i);
          if (j == std::string_view::npos) j = value.size();
          const std::string_view item = trim(value.substr(i, j - i));
          double v = 0.0;
          const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
          if (item.empty() || r.ec != std::errc() || r.ptr != item.data() + item.size())
            spec_error(Errc::syntax_error, "params must be comma-separated reals", value_offset + i);
          if (!std::isfinite(v)) throw Error(Errc::non_finite_parameter, "field spec: parameter is not finite");
          spec.params.push_back(v);
          i = j + 1;
        }
      } else {
        spec_error(Errc::syntax_error, "unknown key '" + std::string(key) + "'", line_start);
      }
    }
    if (line_end == text.size()) break;
    line_start = line_end + 1;
  }
  if (spec.kind.empty()) throw Error(Errc::syntax_error, "field spec: missing 'kind'", 0);
  return spec;
}

FieldSpec load_field_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open field spec '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_field_spec(ss.str());
}

SymTensorField build_field(const FieldSpec& spec, int default_dim) {
  int dim = spec.dim;
  if (dim == 0) dim = default_dim;
  if (spec.dim != 0 && default_dim != 0 && spec.dim != default_dim)
    throw Error(Errc::dimension_mismatch, "field spec has dim " + std::to_string(spec.dim) +
                                              " but " + std::to_string(default_dim) + " was requested");
  check_dim(dim);
  if (spec.kind == "builtin") return builtin_field(spec.name, dim, spec.params);
  if (spec.kind != "expr") throw Error(Errc::syntax_error, "field spec: unknown kind '" + spec.kind + "'", 0);
  try {
    return expr_field(dim, spec.entries);
  } catch (const Error& e) {
    if (!e.offset()) throw;
    // Report parse errors relative to the whole spec text.
    std::size_t entry = 0;
    for (std::size_t k = 0; k < spec.entries.size(); ++k) {
      try {
        (void)parse_expr(spec.entries[k], dim);
      } catch (const Error&) {
        entry = k;
        break;
      }
    }
    const std::size_t base = entry < spec.entry_offsets.size() ? spec.entry_offsets[entry] : 0;
    const std::size_t at = base + *e.offset();
    std::string msg = e.what();
    msg = "entry " + std::to_string(entry + 1) + ": " + msg.substr(0, msg.rfind(" at byte")) + " at byte " +
          std::to_string(at);
    throw Error(e.code(), msg, at);
  }
}

}  // namespace conefield
