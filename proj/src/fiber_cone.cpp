#include "conefield/fiber_cone.hpp"

#include <algorithm>
#include <cmath>

#include "conefield/error.hpp"

namespace conefield {

std::string_view to_string(Membership m) {
  switch (m) {
    case Membership::interior: return "interior";
    case Membership::boundary: return "boundary";
    case Membership::outside: return "outside";
  }
  return "outside";
}

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::leq: return "leq";
    case Relation::geq: return "geq";
    case Relation::equal: return "equal";
    case Relation::incomparable: return "incomparable";
  }
  return "incomparable";
}

FiberClass classify(const Mat& s, double tol) {
  if (!s.is_finite()) throw Error(Errc::eigensolver_failure, "cannot classify a non-finite matrix");
  const int n = s.dim();
  std::array<double, kMaxDim> values{};
  if (n == 1) values[0] = s(0, 0);
  else values = jacobi_eigen(s).values;
  double rho = 0.0;
  for (int i = 0; i < n; ++i) rho = std::max(rho, std::abs(values[static_cast<std::size_t>(i)]));
  const double threshold = tol * (1.0 + rho);

  FiberClass out;
  for (int i = 0; i < n; ++i) {
    const double v = values[static_cast<std::size_t>(i)];
    if (v > threshold) ++out.inertia.positive;
    else if (v < -threshold) ++out.inertia.negative;
    else ++out.inertia.zero;
  }
  if (out.inertia.negative > 0) out.membership = Membership::outside;
  else if (out.inertia.zero > 0) out.membership = Membership::boundary;
  else out.membership = Membership::interior;
  return out;
}

Relation compare(const Mat& a, const Mat& b, double tol) {
  if (a.dim() != b.dim()) throw Error(Errc::dimension_mismatch, "compare: matrices of different dimension");
  const bool leq = classify(b - a, tol).inertia.negative == 0;
  const bool geq = classify(a - b, tol).inertia.negative == 0;
  if (leq && geq) return Relation::equal;
  if (leq) return Relation::leq;
  if (geq) return Relation::geq;
  return Relation::incomparable;
}

double pencil_radius(const Mat& s, const Mat& z) {
  if (s.dim() != z.dim()) throw Error(Errc::dimension_mismatch, "pencil_radius: matrices of different dimension");
  const int n = z.dim();
  const double scale = 1e-12 * std::abs(z.trace());
  if (n == 1) {
    if (!(z(0, 0) > scale) || !std::isfinite(z(0, 0)))
      throw Error(Errc::gauge_not_positive_definite, "gauge value " + z.to_string() + " is not positive definite");
    return std::abs(s(0, 0)) / z(0, 0);
  }
  Mat lower;
  bool ok = cholesky(z, lower);
  for (int i = 0; ok && i < n; ++i) ok = lower(i, i) * lower(i, i) > scale;
  if (!ok)
    throw Error(Errc::gauge_not_positive_definite, "gauge value " + z.to_string() + " is not positive definite");
  return spectral_radius(whiten(lower, s));
}

SplitParts split_parts(const Mat& s) {
  const int n = s.dim();
  SplitParts out{Mat(n), Mat(n)};
  if (n == 1) {
    out.plus(0, 0) = std::max(s(0, 0), 0.0);
    out.minus(0, 0) = std::max(-s(0, 0), 0.0);
    return out;
  }
  const Eigen e = jacobi_eigen(s);
  for (int k = 0; k < n; ++k) {
    const double lambda = e.values[static_cast<std::size_t>(k)];
    Mat& part = lambda > 0 ? out.plus : out.minus;
    const double w = std::abs(lambda);
    if (w == 0.0) continue;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) part(i, j) += w * e.vectors(i, k) * e.vectors(j, k);
  }
  for (Mat* m : {&out.plus, &out.minus})
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j) {
        const double v = 0.5 * ((*m)(i, j) + (*m)(j, i));
        (*m)(i, j) = v;
        (*m)(j, i) = v;
      }
  return out;
}

double interior_margin(const Mat& s) {
  if (!s.is_finite()) return -1.0;
  const int n = s.dim();
  double lo = 0.0;
  double rho = 0.0;
  if (n == 1) {
    lo = s(0, 0);
    rho = std::abs(lo);
  } else {
    const Eigen e = jacobi_eigen(s);
    lo = e.values[0];
    rho = std::max(std::abs(lo), std::abs(e.values[static_cast<std::size_t>(n - 1)]));
  }
  if (rho == 0.0) return 0.0;
  return lo / rho;
}

ConeSpec ConeSpec::orthant(int direction_samples) {
  ConeSpec c;
  c.kind_ = Kind::orthant;
  c.samples_ = direction_samples;
  return c;
}

ConeSpec ConeSpec::ray(const Point& direction, int dim, int direction_samples) {
  double norm = 0.0;
  for (int i = 0; i < dim; ++i) norm += direction[static_cast<std::size_t>(i)] * direction[static_cast<std::size_t>(i)];
  norm = std::sqrt(norm);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw Error(Errc::invalid_argument, "ray direction must be nonzero");
  ConeSpec c;
  c.kind_ = Kind::ray;
  c.dim_ = dim;
  c.samples_ = direction_samples;
  for (int i = 0; i < dim; ++i) c.direction_[static_cast<std::size_t>(i)] = direction[static_cast<std::size_t>(i)] / norm;
  return c;
}

ConeSpec ConeSpec::parse(std::string_view text, int dim, int direction_samples) {
  if (direction_samples < 1) throw Error(Errc::invalid_argument, "direction samples must be positive");
  if (text == "orthant") return orthant(direction_samples);
  if (text.size() >= 7 && text.substr(0, 4) == "ray:" && (text[4] == '+' || text[4] == '-') && text[5] == 'e') {
    const std::string_view idx = text.substr(6);
    if (idx.size() == 1 && idx[0] >= '1' && idx[0] <= '4') {
      const int k = idx[0] - '1';
      if (k >= dim) throw Error(Errc::invalid_argument, "ray direction exceeds the dimension");
      Point d{};
      d[static_cast<std::size_t>(k)] = text[4] == '+' ? 1.0 : -1.0;
      return ray(d, dim, direction_samples);
    }
  }
  throw Error(Errc::invalid_argument, "cone must be 'orthant' or 'ray:+eK' / 'ray:-eK', got '" + std::string(text) + "'");
}

std::vector<Point> ConeSpec::extreme_rays(int dim) const {
  if (kind_ == Kind::ray) return {direction_};
  std::vector<Point> rays;
  for (int i = 0; i < dim; ++i) {
    Point e{};
    e[static_cast<std::size_t>(i)] = 1.0;
    rays.push_back(e);
  }
  return rays;
}

namespace {

double radical_inverse(unsigned index, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * (index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

std::vector<Point> ConeSpec::sample_directions(int dim) const {
  std::vector<Point> dirs = extreme_rays(dim);
  if (kind_ == Kind::ray || dim == 1) return dirs;
  const auto target = static_cast<std::size_t>(std::max(samples_, dim));
  Point diagonal{};
  for (int i = 0; i < dim; ++i) diagonal[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(static_cast<double>(dim));
  if (dirs.size() < target) dirs.push_back(diagonal);
  constexpr unsigned kBases[kMaxDim] = {2, 3, 5, 7};
  for (unsigned k = 1; dirs.size() < target; ++k) {
    Point v{};
    double norm = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double u = radical_inverse(k, kBases[i]);
      v[static_cast<std::size_t>(i)] = u;
      norm += u * u;
    }
    if (norm == 0.0) continue;
    norm = std::sqrt(norm);
    for (int i = 0; i < dim; ++i) v[static_cast<std::size_t>(i)] /= norm;
    dirs.push_back(v);
  }
  return dirs;
}

std::string ConeSpec::to_string() const {
  if (kind_ == Kind::orthant) return "orthant";
  for (int i = 0; i < dim_; ++i) {
    const double v = direction_[static_cast<std::size_t>(i)];
    if (std::abs(std::abs(v) - 1.0) < 1e-15) return std::string("ray:") + (v > 0 ? "+" : "-") + "e" + std::to_string(i + 1);
  }
  std::string s = "ray:(";
  for (int i = 0; i < dim_; ++i) s += (i ? "," : "") + std::to_string(direction_[static_cast<std::size_t>(i)]);
  return s + ")";
}

}  // namespace conefield
