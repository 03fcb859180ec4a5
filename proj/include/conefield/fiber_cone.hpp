#pragma once

// Pointwise cone calculus on symmetric matrices. The fiber cone is the
// positive semidefinite cone (union of the fixed-rank strata r = i_p).

#include <string>
#include <string_view>
#include <vector>

#include "conefield/linalg.hpp"

namespace conefield {

enum class Membership { interior, boundary, outside };
std::string_view to_string(Membership m);

struct Inertia {
  int positive = 0;
  int negative = 0;
  int zero = 0;
};

struct FiberClass {
  Inertia inertia;
  Membership membership = Membership::outside;
};

// Eigenvalues within tol * (1 + spectral radius) of zero count as zero.
FiberClass classify(const Mat& s, double tol);

enum class Relation { leq, geq, equal, incomparable };
std::string_view to_string(Relation r);

// leq iff b - a is PSD (within tol), geq iff a - b is.
Relation compare(const Mat& a, const Mat& b, double tol);

// min{lambda >= 0 : -lambda Z <= S <= lambda Z} = max |eig(Z^{-1} S)|,
// via Cholesky whitening and Jacobi. Throws gauge_not_positive_definite
// unless every Cholesky pivot exceeds 1e-12 * trace(Z).
double pencil_radius(const Mat& s, const Mat& z);

struct SplitParts {
  Mat plus;
  Mat minus;
};

// Spectral positive and negative parts: s = plus - minus, plus * minus = 0.
SplitParts split_parts(const Mat& s);

// lambda_min / spectral radius; 0 for the zero matrix. Positive iff s is
// positive definite.
double interior_margin(const Mat& s);

// Tangent cone K_TM used to induce cones on jets.
class ConeSpec {
 public:
  enum class Kind { orthant, ray };

  static ConeSpec orthant(int direction_samples = 64);
  // Unit direction (normalised here).
  static ConeSpec ray(const Point& direction, int dim, int direction_samples = 64);
  // "orthant" or "ray:+eK" / "ray:-eK".
  static ConeSpec parse(std::string_view text, int dim, int direction_samples = 64);

  Kind kind() const { return kind_; }
  int direction_samples() const { return samples_; }
  // Only orthants are solid for n >= 2.
  bool solid(int dim) const { return kind_ == Kind::orthant || dim == 1; }
  // Generators of the cone; A1(v) is linear so checking these is exact.
  std::vector<Point> extreme_rays(int dim) const;
  // Quasi-uniform unit vectors in the cone, including the extreme rays.
  std::vector<Point> sample_directions(int dim) const;
  std::string to_string() const;

  friend bool operator==(const ConeSpec&, const ConeSpec&) = default;

 private:
  Kind kind_ = Kind::orthant;
  Point direction_{};
  int dim_ = 0;
  int samples_ = 64;
};

}  // namespace conefield
