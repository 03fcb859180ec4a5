#pragma once

// The noncompact base domain, emulated by nested boxes [-R_j, R_j]^n with
// R_j = R_0 * 2^j that share one lattice spacing. Sups and integrals are
// reported per level and summarised by a convergence verdict.

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "conefield/linalg.hpp"

namespace conefield {

inline constexpr std::size_t kDefaultPointCap = 10'000'000;
// Lattice steps excluded at each box face for derivative-dependent quantities.
inline constexpr int kStencilBand = 2;

struct GridConfig {
  int dim = 1;
  double base_radius = 4.0;
  int levels = 3;
  int points_per_unit = 16;
  std::size_t point_cap = kDefaultPointCap;

  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

enum class Convergence { converged, divergent, inconclusive };
std::string_view to_string(Convergence c);

struct LevelSeries {
  std::vector<double> values;
  double tol_rel = 1e-6;
};

struct Verdict {
  Convergence status = Convergence::inconclusive;
  // Last level value when converged; NaN otherwise. Never an extrapolated limit.
  double value = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> increments;
  std::string note;

  bool converged() const { return status == Convergence::converged; }
};

// converged: the last two increments are within tol_rel * max(1, |last|) and
// do not increase. divergent: the last increment exceeds that bound and is no
// smaller than the one before it. Anything else is inconclusive.
Verdict tail_extrapolate(const LevelSeries& series);

class Grid {
 public:
  struct Sample {
    Point x{};
    std::size_t index = 0;   // on the finest lattice
    int level = 0;           // coarsest level whose box contains x
    int interior_level = 0;  // coarsest level whose derivative-safe interior contains x
  };

  static Grid build(const GridConfig& config);

  const GridConfig& config() const { return config_; }
  int dim() const { return config_.dim; }
  int levels() const { return config_.levels; }
  double spacing() const { return spacing_; }
  double radius(int level) const;
  std::size_t axis_points(int level) const;
  std::size_t num_points(int level) const;
  Point point(int level, std::size_t index) const;
  double weight(int level, std::size_t index) const;
  const std::vector<double>& axis_weights(int level) const;
  bool is_interior(int level, std::size_t index) const;

  std::size_t finest_points() const { return num_points(levels() - 1); }
  Sample sample(std::size_t finest_index) const;

  template <class F>
  void for_each_sample(F&& f) const {
    const std::size_t total = finest_points();
    for (std::size_t i = 0; i < total; ++i) f(sample(i));
  }

  // Weighted quadrature over the level box of values given on the finest lattice.
  double integrate_finest(std::span<const double> finest_values, int level) const;
  // Quadrature of values given on the level's own lattice, in its index order.
  double integrate_level(std::span<const double> level_values, int level) const;

 private:
  GridConfig config_;
  double spacing_ = 0.0;
  std::size_t base_intervals_ = 0;  // per axis at level 0, even
  std::vector<std::vector<double>> axis_weights_;

  std::size_t intervals(int level) const { return base_intervals_ << level; }
};

Grid build_grid(int dim, double base_radius, int levels, int points_per_unit,
                std::size_t point_cap = kDefaultPointCap);

using ScalarFn = std::function<double(const Point&)>;

// Composite tensor-product Simpson rule over the level box.
double integrate(const ScalarFn& f, const Grid& grid, int level);

struct MultiIndex {
  std::array<int, kMaxDim> order{};
  int total() const;
};

// Interior samples of one level (flat indices into that level's lattice)
// with the derivative values there.
struct SampledField {
  int level = 0;
  std::vector<std::size_t> indices;
  std::vector<double> values;
};

SampledField derivative(const ScalarFn& f, const MultiIndex& alpha, const Grid& grid, int level);

// Fixed-shape pairwise summation; bit-reproducible for a given input order.
double pairwise_sum(std::span<const double> values);

// Per-level running maximum over the nested sample sets.
class LevelMax {
 public:
  explicit LevelMax(int levels) : max_(static_cast<std::size_t>(levels), 0.0) {}
  void add(int level, double v) {
    if (level < static_cast<int>(max_.size()) && v > max_[static_cast<std::size_t>(level)])
      max_[static_cast<std::size_t>(level)] = v;
  }
  std::vector<double> cumulative() const;

 private:
  std::vector<double> max_;
};

// Fourth-order central differences on a callable evaluable anywhere.
namespace stencil {

template <class F>
auto first(const F& f, const Point& x, int axis, double h) {
  auto at = [&](int k) {
    Point y = x;
    y[static_cast<std::size_t>(axis)] += k * h;
    return f(y);
  };
  auto r = (at(-2) - at(2)) + 8.0 * (at(1) - at(-1));
  return r * (1.0 / (12.0 * h));
}

template <class F>
auto second(const F& f, const Point& x, int axis, double h) {
  auto at = [&](int k) {
    Point y = x;
    y[static_cast<std::size_t>(axis)] += k * h;
    return f(y);
  };
  auto r = 16.0 * (at(-1) + at(1)) - (at(-2) + at(2)) - 30.0 * at(0);
  return r * (1.0 / (12.0 * h * h));
}

template <class F>
auto mixed(const F& f, const Point& x, int a, int b, double h) {
  auto along_b = [&](const Point& y) { return first(f, y, b, h); };
  return first(along_b, x, a, h);
}

}  // namespace stencil

}  // namespace conefield
