#include "conefield/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "conefield/error.hpp"

namespace conefield {

std::string_view to_string(Convergence c) {
  switch (c) {
    case Convergence::converged: return "converged";
    case Convergence::divergent: return "divergent";
    case Convergence::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Verdict tail_extrapolate(const LevelSeries& series) {
  Verdict out;
  const auto& v = series.values;
  if (v.size() < 2) {
    out.note = "fewer than two levels";
    return out;
  }
  for (std::size_t i = 1; i < v.size(); ++i) out.increments.push_back(std::abs(v[i] - v[i - 1]));

  const double last = v.back();
  if (std::isinf(last)) {
    out.status = Convergence::divergent;
    out.note = "infinite value at the last level";
    return out;
  }
  if (std::isnan(last)) {
    out.note = "NaN at the last level";
    return out;
  }

  const double scale = std::max(1.0, std::abs(last));
  const double bound = series.tol_rel * scale;
  const std::size_t m = out.increments.size();
  const double d_last = out.increments[m - 1];
  const bool have_prev = m >= 2;
  const double d_prev = have_prev ? out.increments[m - 2] : 0.0;
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * scale;

  const bool small = d_last <= bound && (!have_prev || d_prev <= bound);
  const bool non_increasing = !have_prev || d_last <= d_prev * (1.0 + 1e-9) + noise;
  if (small && non_increasing) {
    out.status = Convergence::converged;
    out.value = last;
    out.note = "value is the last level, not an extrapolated limit";
    return out;
  }
  if (have_prev && d_last > bound && d_last >= d_prev) {
    out.status = Convergence::divergent;
    out.note = "increments do not shrink across the last levels";
    return out;
  }
  out.note = small ? "increments within tolerance but growing" : "increments above tolerance but shrinking";
  return out;
}

Grid Grid::build(const GridConfig& config) {
  if (config.dim < 1 || config.dim > kMaxDim)
    throw Error(Errc::invalid_dimension, "grid dimension must be in 1..4, got " + std::to_string(config.dim));
  if (!(config.base_radius > 0.0) || !std::isfinite(config.base_radius))
    throw Error(Errc::invalid_argument, "base radius must be positive and finite");
  if (config.levels < 2) throw Error(Errc::invalid_argument, "at least two levels are required");
  if (config.points_per_unit < 4) throw Error(Errc::invalid_argument, "points per unit must be >= 4");
  if (config.levels > 40) throw Error(Errc::resolution_overflow, "too many levels");

  Grid g;
  g.config_ = config;
  const double raw = 2.0 * config.base_radius * config.points_per_unit;
  auto n0 = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  if (n0 % 2) ++n0;
  if (n0 < 2) n0 = 2;
  g.base_intervals_ = n0;
  g.spacing_ = 2.0 * config.base_radius / static_cast<double>(n0);

  for (int j = 0; j < config.levels; ++j) {
    const double per_axis = static_cast<double>(g.intervals(j) + 1);
    if (std::pow(per_axis, config.dim) > static_cast<double>(config.point_cap))
      throw Error(Errc::resolution_overflow,
                  "level " + std::to_string(j) + " would hold more than " +
                      std::to_string(config.point_cap) + " points");
  }

  for (int j = 0; j < config.levels; ++j) {
    const std::size_t n = g.intervals(j);
    std::vector<double> w(n + 1);
    const double third = g.spacing_ / 3.0;
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == 0 || i == n) w[i] = third;
      else w[i] = (i % 2 ? 4.0 : 2.0) * third;
    }
    g.axis_weights_.push_back(std::move(w));
  }
  return g;
}

double Grid::radius(int level) const { return std::ldexp(config_.base_radius, level); }

std::size_t Grid::axis_points(int level) const { return intervals(level) + 1; }

std::size_t Grid::num_points(int level) const {
  std::size_t total = 1;
  for (int d = 0; d < dim(); ++d) total *= axis_points(level);
  return total;
}

Point Grid::point(int level, std::size_t index) const {
  Point x{};
  const std::size_t p = axis_points(level);
  const double r = radius(level);
  for (int d = dim() - 1; d >= 0; --d) {
    x[static_cast<std::size_t>(d)] = -r + static_cast<double>(index % p) * spacing_;
    index /= p;
  }
  return x;
}

double Grid::weight(int level, std::size_t index) const {
  const std::size_t p = axis_points(level);
  const auto& w = axis_weights_[static_cast<std::size_t>(level)];
  double out = 1.0;
  for (int d = 0; d < dim(); ++d) {
    out *= w[index % p];
    index /= p;
  }
  return out;
}

const std::vector<double>& Grid::axis_weights(int level) const {
  return axis_weights_.at(static_cast<std::size_t>(level));
}

bool Grid::is_interior(int level, std::size_t index) const {
  const std::size_t p = axis_points(level);
  const auto band = static_cast<std::size_t>(kStencilBand);
  for (int d = 0; d < dim(); ++d) {
    const std::size_t k = index % p;
    if (k < band || k + band >= p) return false;
    index /= p;
  }
  return true;
}

Grid::Sample Grid::sample(std::size_t finest_index) const {
  Sample s;
  s.index = finest_index;
  const int top = levels() - 1;
  const std::size_t p = axis_points(top);
  const std::size_t centre = intervals(top) / 2;
  const double r = radius(top);
  std::size_t offset = 0;
  std::size_t idx = finest_index;
  for (int d = dim() - 1; d >= 0; --d) {
    const std::size_t k = idx % p;
    idx /= p;
    s.x[static_cast<std::size_t>(d)] = -r + static_cast<double>(k) * spacing_;
    offset = std::max(offset, k > centre ? k - centre : centre - k);
  }
  s.level = levels();
  s.interior_level = levels();
  for (int j = levels() - 1; j >= 0; --j) {
    const std::size_t half = intervals(j) / 2;
    if (offset <= half) s.level = j;
    if (offset + static_cast<std::size_t>(kStencilBand) <= half) s.interior_level = j;
  }
  return s;
}

double Grid::integrate_finest(std::span<const double> finest_values, int level) const {
  const int top = levels() - 1;
  const std::size_t pf = axis_points(top);
  const std::size_t p = axis_points(level);
  const std::size_t shift = (intervals(top) - intervals(level)) / 2;
  const auto& w = axis_weights_[static_cast<std::size_t>(level)];
  const std::size_t count = num_points(level);
  std::vector<double> terms(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t idx = i;
    std::size_t fine = 0;
    std::size_t stride = 1;
    double weight = 1.0;
    for (int d = 0; d < dim(); ++d) {
      const std::size_t k = idx % p;
      idx /= p;
      weight *= w[k];
      fine += (k + shift) * stride;
      stride *= pf;
    }
    terms[i] = weight * finest_values[fine];
  }
  return pairwise_sum(terms);
}

double Grid::integrate_level(std::span<const double> level_values, int level) const {
  const std::size_t count = num_points(level);
  std::vector<double> terms(count);
  for (std::size_t i = 0; i < count; ++i) terms[i] = weight(level, i) * level_values[i];
  return pairwise_sum(terms);
}

Grid build_grid(int dim, double base_radius, int levels, int points_per_unit, std::size_t point_cap) {
  return Grid::build(GridConfig{dim, base_radius, levels, points_per_unit, point_cap});
}

namespace {

void check_level(const Grid& grid, int level) {
  if (level < 0 || level >= grid.levels())
    throw Error(Errc::invalid_argument, "level " + std::to_string(level) + " out of range");
}

std::string point_text(const Point& x, int dim) {
  std::string s = "(";
  char buf[32];
  for (int d = 0; d < dim; ++d) {
    std::snprintf(buf, sizeof buf, "%s%.17g", d ? ", " : "", x[static_cast<std::size_t>(d)]);
    s += buf;
  }
  return s + ")";
}

}  // namespace

double integrate(const ScalarFn& f, const Grid& grid, int level) {
  check_level(grid, level);
  const std::size_t count = grid.num_points(level);
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Point x = grid.point(level, i);
    values[i] = f(x);
    if (!std::isfinite(values[i]))
      throw Error(Errc::non_finite_sample, "integrand is not finite at " + point_text(x, grid.dim()));
  }
  return grid.integrate_level(values, level);
}

int MultiIndex::total() const {
  int t = 0;
  for (int o : order) t += o;
  return t;
}

SampledField derivative(const ScalarFn& f, const MultiIndex& alpha, const Grid& grid, int level) {
  check_level(grid, level);
  for (int d = 0; d < kMaxDim; ++d) {
    const int o = alpha.order[static_cast<std::size_t>(d)];
    if (o < 0 || (o > 0 && d >= grid.dim()))
      throw Error(Errc::invalid_argument, "multi-index does not match the grid dimension");
  }
  if (alpha.total() > 2)
    throw Error(Errc::stencil_out_of_range, "derivatives above second order are not supported");

  int axes[2] = {-1, -1};
  int used = 0;
  for (int d = 0; d < grid.dim(); ++d)
    for (int k = 0; k < alpha.order[static_cast<std::size_t>(d)]; ++k) axes[used++] = d;

  SampledField out;
  out.level = level;
  const double h = grid.spacing();
  const std::size_t count = grid.num_points(level);
  for (std::size_t i = 0; i < count; ++i) {
    if (!grid.is_interior(level, i)) continue;
    const Point x = grid.point(level, i);
    double v = 0.0;
    if (used == 0) v = f(x);
    else if (used == 1) v = stencil::first(f, x, axes[0], h);
    else if (axes[0] == axes[1]) v = stencil::second(f, x, axes[0], h);
    else v = stencil::mixed(f, x, axes[0], axes[1], h);
    if (!std::isfinite(v))
      throw Error(Errc::non_finite_sample, "derivative is not finite at " + point_text(x, grid.dim()));
    out.indices.push_back(i);
    out.values.push_back(v);
  }
  if (out.indices.empty())
    throw Error(Errc::stencil_out_of_range, "level has no samples inside the stencil band");
  return out;
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 8;
  if (values.size() <= kBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::vector<double> LevelMax::cumulative() const {
  std::vector<double> out(max_.size());
  double running = 0.0;
  for (std::size_t j = 0; j < max_.size(); ++j) {
    running = std::max(running, max_[j]);
    out[j] = running;
  }
  return out;
}

}  // namespace conefield
