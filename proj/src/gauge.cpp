#include "conefield/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "conefield/error.hpp"

namespace conefield {

namespace {

constexpr int kMaxFields = 3;

std::string point_text(const Point& x, int dim) {
  std::string s = "(";
  char buf[32];
  for (int d = 0; d < dim; ++d) {
    std::snprintf(buf, sizeof buf, "%s%.10g", d ? ", " : "", x[static_cast<std::size_t>(d)]);
    s += buf;
  }
  return s + ")";
}

bool jet_finite(const Jet& j) {
  if (!j.a0.is_finite()) return false;
  for (int i = 0; i < j.dim; ++i) {
    if (j.order >= 1 && !j.a1[static_cast<std::size_t>(i)].is_finite()) return false;
    for (int k = 0; k < j.dim && j.order >= 2; ++k)
      if (!j.a2[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].is_finite()) return false;
  }
  return true;
}

void check_order(int k) {
  if (k < 0 || k > kMaxJetOrder) throw Error(Errc::invalid_argument, "jet order must be 0, 1 or 2");
}

void check_dims(const SymTensorField& f, const Grid& grid) {
  if (f.dim() != grid.dim())
    throw Error(Errc::dimension_mismatch, "field of dimension " + std::to_string(f.dim()) +
                                              " on a grid of dimension " + std::to_string(grid.dim()));
}

// Values of a field on the finest lattice, so that finite-difference jets at
// interior samples reuse lattice values instead of re-evaluating the field.
// Fields with closed-form jets, and lattices over the budget, are not cached.
class LatticeJets {
 public:
  static constexpr std::size_t kBudget = std::size_t{1} << 20;

  LatticeJets(const SymTensorField& field, const Grid& grid, int k) : field_(field), grid_(grid) {
    const std::size_t total = grid.finest_points();
    if (k == 0 || field.analytic_jets() || total > kBudget) return;
    values_.resize(total);
    grid.for_each_sample([&](const Grid::Sample& s) { values_[s.index] = field.checked(s.x); });
    const std::size_t p = grid.axis_points(grid.levels() - 1);
    std::size_t stride = 1;
    for (int d = grid.dim() - 1; d >= 0; --d) {
      stride_[static_cast<std::size_t>(d)] = static_cast<std::ptrdiff_t>(stride);
      stride *= p;
    }
  }

  Mat value(const Grid::Sample& s) const { return values_.empty() ? field_.checked(s.x) : values_[s.index]; }

  Jet jet(const Grid::Sample& s, int k) const {
    if (values_.empty()) return field_.jet(s.x, k, grid_.spacing());
    const int n = grid_.dim();
    const double h = grid_.spacing();
    const auto at = [&](std::ptrdiff_t offset) -> const Mat& {
      return values_[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(s.index) + offset)];
    };
    // first-derivative weights at offsets -2..2
    constexpr double c1[5] = {1.0, -8.0, 0.0, 8.0, -1.0};
    Jet j;
    j.dim = n;
    j.order = k;
    j.a0 = at(0);
    for (int i = 0; i < n; ++i) {
      const std::ptrdiff_t si = stride_[static_cast<std::size_t>(i)];
      const auto ui = static_cast<std::size_t>(i);
      j.a1[ui] = ((at(-2 * si) - at(2 * si)) + 8.0 * (at(si) - at(-si))) * (1.0 / (12.0 * h));
      if (k < 2) continue;
      j.a2[ui][ui] = (16.0 * (at(-si) + at(si)) - (at(-2 * si) + at(2 * si)) - 30.0 * at(0)) * (1.0 / (12.0 * h * h));
      for (int m = i + 1; m < n; ++m) {
        const std::ptrdiff_t sm = stride_[static_cast<std::size_t>(m)];
        Mat acc(n);
        for (int a = 0; a < 5; ++a)
          for (int b = 0; b < 5; ++b) {
            const double w = c1[a] * c1[b];
            if (w != 0.0) acc += w * at((a - 2) * si + (b - 2) * sm);
          }
        acc *= 1.0 / (144.0 * h * h);
        j.a2[ui][static_cast<std::size_t>(m)] = acc;
        j.a2[static_cast<std::size_t>(m)][ui] = acc;
      }
    }
    if (k < 2)
      for (int i = 0; i < n; ++i)
        for (int m = 0; m < n; ++m) j.a2[static_cast<std::size_t>(i)][static_cast<std::size_t>(m)] = Mat(n);
    return j;
  }

 private:
  SymTensorField field_;
  const Grid& grid_;
  std::vector<Mat> values_;
  std::array<std::ptrdiff_t, kMaxDim> stride_{};
};

// Calls visit(sample, order, level, mats) for every cone constraint: the
// values at every sample (order 0, keyed by sample.level) and the directional
// jets A1(v), A2(v, v) at interior samples (keyed by sample.interior_level).
template <class Visit>
void for_each_constraint(std::span<const SymTensorField> fields, int k, const ConeSpec& cone, const Grid& grid,
                         Visit&& visit) {
  const int n = grid.dim();
  const auto rays = cone.extreme_rays(n);
  const std::vector<Point> dirs = k >= 2 ? cone.sample_directions(n) : std::vector<Point>{};
  const std::size_t count = fields.size();
  std::vector<LatticeJets> lattice;
  lattice.reserve(count);
  for (const auto& f : fields) lattice.emplace_back(f, grid, k);
  std::array<Mat, kMaxFields> mats;
  std::array<Jet, kMaxFields> jets;

  grid.for_each_sample([&](const Grid::Sample& s) {
    const bool with_jets = k >= 1 && s.interior_level < grid.levels();
    if (!with_jets) {
      for (std::size_t i = 0; i < count; ++i) mats[i] = lattice[i].value(s);
      visit(s, 0, s.level, std::span<const Mat>(mats.data(), count));
      return;
    }
    for (std::size_t i = 0; i < count; ++i) {
      jets[i] = lattice[i].jet(s, k);
      if (!jet_finite(jets[i]))
        throw Error(Errc::non_finite_sample,
                    "jet of " + fields[i].describe() + " is not finite at " + point_text(s.x, n));
      mats[i] = jets[i].a0;
    }
    visit(s, 0, s.level, std::span<const Mat>(mats.data(), count));
    for (const Point& v : rays) {
      for (std::size_t i = 0; i < count; ++i) mats[i] = jets[i].first(v);
      visit(s, 1, s.interior_level, std::span<const Mat>(mats.data(), count));
    }
    for (const Point& v : dirs) {
      for (std::size_t i = 0; i < count; ++i) mats[i] = jets[i].second(v);
      visit(s, 2, s.interior_level, std::span<const Mat>(mats.data(), count));
    }
  });
}

// Per-level running minimum over the nested sample sets.
class LevelMin {
 public:
  explicit LevelMin(int levels) : min_(static_cast<std::size_t>(levels), std::numeric_limits<double>::infinity()) {}
  void add(int level, double v) {
    if (level < static_cast<int>(min_.size()) && v < min_[static_cast<std::size_t>(level)])
      min_[static_cast<std::size_t>(level)] = v;
  }
  std::vector<double> cumulative() const {
    std::vector<double> out(min_.size());
    double running = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < min_.size(); ++j) {
      running = std::min(running, min_[j]);
      out[j] = running;
    }
    return out;
  }

 private:
  std::vector<double> min_;
};

}  // namespace

JetField jet_prolong(const SymTensorField& sigma, int k, const Grid& grid, int level) {
  check_order(k);
  check_dims(sigma, grid);
  if (level < 0 || level >= grid.levels()) throw Error(Errc::invalid_argument, "level out of range");
  JetField out;
  out.order = k;
  out.level = level;
  const double h = grid.spacing();
  const std::size_t count = grid.num_points(level);
  for (std::size_t i = 0; i < count; ++i) {
    if (k >= 1 && !grid.is_interior(level, i)) continue;
    const Point x = grid.point(level, i);
    Jet j = sigma.jet(x, k, h);
    if (!jet_finite(j))
      throw Error(Errc::non_finite_sample, "jet is not finite at " + point_text(x, grid.dim()));
    out.indices.push_back(i);
    out.points.push_back(x);
    out.jets.push_back(std::move(j));
  }
  if (out.jets.empty()) throw Error(Errc::stencil_out_of_range, "level has no samples inside the stencil band");
  return out;
}

PositivityResult is_positive(const SymTensorField& sigma, int k, const ConeSpec& cone, const Grid& grid,
                             const CalcOptions& options) {
  check_order(k);
  check_dims(sigma, grid);
  const int levels = grid.levels();
  std::vector<int> first_failure_level;
  int failing_level = levels;
  LevelMin margins(levels);
  PositivityResult out;
  double worst = std::numeric_limits<double>::infinity();
  const SymTensorField fields[] = {sigma};

  for_each_constraint(fields, k, cone, grid, [&](const Grid::Sample& s, int order, int level, std::span<const Mat> m) {
    const double margin = interior_margin(m[0]);
    margins.add(level, margin);
    if (classify(m[0], options.tol_pd).membership == Membership::outside) failing_level = std::min(failing_level, level);
    if (margin < worst) {
      worst = margin;
      out.worst_point = s.x;
      out.worst_order = order;
    }
  });
  out.min_margin = margins.cumulative();
  for (int j = 0; j < levels; ++j) out.per_level.push_back(j < failing_level);
  out.positive = failing_level == levels;
  return out;
}

GaugeSection gauge_admissible(const SymTensorField& zeta, int k, const ConeSpec& cone, const Grid& grid,
                              const CalcOptions& options) {
  check_order(k);
  check_dims(zeta, grid);
  if (k >= 1 && !cone.solid(grid.dim()))
    throw Error(Errc::invalid_argument, "jet gauges need a solid tangent cone (use orthant for n >= 2)");
  const int levels = grid.levels();
  LevelMin margins(levels);
  LevelMin eigen(levels);
  double worst = std::numeric_limits<double>::infinity();
  Point worst_point{};
  int worst_order = 0;
  const SymTensorField fields[] = {zeta};

  for_each_constraint(fields, k, cone, grid, [&](const Grid::Sample& s, int order, int level, std::span<const Mat> m) {
    const double margin = interior_margin(m[0]);
    margins.add(level, margin);
    if (order == 0) eigen.add(level, min_eigenvalue(m[0]));
    if (margin < worst) {
      worst = margin;
      worst_point = s.x;
      worst_order = order;
    }
  });

  if (!(worst > options.tol_pd)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", worst);
    throw Error(Errc::gauge_not_interior, "gauge " + zeta.describe() + " is not interior at order " +
                                              std::to_string(worst_order) + ": margin " + buf + " at " +
                                              point_text(worst_point, grid.dim()));
  }
  GaugeSection g;
  g.field = zeta;
  g.order = k;
  g.cone = cone;
  g.grid = grid.config();
  g.margin = margins.cumulative();
  g.min_eigenvalue = eigen.cumulative();
  g.margin_decays = g.min_eigenvalue.back() < g.min_eigenvalue.front();
  return g;
}

NormResult zeta_norm(const SymTensorField& sigma, const GaugeSection& zeta, int k, const Grid& grid,
                     const CalcOptions& options) {
  check_order(k);
  check_dims(sigma, grid);
  if (k > zeta.order)
    throw Error(Errc::invalid_argument, "gauge is certified to order " + std::to_string(zeta.order) +
                                            ", norm requested at order " + std::to_string(k));
  if (!(zeta.grid == grid.config())) throw Error(Errc::invalid_argument, "gauge was certified on a different grid");

  const int levels = grid.levels();
  std::vector<LevelMax> per_order(static_cast<std::size_t>(k + 1), LevelMax(levels));
  double worst = -1.0;
  NormResult out;
  const SymTensorField fields[] = {sigma, zeta.field};

  for_each_constraint(fields, k, zeta.cone, grid, [&](const Grid::Sample& s, int order, int level, std::span<const Mat> m) {
    double r = 0.0;
    if (order == 0) {
      r = pencil_radius(m[0], m[1]);
    } else {
      try {
        r = pencil_radius(m[0], m[1]);
      } catch (const Error& e) {
        if (e.code() != Errc::gauge_not_positive_definite) throw;
        throw Error(Errc::gauge_degenerate_direction, "order-" + std::to_string(order) + " gauge jet is not positive definite at " +
                                                          point_text(s.x, grid.dim()));
      }
    }
    per_order[static_cast<std::size_t>(order)].add(level, r);
    if (level < levels && r > worst) {
      worst = r;
      out.argmax = s.x;
      out.argmax_order = order;
    }
  });

  out.series.tol_rel = options.tol_rel;
  out.series.values.assign(static_cast<std::size_t>(levels), 0.0);
  for (int i = 0; i <= k; ++i) {
    out.per_order.push_back(per_order[static_cast<std::size_t>(i)].cumulative());
    for (int j = 0; j < levels; ++j)
      out.series.values[static_cast<std::size_t>(j)] =
          std::max(out.series.values[static_cast<std::size_t>(j)], out.per_order.back()[static_cast<std::size_t>(j)]);
  }
  out.verdict = tail_extrapolate(out.series);
  return out;
}

Verdict measurable(const SymTensorField& sigma, const GaugeSection& zeta, int k, const Grid& grid,
                   const CalcOptions& options) {
  return zeta_norm(sigma, zeta, k, grid, options).verdict;
}

bool ball_member(const SymTensorField& center, double eps, const GaugeSection& zeta, int k,
                 const SymTensorField& sigma, const Grid& grid, const CalcOptions& options) {
  if (!(eps > 0.0)) throw Error(Errc::invalid_argument, "ball radius must be positive");
  const NormResult r = zeta_norm(sigma - center, zeta, k, grid, options);
  switch (r.verdict.status) {
    case Convergence::converged: return r.value() < eps;
    case Convergence::divergent: return false;
    case Convergence::inconclusive: break;
  }
  throw Error(Errc::inconclusive_norm, "norm of sigma - center is inconclusive on this grid (" + r.verdict.note + ")");
}

bool interval_member(const SymTensorField& center, double eps, const GaugeSection& zeta, int k,
                     const SymTensorField& sigma, const Grid& grid) {
  check_order(k);
  if (!(eps > 0.0)) throw Error(Errc::invalid_argument, "interval radius must be positive");
  bool inside = true;
  const SymTensorField fields[] = {sigma, center, zeta.field};
  for_each_constraint(fields, k, zeta.cone, grid, [&](const Grid::Sample&, int, int level, std::span<const Mat> m) {
    if (!inside || level >= grid.levels()) return;
    const Mat upper = m[1] + eps * m[2] - m[0];
    const Mat lower = m[0] - m[1] + eps * m[2];
    if (classify(upper, 0.0).membership != Membership::interior || classify(lower, 0.0).membership != Membership::interior)
      inside = false;
  });
  return inside;
}

Decomposition decompose(const SymTensorField& sigma, const GaugeSection& zeta, const Grid& grid,
                        const CalcOptions& options) {
  const NormResult norm = zeta_norm(sigma, zeta, 0, grid, options);
  if (!norm.verdict.converged())
    throw Error(Errc::not_measurable, "sigma is not measurable for this gauge (" +
                                          std::string(to_string(norm.verdict.status)) + ")");
  Decomposition d;
  if (is_positive(sigma, 0, zeta.cone, grid, options).positive) {
    d.positive = sigma;
    d.negative = zero_field(sigma.dim());
    d.already_positive = true;
    return d;
  }
  d.lambda = norm.value();
  d.negative = d.lambda * zeta.field;
  d.positive = sigma + d.negative;
  return d;
}

Chart chart_for(const SymTensorField& sigma, const Grid& grid, const CalcOptions& options) {
  check_dims(sigma, grid);
  Chart c;
  c.gauge = gauge_admissible(frobenius_envelope(sigma), 0, ConeSpec::orthant(), grid, options);
  c.norm = zeta_norm(sigma, c.gauge, 0, grid, options);
  return c;
}

GaugeSection join(const GaugeSection& zeta1, const GaugeSection& zeta2, const CalcOptions& options) {
  if (!(zeta1.grid == zeta2.grid)) throw Error(Errc::invalid_argument, "join: gauges certified on different grids");
  if (zeta1.order != zeta2.order) throw Error(Errc::invalid_argument, "join: gauges of different order");
  if (!(zeta1.cone == zeta2.cone)) throw Error(Errc::invalid_argument, "join: gauges with different tangent cones");
  return gauge_admissible(zeta1.field + zeta2.field, zeta1.order, zeta1.cone, Grid::build(zeta1.grid), options);
}

SectionOrder compare_sections(const SymTensorField& a, const SymTensorField& b, int k, const ConeSpec& cone,
                              const Grid& grid, const CalcOptions& options) {
  check_order(k);
  check_dims(a, grid);
  check_dims(b, grid);
  const int levels = grid.levels();
  int leq_fails = levels;
  int geq_fails = levels;
  const SymTensorField fields[] = {b - a};
  for_each_constraint(fields, k, cone, grid, [&](const Grid::Sample&, int, int level, std::span<const Mat> m) {
    const FiberClass c = classify(m[0], options.tol_pd);
    if (c.inertia.negative > 0) leq_fails = std::min(leq_fails, level);
    if (c.inertia.positive > 0) geq_fails = std::min(geq_fails, level);
  });
  auto relation = [](bool leq, bool geq) {
    if (leq && geq) return Relation::equal;
    if (leq) return Relation::leq;
    if (geq) return Relation::geq;
    return Relation::incomparable;
  };
  SectionOrder out;
  for (int j = 0; j < levels; ++j) out.per_level.push_back(relation(j < leq_fails, j < geq_fails));
  out.relation = out.per_level.back();
  return out;
}

}  // namespace conefield
