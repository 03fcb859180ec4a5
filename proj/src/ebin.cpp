#include "conefield/ebin.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "conefield/error.hpp"

namespace conefield {

namespace {

void check_grid(const MetricField& g, const Grid& grid) {
  if (!(g.grid == grid.config())) throw Error(Errc::invalid_argument, "metric was certified on a different grid");
}

void check_dim(const SymTensorField& f, const Grid& grid, const char* what) {
  if (f.dim() != grid.dim())
    throw Error(Errc::dimension_mismatch, std::string(what) + " has dimension " + std::to_string(f.dim()) +
                                              ", grid has " + std::to_string(grid.dim()));
}

std::string where(const Point& x, int dim) {
  std::string s = "(";
  char buf[32];
  for (int d = 0; d < dim; ++d) {
    std::snprintf(buf, sizeof buf, "%s%.10g", d ? ", " : "", x[static_cast<std::size_t>(d)]);
    s += buf;
  }
  return s + ")";
}

Mat factor(const Mat& g, const Point& x) {
  Mat lower;
  if (!g.is_finite() || !cholesky(g, lower))
    throw Error(Errc::metric_degenerate, "metric is not positive definite at " + where(x, g.dim()));
  return lower;
}

// sqrt(det g) from the Cholesky factor.
double root_det(const Mat& lower) {
  double r = 1.0;
  for (int i = 0; i < lower.dim(); ++i) r *= lower(i, i);
  return r;
}

// trace(A B) for symmetric A, B.
double trace_product(const Mat& a, const Mat& b) {
  double t = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) t += a(i, j) * b(i, j);
  return t;
}

template <class Density>
LevelSeries integrate_levels(const Grid& grid, double tol_rel, Density&& density) {
  std::vector<double> values(grid.finest_points());
  grid.for_each_sample([&](const Grid::Sample& s) {
    const double v = density(s.x);
    if (!std::isfinite(v)) throw Error(Errc::non_finite_sample, "integrand is not finite at " + where(s.x, grid.dim()));
    values[s.index] = v;
  });
  LevelSeries series;
  series.tol_rel = tol_rel;
  for (int j = 0; j < grid.levels(); ++j) series.values.push_back(grid.integrate_finest(values, j));
  return series;
}

}  // namespace

MetricField make_metric(const SymTensorField& g, const Grid& grid, double tol_pd) {
  check_dim(g, grid, "metric");
  std::vector<double> lowest(static_cast<std::size_t>(grid.levels()), std::numeric_limits<double>::infinity());
  grid.for_each_sample([&](const Grid::Sample& s) {
    const Mat v = g.checked(s.x);
    factor(v, s.x);
    if (!(interior_margin(v) > tol_pd))
      throw Error(Errc::metric_degenerate, "metric is not positive definite at " + where(s.x, grid.dim()));
    double& slot = lowest[static_cast<std::size_t>(s.level)];
    slot = std::min(slot, min_eigenvalue(v));
  });
  MetricField m;
  m.field = g;
  m.grid = grid.config();
  double running = std::numeric_limits<double>::infinity();
  for (double v : lowest) {
    running = std::min(running, v);
    m.min_eigenvalue.push_back(running);
  }
  m.eigenvalue_decays = m.min_eigenvalue.back() < m.min_eigenvalue.front();
  return m;
}

VolumeResult volume(const MetricField& g, const Grid& grid, double tol_rel) {
  check_grid(g, grid);
  VolumeResult r;
  r.series = integrate_levels(grid, tol_rel, [&](const Point& x) { return root_det(factor(g.field(x), x)); });
  r.verdict = tail_extrapolate(r.series);
  return r;
}

Verdict is_finite_volume(const MetricField& g, const Grid& grid, double tol_rel) {
  return volume(g, grid, tol_rel).verdict;
}

InnerResult ebin_inner(const MetricField& g, const SymTensorField& h, const SymTensorField& k, const Grid& grid,
                       double tol_rel) {
  check_grid(g, grid);
  check_dim(h, grid, "h");
  check_dim(k, grid, "k");
  InnerResult r;
  r.series = integrate_levels(grid, tol_rel, [&](const Point& x) {
    const Mat lower = factor(g.field(x), x);
    const Mat a = whiten(lower, h.checked(x));
    const Mat b = whiten(lower, k.checked(x));
    return trace_product(a, b) * root_det(lower);
  });
  r.verdict = tail_extrapolate(r.series);
  return r;
}

Mat orthonormal_frame(const Mat& g) {
  const int n = g.dim();
  if (!g.is_finite()) throw Error(Errc::metric_degenerate, "metric value is not finite");
  auto inner = [&](const Mat& e, int a, int b) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += e(i, a) * g(i, j) * e(j, b);
    return s;
  };
  Mat e = Mat::identity(n);
  for (int c = 0; c < n; ++c) {
    for (int pass = 0; pass < 2; ++pass)
      for (int p = 0; p < c; ++p) {
        const double proj = inner(e, p, c);
        for (int i = 0; i < n; ++i) e(i, c) -= proj * e(i, p);
      }
    const double norm2 = inner(e, c, c);
    if (!(norm2 > 0.0) || !std::isfinite(norm2))
      throw Error(Errc::metric_degenerate, "metric value " + g.to_string() + " is not positive definite");
    const double norm = std::sqrt(norm2);
    for (int i = 0; i < n; ++i) e(i, c) /= norm;
  }
  return e;
}

Mat orthonormal_frame(const MetricField& g, const Point& x) { return orthonormal_frame(g.field(x)); }

InnerResult ebin_inner_frame(const MetricField& g, const SymTensorField& h, const SymTensorField& k,
                             const Grid& grid, double tol_rel) {
  check_grid(g, grid);
  check_dim(h, grid, "h");
  check_dim(k, grid, "k");
  const int n = grid.dim();
  InnerResult r;
  r.series = integrate_levels(grid, tol_rel, [&](const Point& x) {
    const Mat e = orthonormal_frame(g.field(x));
    const Mat g_inv = e * e.transpose();
    const Mat hv = h.checked(x);
    const Mat kv = k.checked(x);
    // sum_i h(k(E_i)^sharp, E_i) = sum_i E_i^T h g^-1 k E_i
    const Mat m = hv * g_inv * kv;
    double s = 0.0;
    for (int c = 0; c < n; ++c)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += e(i, c) * m(i, j) * e(j, c);
    return s / std::abs(determinant(e));
  });
  r.verdict = tail_extrapolate(r.series);
  return r;
}

BoundCertificate bound_certificate(const MetricField& g, const SymTensorField& h, const SymTensorField& k,
                                   const Grid& grid, const CalcOptions& options) {
  check_grid(g, grid);
  const GaugeSection gauge = gauge_admissible(g.field, 0, ConeSpec::orthant(), grid, options);
  const NormResult hn = zeta_norm(h, gauge, 0, grid, options);
  const NormResult kn = zeta_norm(k, gauge, 0, grid, options);
  if (!hn.verdict.converged() || !kn.verdict.converged())
    throw Error(Errc::not_measurable, std::string("h or k is not measurable against g (") +
                                          std::string(to_string((hn.verdict.converged() ? kn : hn).verdict.status)) +
                                          ")");
  const VolumeResult vol = volume(g, grid, options.tol_rel);
  if (!vol.verdict.converged())
    throw Error(Errc::volume_divergent,
                "volume is not finite on this grid (" + std::string(to_string(vol.verdict.status)) + ")");
  const InnerResult inner = ebin_inner(g, h, k, grid, options.tol_rel);

  BoundCertificate c;
  c.n = grid.dim();
  c.pass = true;
  for (int j = 0; j < grid.levels(); ++j) {
    const auto u = static_cast<std::size_t>(j);
    const double bound = c.n * hn.series.values[u] * kn.series.values[u] * vol.series.values[u];
    const double slack = bound - std::abs(inner.series.values[u]);
    c.level_values.push_back(inner.series.values[u]);
    c.level_bounds.push_back(bound);
    c.level_slack.push_back(slack);
    if (slack < -1e-9 * bound) c.pass = false;
  }
  c.value = c.level_values.back();
  c.h_norm = hn.series.values.back();
  c.k_norm = kn.series.values.back();
  c.volume = vol.series.values.back();
  c.bound = c.level_bounds.back();
  c.slack = c.level_slack.back();
  return c;
}

std::vector<std::vector<double>> gram(const MetricField& g, std::span<const SymTensorField> fields,
                                      const Grid& grid, double tol_rel) {
  const std::size_t m = fields.size();
  std::vector<std::vector<double>> out(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) {
      const InnerResult r = ebin_inner(g, fields[i], fields[j], grid, tol_rel);
      if (!r.verdict.converged())
        throw Error(Errc::not_converged, "G(" + std::to_string(i) + ", " + std::to_string(j) + ") is " +
                                             std::string(to_string(r.verdict.status)) + " on this grid");
      out[i][j] = r.value();
      out[j][i] = r.value();
    }
  return out;
}

}  // namespace conefield
