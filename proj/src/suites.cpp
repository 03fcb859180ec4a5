#include "conefield/suites.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>

#include "conefield/ebin.hpp"
#include "conefield/error.hpp"
#include "conefield/gauge.hpp"

namespace conefield {

bool SuiteReport::pass() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.failures == 0; });
}

Json SuiteReport::to_json() const {
  Json j;
  Json list = Json::array();
  for (const auto& s : suites) {
    Json e;
    e["name"] = s.name;
    e["trials"] = s.trials;
    e["failures"] = s.failures;
    e["worst_slack"] = number(s.worst_slack);
    if (!s.first_failure.empty()) e["first_failure"] = s.first_failure;
    list.push_back(e);
  }
  j["suites"] = list;
  j["pass"] = pass();
  return j;
}

namespace gen {

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

// Top 53 bits, so the stream is identical on every standard library.
double Rng::uniform(double lo, double hi) {
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

int Rng::index(int count) {
  return static_cast<int>((engine_() >> 11) % static_cast<std::uint64_t>(count));
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "(%.17g)", v);
  return buf;
}

std::string var(int i) { return "x" + std::to_string(i + 1); }

std::string radius_squared(int dim) {
  std::string s;
  for (int i = 0; i < dim; ++i) s += (i ? "+" : "") + var(i) + "^2";
  return s;
}

Gauge conformal(SymTensorField field, std::string name, int dim, const std::string& phi) {
  Gauge g;
  g.field = std::move(field);
  g.name = std::move(name);
  g.dim = dim;
  g.pair_factor.assign(static_cast<std::size_t>(dim * (dim + 1) / 2), phi);
  return g;
}

std::size_t upper_index(int dim, int a, int b) {
  if (a > b) std::swap(a, b);
  return static_cast<std::size_t>(a * dim - a * (a - 1) / 2 + (b - a));
}

}  // namespace

const std::string& Gauge::factor(int a, int b) const { return pair_factor[upper_index(dim, a, b)]; }

Gauge euclidean(int dim) { return conformal(builtin_field("euclidean", dim), "euclidean", dim, "1"); }

Gauge gaussian(int dim, double a) {
  const double p[] = {a};
  return conformal(builtin_field("gaussian_conformal", dim, p), "gaussian_conformal", dim,
                   "exp(-" + num(a) + "*(" + radius_squared(dim) + "))");
}

Gauge inverse_poly(int dim, double p) {
  const double q[] = {p};
  return conformal(builtin_field("inverse_poly_conformal", dim, q), "inverse_poly_conformal", dim,
                   "(1+" + radius_squared(dim) + ")^(-" + num(p) + ")");
}

Gauge exp_gauge(std::span<const double> c) {
  const int dim = static_cast<int>(c.size());
  std::string arg;
  for (int i = 0; i < dim; ++i) arg += (i ? "+" : "") + num(c[static_cast<std::size_t>(i)]) + "*" + var(i);
  return conformal(builtin_field("exp_gauge", dim, c), "exp_gauge", dim, "exp(" + arg + ")");
}

Gauge cusp2d() {
  Gauge g;
  g.field = builtin_field("cusp2d", 2);
  g.name = "cusp2d";
  g.dim = 2;
  g.pair_factor = {"1", "exp(-x1)", "exp(-2*x1)"};
  return g;
}

std::vector<Gauge> catalogue(int dim) {
  const std::vector<double> ones(static_cast<std::size_t>(dim), 1.0);
  std::vector<Gauge> out = {euclidean(dim), gaussian(dim, 1.0), inverse_poly(dim, 1.0), exp_gauge(ones)};
  if (dim == 2) out.push_back(cusp2d());
  return out;
}

Gauge random_gauge(Rng& rng, int dim, bool jet_capable) {
  std::vector<double> c(static_cast<std::size_t>(dim));
  if (jet_capable) {
    for (double& v : c) v = rng.uniform(0.5, 1.5);
    return exp_gauge(c);
  }
  switch (rng.index(dim == 2 ? 5 : 4)) {
    case 0: return euclidean(dim);
    case 1: return gaussian(dim, rng.uniform(0.25, 1.0));
    case 2: return inverse_poly(dim, rng.uniform(0.5, 2.0));
    case 3:
      for (double& v : c) v = rng.uniform(-1.0, 1.0);
      return exp_gauge(c);
    default: return cusp2d();
  }
}

std::string tanh_poly(Rng& rng, int dim, double steepness, double* bound) {
  std::vector<std::string> t;
  for (int i = 0; i < dim; ++i) t.push_back("tanh(" + num(steepness) + "*" + var(i) + ")");
  double total = 0.0;
  auto coef = [&] {
    const double c = rng.uniform(-1.0, 1.0);
    total += std::abs(c);
    return num(c);
  };
  std::string s = "(" + coef();
  for (int i = 0; i < dim; ++i) s += "+" + coef() + "*" + t[static_cast<std::size_t>(i)];
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) s += "+" + coef() + "*" + t[static_cast<std::size_t>(i)] + "*" + t[static_cast<std::size_t>(j)];
  if (bound) *bound = total;
  return s + ")";
}

namespace {

// Upper-triangle polynomials and the Gershgorin row bounds of the matrix they form.
struct PolyMatrix {
  std::vector<std::string> entries;
  double row_bound = 0.0;
};

PolyMatrix poly_matrix(Rng& rng, int dim, double steepness) {
  PolyMatrix m;
  std::vector<double> rows(static_cast<std::size_t>(dim), 0.0);
  for (int a = 0; a < dim; ++a)
    for (int b = a; b < dim; ++b) {
      double bound = 0.0;
      m.entries.push_back(tanh_poly(rng, dim, steepness, &bound));
      rows[static_cast<std::size_t>(a)] += bound;
      if (b != a) rows[static_cast<std::size_t>(b)] += bound;
    }
  m.row_bound = *std::max_element(rows.begin(), rows.end());
  return m;
}

}  // namespace

SymTensorField bounded_field(Rng& rng, const Gauge& gauge, double steepness) {
  const int n = gauge.dim;
  const PolyMatrix b = poly_matrix(rng, n, steepness);
  std::vector<std::string> entries;
  for (int a = 0, i = 0; a < n; ++a)
    for (int c = a; c < n; ++c, ++i)
      entries.push_back(b.entries[static_cast<std::size_t>(i)] + "*(" + gauge.factor(a, c) + ")");
  return expr_field(n, entries);
}

SymTensorField comparable_gauge(Rng& rng, const Gauge& gauge, double steepness) {
  const int n = gauge.dim;
  const PolyMatrix b = poly_matrix(rng, n, steepness);
  const double shift = 0.2 + b.row_bound;
  std::vector<std::string> entries;
  for (int a = 0, i = 0; a < n; ++a)
    for (int c = a; c < n; ++c, ++i) {
      std::string e = b.entries[static_cast<std::size_t>(i)];
      if (a == c) e = "(" + num(shift) + "+" + e + ")";
      entries.push_back(e + "*(" + gauge.factor(a, c) + ")");
    }
  return expr_field(n, entries);
}

SymTensorField random_metric(Rng& rng, const Gauge& base, double steepness) {
  const int n = base.dim;
  const PolyMatrix b = poly_matrix(rng, n, steepness);
  const double beta = 0.9 / std::max(b.row_bound, 1e-300);
  std::vector<std::string> entries;
  for (int a = 0, i = 0; a < n; ++a)
    for (int c = a; c < n; ++c, ++i) {
      std::string e = num(beta) + "*" + b.entries[static_cast<std::size_t>(i)];
      if (a == c) e = "1+" + e;
      entries.push_back("(" + e + ")*(" + base.factor(a, c) + ")");
    }
  return expr_field(n, entries);
}

}  // namespace gen

namespace {

using gen::Gauge;
using gen::Rng;

// Accumulates per-trial checks. A check fails when slack < -tol.
class Tracker {
 public:
  explicit Tracker(std::string name) { r_.name = std::move(name); }

  void begin() {
    ++r_.trials;
    failed_ = false;
  }

  void check(double slack, double tol, const std::string& what) {
    if (std::isnan(slack)) slack = -std::numeric_limits<double>::infinity();
    worst_ = std::min(worst_, slack);
    if (slack < -tol) fail(what);
  }

  void require(bool ok, const std::string& what) { check(ok ? 0.0 : -1.0, 0.0, what); }

  void fail(const std::string& what) {
    if (!failed_) ++r_.failures;
    failed_ = true;
    if (r_.first_failure.empty()) r_.first_failure = "trial " + std::to_string(r_.trials) + ": " + what;
  }

  // Runs body(t) for t in [0, count), counting an exception as a failed trial.
  template <class Body>
  void run(int count, Body&& body) {
    for (int t = 0; t < count; ++t) {
      begin();
      try {
        body(t);
      } catch (const std::exception& e) {
        fail(e.what());
      }
    }
  }

  SuiteResult finish() {
    r_.worst_slack = std::isfinite(worst_) ? worst_ : (worst_ < 0 ? -1.0 : 0.0);
    return r_;
  }

 private:
  SuiteResult r_;
  bool failed_ = false;
  double worst_ = std::numeric_limits<double>::infinity();
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), std::numeric_limits<double>::min()); }

// Grids for the gauge suites: cheap, with the level-0 derivative interior
// wide enough for tanh(s x) to saturate when s = steepness(config).
GridConfig small_grid(int n) {
  switch (n) {
    case 1: return {1, 2.0, 2, 8};
    case 2: return {2, 1.0, 2, 8};
    default: return {n, 1.0, 2, 4};
  }
}

double steepness(const GridConfig& c) {
  const double h = 1.0 / c.points_per_unit;
  return 10.0 / (c.base_radius - kStencilBand * h);
}

// Grids for finite-volume bases: gaussian_conformal(a) with a in the range
// below has a negligible tail beyond the level-0 box and no underflow at the
// corners of the last box.
GridConfig bound_grid(int n) { return n == 1 ? GridConfig{1, 2.0, 2, 8} : GridConfig{2, 1.0, 2, 8}; }
double bound_rate(Rng& rng, int n) { return n == 1 ? rng.uniform(10.0, 20.0) : rng.uniform(20.0, 30.0); }

const ConeSpec kOrthant = ConeSpec::orthant();

// ---------------------------------------------------------------------------

SuiteResult norm_axioms(Rng& rng, int trials) {
  Tracker tr("norm_axioms");
  tr.run(trials, [&](int t) {
    const int n = 1 + t % 3;
    const int k = (t / 3) % 2;
    const GridConfig cfg = small_grid(n);
    const Grid grid = Grid::build(cfg);
    const double s = steepness(cfg);
    const Gauge gauge = gen::random_gauge(rng, n, k == 1);
    const GaugeSection z = gauge_admissible(gauge.field, k, kOrthant, grid);
    const SymTensorField sigma = gen::bounded_field(rng, gauge, s);
    const SymTensorField tau = gen::bounded_field(rng, gauge, s);
    const double a = rng.uniform(-3.0, 3.0);

    const NormResult ns = zeta_norm(sigma, z, k, grid);
    const NormResult nt = zeta_norm(tau, z, k, grid);
    const NormResult nsum = zeta_norm(sigma + tau, z, k, grid);
    const NormResult nscaled = zeta_norm(a * sigma, z, k, grid);
    tr.require(ns.verdict.converged() && nt.verdict.converged(), "random pair is not measurable on this grid");
    tr.require(ns.value() > 0.0, "nonzero field has zero norm");
    if (t % 10 == 0) tr.require(zeta_norm(zero_field(n), z, k, grid).value() == 0.0, "zero field has nonzero norm");

    for (int j = 0; j < cfg.levels; ++j) {
      const auto u = static_cast<std::size_t>(j);
      const double expect = std::abs(a) * ns.series.values[u];
      tr.check(-std::abs(nscaled.series.values[u] - expect) / std::max(expect, 1e-300), 1e-12, "homogeneity");
      const double rhs = ns.series.values[u] + nt.series.values[u];
      tr.check((rhs - nsum.series.values[u]) / rhs, 1e-10, "triangle inequality");
    }
  });
  return tr.finish();
}

SuiteResult ball_interval(Rng& rng, int trials) {
  Tracker tr("ball_interval");
  tr.run(trials, [&](int t) {
    const int n = 1 + t % 3;
    const int k = (t / 3) % 2;
    const GridConfig cfg = small_grid(n);
    const Grid grid = Grid::build(cfg);
    const double s = steepness(cfg);
    const Gauge gauge = gen::random_gauge(rng, n, k == 1);
    const GaugeSection z = gauge_admissible(gauge.field, k, kOrthant, grid);
    const SymTensorField center = gen::bounded_field(rng, gauge, s);
    const SymTensorField sigma = gen::bounded_field(rng, gauge, s);
    const NormResult d = zeta_norm(sigma - center, z, k, grid);
    tr.require(d.verdict.converged(), "difference is not measurable on this grid");
    const double side = rng.coin() ? 1.0 : -1.0;
    const double eps = d.value() * (1.0 + side * rng.uniform(0.01, 0.5));
    const bool ball = ball_member(center, eps, z, k, sigma, grid);
    const bool interval = interval_member(center, eps, z, k, sigma, grid);
    tr.require(ball == interval, "ball and order interval disagree");
    tr.require(ball == (side > 0), "membership on the wrong side of the norm");
  });
  return tr.finish();
}

SuiteResult decomposition(Rng& rng, int trials) {
  Tracker tr("decompose");
  tr.run(trials, [&](int t) {
    const int n = 1 + t % 3;
    const GridConfig cfg = small_grid(n);
    const Grid grid = Grid::build(cfg);
    const double s = steepness(cfg);
    const Gauge gauge = gen::random_gauge(rng, n, false);
    const GaugeSection z = gauge_admissible(gauge.field, 0, kOrthant, grid);
    const bool positive_input = t % 10 == 9;
    const SymTensorField sigma =
        positive_input ? gen::comparable_gauge(rng, gauge, s) : gen::bounded_field(rng, gauge, s);
    const Decomposition d = decompose(sigma, z, grid);
    tr.require(is_positive(d.positive, 0, kOrthant, grid).positive, "zeta1 is not positive");
    tr.require(is_positive(d.negative, 0, kOrthant, grid).positive, "zeta2 is not positive");
    if (positive_input) tr.require(d.already_positive, "positive input was shifted");
    double worst = 0.0;
    grid.for_each_sample([&](const Grid::Sample& smp) {
      const Mat sv = sigma(smp.x);
      const Mat nv = d.negative(smp.x);
      const Mat diff = d.positive(smp.x) - nv - sv;
      const double scale = std::max({sv.max_abs(), nv.max_abs(), std::numeric_limits<double>::min()});
      worst = std::max(worst, diff.max_abs() / scale);
    });
    tr.check(-worst, 1e-12, "reconstruction zeta1 - zeta2 != sigma");
  });
  return tr.finish();
}

SuiteResult covering(Rng& rng, int trials) {
  Tracker tr("covering");
  auto chart_ok = [&](const SymTensorField& sigma, const Grid& grid) {
    const Chart c = chart_for(sigma, grid);
    double top = 0.0;
    for (double v : c.norm.series.values) top = std::max(top, v);
    tr.check(1.0 - top, 0.0, "chart norm exceeds 1");
  };
  for (int n = 1; n <= 3; ++n) {
    const Grid grid = Grid::build(small_grid(n));
    const auto cat = gen::catalogue(n);
    tr.run(static_cast<int>(cat.size()), [&](int i) { chart_ok(cat[static_cast<std::size_t>(i)].field, grid); });
  }
  tr.run(trials, [&](int t) {
    const int n = 1 + t % 3;
    const GridConfig cfg = small_grid(n);
    const Grid grid = Grid::build(cfg);
    const double scale = std::exp(rng.uniform(-3.0, 3.0));
    chart_ok(scale * gen::bounded_field(rng, gen::random_gauge(rng, n, false), steepness(cfg)), grid);
  });
  tr.run(2 * trials, [&](int t) {
    const int n = 1 + t % 3;
    const int k = (t / 3) % 2;
    const GridConfig cfg = small_grid(n);
    const Grid grid = Grid::build(cfg);
    const Gauge g1 = gen::random_gauge(rng, n, k == 1);
    const Gauge g2 = gen::random_gauge(rng, n, k == 1);
    const GaugeSection z1 = gauge_admissible(g1.field, k, kOrthant, grid);
    const GaugeSection z2 = gauge_admissible(g2.field, k, kOrthant, grid);
    const GaugeSection joined = join(z1, z2);
    const SymTensorField sigma = gen::bounded_field(rng, rng.coin() ? g1 : g2, steepness(cfg));
    const NormResult a = zeta_norm(sigma, z1, k, grid);
    const NormResult b = zeta_norm(sigma, z2, k, grid);
    const NormResult c = zeta_norm(sigma, joined, k, grid);
    for (int j = 0; j < cfg.levels; ++j) {
      const auto u = static_cast<std::size_t>(j);
      const double lo = std::min(a.series.values[u], b.series.values[u]);
      tr.check((lo - c.series.values[u]) / std::max(lo, 1e-300), 1e-12, "join norm exceeds min of the two");
    }
    for (const auto* z : {&z1, &z2}) {
      const Relation r = compare_sections(z->field, joined.field, k, kOrthant, grid).relation;
      tr.require(r == Relation::leq || r == Relation::equal, "join does not dominate a gauge");
    }
  });
  return tr.finish();
}

SuiteResult gauge_comparison(Rng& rng, int trials) {
  Tracker tr("gauge_comparison");
  tr.run(trials, [&](int t) {
    const int n = 1 + t % 3;
    const GridConfig cfg = small_grid(n);
    const Grid grid = Grid::build(cfg);
    const double s = steepness(cfg);
    const Gauge g1 = gen::random_gauge(rng, n, false);
    const GaugeSection z1 = gauge_admissible(g1.field, 0, kOrthant, grid);
    const GaugeSection z = gauge_admissible(gen::comparable_gauge(rng, g1, s), 0, kOrthant, grid);
    const SymTensorField sigma = gen::bounded_field(rng, g1, s);
    const NormResult lhs = zeta_norm(sigma, z1, 0, grid);
    const NormResult zz = zeta_norm(z.field, z1, 0, grid);
    const NormResult sz = zeta_norm(sigma, z, 0, grid);
    for (int j = 0; j < cfg.levels; ++j) {
      const auto u = static_cast<std::size_t>(j);
      const double rhs = zz.series.values[u] * sz.series.values[u];
      tr.check((rhs - lhs.series.values[u]) / std::max(rhs, 1e-300), 1e-9, "gauge comparison inequality");
    }
  });
  return tr.finish();
}

SuiteResult compact_support(Rng& rng, int trials) {
  Tracker tr("compact_support");
  tr.run(trials, [&](int t) {
    const int n = 1 + t % 2;
    const GridConfig cfg = small_grid(n);
    const Grid grid = Grid::build(cfg);
    const double r0 = cfg.base_radius;
    const double radius = rng.uniform(0.3, 0.6) * r0;
    std::vector<double> center(static_cast<std::size_t>(n));
    for (double& c : center) c = rng.uniform(-0.9, 0.9) * (r0 - radius);
    Mat dir(n);
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) dir(a, b) = dir(b, a) = rng.uniform(-1.0, 1.0);
    double amplitude = rng.uniform(0.5, 2.0) * (rng.coin() ? 1.0 : -1.0);
    const SymTensorField b = bump(center, radius, amplitude, dir);
    for (const Gauge& g : gen::catalogue(n)) {
      const GaugeSection z = gauge_admissible(g.field, 0, kOrthant, grid);
      const NormResult r = zeta_norm(b, z, 0, grid);
      tr.require(r.verdict.converged(), "bump not measurable for " + g.name);
      const double v0 = r.series.values.front();
      double spread = 0.0;
      for (double v : r.series.values) spread = std::max(spread, std::abs(v - v0));
      tr.check(-spread / std::max(v0, 1e-300), 0.0, "norm changes after the support is covered (" + g.name + ")");
    }
  });
  return tr.finish();
}

SuiteResult jet_monotonicity(Rng& rng, int trials) {
  Tracker tr("jet_monotonicity");
  if (trials > 0) {
    // |e^x sin(x) zeta|^1 against zeta = e^x is sup |sin + cos| = sqrt(2).
    tr.run(1, [&](int) {
      const Grid grid = Grid::build({1, 4.0, 2, 1024});
      const double c[] = {1.0};
      const GaugeSection z = gauge_admissible(builtin_field("exp_gauge", 1, c), 1, kOrthant, grid);
      const std::string e[] = {"exp(x1)*sin(x1)"};
      const NormResult r = zeta_norm(expr_field(1, e), z, 1, grid);
      tr.require(r.verdict.converged(), "exact example did not converge");
      tr.check(-std::abs(r.value() - std::numbers::sqrt2), 1e-6, "exact example differs from sqrt(2)");
    });
  }
  tr.run(trials - 1, [&](int t) {
    const int n = 1 + t % 2;
    const GridConfig cfg = small_grid(n);
    const Grid grid = Grid::build(cfg);
    const Gauge gauge = gen::random_gauge(rng, n, true);
    const GaugeSection z = gauge_admissible(gauge.field, 2, kOrthant, grid);
    std::vector<SymTensorField> parts;
    std::vector<double> weights;
    const int count = 2 + rng.index(3);
    for (int i = 0; i < count; ++i) {
      std::vector<double> c(static_cast<std::size_t>(n));
      for (double& v : c) v = rng.uniform(-1.0, 1.0);
      switch (rng.index(n == 2 ? 5 : 4)) {
        case 0: parts.push_back(gen::euclidean(n).field); break;
        case 1: parts.push_back(gen::gaussian(n, rng.uniform(0.25, 1.0)).field); break;
        case 2: parts.push_back(gen::inverse_poly(n, rng.uniform(0.5, 2.0)).field); break;
        case 3: parts.push_back(gen::exp_gauge(c).field); break;
        default: parts.push_back(gen::cusp2d().field); break;
      }
      weights.push_back(rng.uniform(-1.0, 1.0));
    }
    const SymTensorField sigma = linear_combination(weights, parts);
    std::vector<NormResult> norms;
    for (int k = 0; k <= 2; ++k) norms.push_back(zeta_norm(sigma, z, k, grid));
    for (int j = 0; j < cfg.levels; ++j)
      for (int k = 1; k <= 2; ++k) {
        const auto u = static_cast<std::size_t>(j);
        const double hi = norms[static_cast<std::size_t>(k)].series.values[u];
        const double lo = norms[static_cast<std::size_t>(k - 1)].series.values[u];
        tr.check((hi - lo) / std::max(hi, 1e-300), 0.0, "jet norms not monotone in the order");
      }
  });
  return tr.finish();
}

SuiteResult volume_oracle(Rng& rng, int trials) {
  Tracker tr("volume_oracle");
  auto vol = [](const SymTensorField& g, const GridConfig& cfg, double tol) {
    const Grid grid = Grid::build(cfg);
    return volume(make_metric(g, grid), grid, tol);
  };
  tr.run(1, [&](int) {
    const VolumeResult r = vol(gen::gaussian(1, 1.0).field, {1, 8.0, 2, 16}, 1e-6);
    tr.require(r.verdict.converged(), "gaussian volume did not converge");
    tr.check(-std::abs(r.value() - std::sqrt(2.0 * std::numbers::pi)), 1e-6, "gaussian volume");
  });
  tr.run(1, [&](int) {
    const VolumeResult r = vol(gen::euclidean(1).field, {1, 4.0, 3, 8}, 1e-6);
    tr.require(r.verdict.status == Convergence::divergent, "euclidean volume not divergent");
  });
  tr.run(1, [&](int) {
    // O(1/R) tail: 2/R_last ~ 5e-4 at R = 4096.
    const VolumeResult r = vol(gen::inverse_poly(1, 2.0).field, {1, 1024.0, 3, 8}, 1e-3);
    tr.require(r.verdict.converged(), "inverse_poly volume did not converge");
    tr.check(-std::abs(r.value() - std::numbers::pi), 1e-3, "inverse_poly volume");
  });
  tr.run(trials, [&](int t) {
    const int n = 1 + t % 2;
    const double a = n == 1 ? rng.uniform(0.5, 2.0) : rng.uniform(0.5, 1.0);
    const GridConfig cfg = n == 1 ? GridConfig{1, 8.0, 2, 8} : GridConfig{2, 8.0, 2, 4};
    const VolumeResult r = vol(gen::gaussian(n, a).field, cfg, 1e-6);
    const double oracle = std::pow(2.0 * std::numbers::pi / (n * a), 0.5 * n);
    tr.require(r.verdict.converged(), "gaussian volume did not converge");
    tr.check(-rel(r.value(), oracle), 1e-6, "gaussian volume against the closed form");
  });
  return tr.finish();
}

SuiteResult bound(Rng& rng, int trials) {
  Tracker tr("bound");
  tr.run(trials, [&](int t) {
    const int n = 1 + t % 2;
    const GridConfig cfg = bound_grid(n);
    const Grid grid = Grid::build(cfg);
    const double s = 10.0 / cfg.base_radius;
    const Gauge base = gen::gaussian(n, bound_rate(rng, n));
    const SymTensorField g = (t / 2) % 2 == 0 ? base.field : gen::random_metric(rng, base, s);
    const MetricField m = make_metric(g, grid);
    const int kind = t % 20;
    SymTensorField h = g;
    SymTensorField k = g;
    if (kind == 10) k = -1.0 * g;
    if (kind != 0 && kind != 1 && kind != 10 && kind != 11) {
      h = gen::bounded_field(rng, base, s);
      k = gen::bounded_field(rng, base, s);
    }
    const BoundCertificate c = bound_certificate(m, h, k, grid);
    for (std::size_t j = 0; j < c.level_slack.size(); ++j) {
      const double relslack = c.level_slack[j] / c.level_bounds[j];
      tr.check(relslack, 1e-9, "bound violated");
      if (kind <= 1 || kind == 10 || kind == 11) tr.check(-std::abs(relslack), 1e-12, "saturating case not saturated");
    }
    tr.require(c.pass, "certificate reports failure");
  });
  return tr.finish();
}

SuiteResult frame_trace(Rng& rng, int trials) {
  Tracker tr("frame_trace");
  tr.run(trials, [&](int t) {
    const int n = 1 + t % 3;
    const GridConfig cfg = n == 1 ? GridConfig{1, 2.0, 2, 8} : n == 2 ? GridConfig{2, 1.0, 2, 8} : GridConfig{3, 0.5, 2, 4};
    const Grid grid = Grid::build(cfg);
    const Gauge base = gen::gaussian(n, rng.uniform(0.5, 2.0));
    const MetricField m = make_metric(gen::random_metric(rng, base, 1.0), grid);
    const SymTensorField h = gen::bounded_field(rng, base, 1.0);
    const SymTensorField k = gen::bounded_field(rng, base, 1.0);
    const InnerResult a = ebin_inner(m, h, k, grid);
    const InnerResult b = ebin_inner_frame(m, h, k, grid);
    for (std::size_t j = 0; j < a.series.values.size(); ++j) {
      const double v = a.series.values[j];
      tr.check(-std::abs(v - b.series.values[j]) / std::max(1.0, std::abs(v)), 1e-9, "frame and trace forms differ");
    }
  });
  return tr.finish();
}

AffineDiffeo random_affine(Rng& rng, int n, int kind) {
  Mat a = Mat::identity(n);
  if (n == 1) {
    a(0, 0) = rng.uniform(0.8, 1.25) * (kind % 2 ? -1.0 : 1.0);
  } else {
    auto rot = [](double th) { return Mat::from_rows({std::cos(th), -std::sin(th), std::sin(th), std::cos(th)}); };
    switch (kind) {
      case 0: a = Mat::diag({rng.uniform(0.8, 1.25), rng.uniform(0.8, 1.25)}); break;
      case 1: a = rot(rng.uniform(-std::numbers::pi, std::numbers::pi)); break;
      case 2: a = Mat::from_rows({1.0, rng.uniform(-0.4, 0.4), 0.0, 1.0}); break;
      default: {
        const Mat d = Mat::diag({rng.uniform(0.8, 1.25), rng.uniform(0.8, 1.25)});
        a = rot(rng.uniform(-std::numbers::pi, std::numbers::pi)) * d * rot(rng.uniform(-std::numbers::pi, std::numbers::pi)).transpose();
      }
    }
  }
  std::vector<double> b(static_cast<std::size_t>(n));
  for (double& v : b) v = rng.uniform(-0.3, 0.3) / std::sqrt(static_cast<double>(n));
  return AffineDiffeo::make(a, b);
}

SuiteResult pullback_invariance(Rng& rng, int trials) {
  Tracker tr("pullback");
  tr.run(trials, [&](int t) {
    const int n = 1 + t % 2;
    const GridConfig cfg{n, 6.0, 2, 8};
    const Grid grid = Grid::build(cfg);
    const double a = n == 1 ? rng.uniform(2.0, 2.8) : rng.uniform(1.0, 1.4);
    const Gauge base = gen::gaussian(n, a);
    const SymTensorField g = (t / 2) % 2 == 0 ? base.field : gen::random_metric(rng, base, 0.5);
    const SymTensorField h = gen::bounded_field(rng, base, 0.5);
    const SymTensorField k = gen::bounded_field(rng, base, 0.5);
    const AffineDiffeo phi = random_affine(rng, n, (t / 4) % 4);
    const MetricField m = make_metric(g, grid);
    const MetricField mp = make_metric(pullback(g, phi), grid);
    const VolumeResult v = volume(m, grid);
    const VolumeResult vp = volume(mp, grid);
    const InnerResult i = ebin_inner(m, h, k, grid);
    const InnerResult ip = ebin_inner(mp, pullback(h, phi), pullback(k, phi), grid);
    tr.require(v.verdict.converged() && vp.verdict.converged(), "volume did not converge");
    tr.require(i.verdict.converged() && ip.verdict.converged(), "inner product did not converge");
    tr.check(-rel(vp.value(), v.value()), 1e-6, "volume not invariant");
    tr.check(-std::abs(ip.value() - i.value()) / std::max(std::abs(i.value()), v.value() * 1e-3), 1e-6,
             "inner product not invariant");
  });
  return tr.finish();
}

SuiteResult finite_volume(Rng& rng, int trials) {
  Tracker tr("finite_volume");
  tr.run(trials, [&](int t) {
    const int n = 1 + t % 2;
    const GridConfig cfg = bound_grid(n);
    const Grid grid = Grid::build(cfg);
    const double s = 10.0 / cfg.base_radius;
    const Gauge base = gen::gaussian(n, bound_rate(rng, n));
    const SymTensorField g = (t / 2) % 2 == 0 ? base.field : gen::random_metric(rng, base, s);
    const MetricField m = make_metric(g, grid);
    const SymTensorField tau = gen::bounded_field(rng, base, s);
    const NormResult tn = zeta_norm(tau, gauge_admissible(g, 0, kOrthant, grid), 0, grid);
    tr.require(tn.verdict.converged(), "perturbation not measurable");
    const VolumeResult vg = volume(m, grid);
    for (double eps : {0.1, 0.5, 0.9}) {
      const SymTensorField h = g + (eps / tn.value()) * tau;
      const VolumeResult vh = volume(make_metric(h, grid), grid);
      const double factor = std::pow(1.0 + eps, 0.5 * n);
      for (std::size_t j = 0; j < vg.series.values.size(); ++j) {
        const double cap = factor * vg.series.values[j];
        tr.check((cap - vh.series.values[j]) / cap, 1e-12, "volume of the perturbed metric exceeds the bound");
      }
    }
  });
  return tr.finish();
}

// Independent tree evaluator for the parser oracle.
struct RefNode {
  enum Kind { number, variable, pi, euler, neg, add, sub, mul, div, pow, func } kind = number;
  double value = 0.0;
  int var = 0;
  int fn = 0;
  std::unique_ptr<RefNode> a, b;
};

constexpr const char* kRefFunctions[] = {"exp", "log", "sqrt", "sin", "cos", "tanh", "abs"};

double ref_eval(const RefNode& e, const Point& x) {
  switch (e.kind) {
    case RefNode::number: return e.value;
    case RefNode::variable: return x[static_cast<std::size_t>(e.var)];
    case RefNode::pi: return std::numbers::pi;
    case RefNode::euler: return std::numbers::e;
    case RefNode::neg: return -ref_eval(*e.a, x);
    case RefNode::add: return ref_eval(*e.a, x) + ref_eval(*e.b, x);
    case RefNode::sub: return ref_eval(*e.a, x) - ref_eval(*e.b, x);
    case RefNode::mul: return ref_eval(*e.a, x) * ref_eval(*e.b, x);
    case RefNode::div: return ref_eval(*e.a, x) / ref_eval(*e.b, x);
    case RefNode::pow: return std::pow(ref_eval(*e.a, x), ref_eval(*e.b, x));
    case RefNode::func: {
      const double v = ref_eval(*e.a, x);
      switch (e.fn) {
        case 0: return std::exp(v);
        case 1: return std::log(v);
        case 2: return std::sqrt(v);
        case 3: return std::sin(v);
        case 4: return std::cos(v);
        case 5: return std::tanh(v);
        default: return std::abs(v);
      }
    }
  }
  return 0.0;
}

std::string ref_text(const RefNode& e) {
  char buf[40];
  switch (e.kind) {
    case RefNode::number:
      std::snprintf(buf, sizeof buf, "%.17g", e.value);
      return buf;
    case RefNode::variable: return "x" + std::to_string(e.var + 1);
    case RefNode::pi: return "pi";
    case RefNode::euler: return "e";
    case RefNode::neg: return "(-" + ref_text(*e.a) + ")";
    case RefNode::add: return "(" + ref_text(*e.a) + "+" + ref_text(*e.b) + ")";
    case RefNode::sub: return "(" + ref_text(*e.a) + "-" + ref_text(*e.b) + ")";
    case RefNode::mul: return "(" + ref_text(*e.a) + "*" + ref_text(*e.b) + ")";
    case RefNode::div: return "(" + ref_text(*e.a) + "/" + ref_text(*e.b) + ")";
    case RefNode::pow: return "(" + ref_text(*e.a) + "^" + ref_text(*e.b) + ")";
    case RefNode::func: return std::string(kRefFunctions[e.fn]) + "(" + ref_text(*e.a) + ")";
  }
  return "";
}

std::unique_ptr<RefNode> random_tree(Rng& rng, int dim, int depth) {
  auto node = std::make_unique<RefNode>();
  const int leaf_choice = depth <= 0 ? rng.index(4) : rng.index(12);
  switch (leaf_choice) {
    case 0:
      node->kind = RefNode::number;
      node->value = rng.coin() ? rng.uniform(0.0, 4.0) : static_cast<double>(rng.index(6));
      return node;
    case 1:
    case 2:
      node->kind = RefNode::variable;
      node->var = rng.index(dim);
      return node;
    case 3:
      node->kind = rng.coin() ? RefNode::pi : RefNode::euler;
      return node;
    case 4: node->kind = RefNode::neg; break;
    case 5: node->kind = RefNode::add; break;
    case 6: node->kind = RefNode::sub; break;
    case 7: node->kind = RefNode::mul; break;
    case 8: node->kind = RefNode::div; break;
    case 9: node->kind = RefNode::pow; break;
    default:
      node->kind = RefNode::func;
      node->fn = rng.index(7);
      break;
  }
  node->a = random_tree(rng, dim, depth - 1);
  if (node->kind == RefNode::pow) {
    // Small exponents keep values finite often enough to be informative.
    node->b = std::make_unique<RefNode>();
    node->b->kind = RefNode::number;
    node->b->value = rng.coin() ? static_cast<double>(rng.index(4)) : rng.uniform(0.0, 2.0);
  } else if (node->kind != RefNode::neg && node->kind != RefNode::func) {
    node->b = random_tree(rng, dim, depth - 1);
  }
  return node;
}

bool same_value(double a, double b, double tol) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

// Polynomial of total degree <= 4 in up to two variables.
struct Poly {
  int dim = 1;
  std::vector<std::array<int, 2>> powers;
  std::vector<double> coefs;

  double eval(const Point& x, std::array<int, 2> d) const {
    double s = 0.0;
    for (std::size_t m = 0; m < coefs.size(); ++m) {
      double term = coefs[m];
      for (int v = 0; v < 2; ++v) {
        int p = powers[m][static_cast<std::size_t>(v)];
        for (int r = 0; r < d[static_cast<std::size_t>(v)]; ++r) term *= p--;
        if (p < 0) term = 0.0;
        for (int r = 0; r < p; ++r) term *= x[static_cast<std::size_t>(v)];
      }
      s += term;
    }
    return s;
  }

  std::string text() const {
    std::string s = "0";
    char buf[40];
    for (std::size_t m = 0; m < coefs.size(); ++m) {
      std::snprintf(buf, sizeof buf, "(%.17g)", coefs[m]);
      s += std::string("+") + buf;
      for (int v = 0; v < 2; ++v)
        for (int r = 0; r < powers[m][static_cast<std::size_t>(v)]; ++r) s += "*x" + std::to_string(v + 1);
    }
    return s;
  }
};

SuiteResult parser_grid(Rng& rng, int trials) {
  Tracker tr("parser_grid");
  tr.run(trials, [&](int) {
    const int dim = 1 + rng.index(3);
    const auto tree = random_tree(rng, dim, 1 + rng.index(5));
    const std::string text = ref_text(*tree);
    const ScalarField f = parse_expr(text, dim);
    const ScalarField again = parse_expr(f.to_string(), dim);
    for (int p = 0; p < 5; ++p) {
      Point x{};
      for (int i = 0; i < dim; ++i) x[static_cast<std::size_t>(i)] = rng.uniform(-2.0, 2.0);
      const double want = ref_eval(*tree, x);
      tr.require(same_value(f(x), want, 1e-15), "parsed value differs from the reference for " + text);
      tr.require(same_value(again(x), f(x), 0.0), "re-parsed rendering differs for " + text);
    }
  });

  // Stencils are exact on polynomials of degree <= 4, up to rounding.
  tr.run(std::max(1, trials / 10), [&](int t) {
    const int dim = 1 + t % 2;
    Poly poly;
    poly.dim = dim;
    for (int i = 0; i <= 4; ++i)
      for (int j = 0; i + j <= 4; ++j) {
        if (dim == 1 && j > 0) continue;
        poly.powers.push_back({i, j});
        poly.coefs.push_back(rng.uniform(-1.0, 1.0));
      }
    const Grid grid = Grid::build({dim, 1.0, 2, 16});
    const ScalarField f = parse_expr(poly.text(), dim);
    const ScalarFn fn = [&](const Point& x) { return f(x); };
    double magnitude = 0.0;
    for (double c : poly.coefs) magnitude += std::abs(c);
    magnitude *= std::pow(1.0 + grid.radius(1), 4);
    std::vector<std::array<int, 2>> alphas = {{1, 0}, {2, 0}};
    if (dim == 2) alphas.insert(alphas.end(), {{0, 1}, {1, 1}, {0, 2}});
    for (const auto& al : alphas) {
      MultiIndex mi;
      mi.order[0] = al[0];
      mi.order[1] = al[1];
      const SampledField d = derivative(fn, mi, grid, 1);
      const double scale = magnitude / std::pow(grid.spacing(), al[0] + al[1]);
      double worst = 0.0;
      for (std::size_t i = 0; i < d.indices.size(); ++i) {
        const Point x = grid.point(1, d.indices[i]);
        worst = std::max(worst, std::abs(d.values[i] - poly.eval(x, al)));
      }
      tr.check(-worst / scale, 1e-13, "stencil not exact on a quartic");
    }
  });

  // Composite Simpson converges at order four on smooth integrands.
  struct Case {
    int dim;
    const char* text;
    double exact;
  };
  const double erf1 = std::sqrt(std::numbers::pi) * std::erf(1.0);
  const auto antideriv = [](double x) { return std::exp(x / 2) * (0.5 * std::cos(x) + std::sin(x)) / 1.25; };
  const Case cases[] = {
      {1, "exp(-x1^2)", erf1},
      {1, "exp(x1/2)*cos(x1)", antideriv(1.0) - antideriv(-1.0)},
      {2, "exp(-x1^2)*cos(x2)", erf1 * 2.0 * std::sin(1.0)},
  };
  tr.run(3, [&](int t) {
    const Case& c = cases[t];
    const ScalarField f = parse_expr(c.text, c.dim);
    const ScalarFn fn = [&](const Point& x) { return f(x); };
    double err[3];
    for (int r = 0; r < 3; ++r)
      err[r] = std::abs(integrate(fn, Grid::build({c.dim, 1.0, 2, 4 << r}), 0) - c.exact);
    for (int r = 0; r < 2; ++r) {
      const double order = std::log2(err[r] / err[r + 1]);
      tr.check((order - 3.5) / 3.5, 0.0, std::string("quadrature order below 3.5 for ") + c.text);
    }
  });
  return tr.finish();
}

struct SuiteEntry {
  const char* name;
  int trials;
  SuiteResult (*run)(Rng&, int);
};

constexpr SuiteEntry kSuites[] = {
    {"norm_axioms", 1000, norm_axioms},
    {"ball_interval", 500, ball_interval},
    {"decompose", 500, decomposition},
    {"covering", 100, covering},
    {"gauge_comparison", 200, gauge_comparison},
    {"compact_support", 50, compact_support},
    {"jet_monotonicity", 100, jet_monotonicity},
    {"volume_oracle", 20, volume_oracle},
    {"bound", 1000, bound},
    {"frame_trace", 300, frame_trace},
    {"pullback", 100, pullback_invariance},
    {"finite_volume", 100, finite_volume},
    {"parser_grid", 1000, parser_grid},
};

const SuiteEntry& find_suite(const std::string& name) {
  for (const auto& s : kSuites)
    if (name == s.name) return s;
  std::string known;
  for (const auto& s : kSuites) known += std::string(known.empty() ? "" : ", ") + s.name;
  throw Error(Errc::invalid_argument, "unknown suite '" + name + "' (known: " + known + ")");
}

}  // namespace

std::vector<std::string> suite_names() {
  std::vector<std::string> out;
  for (const auto& s : kSuites) out.emplace_back(s.name);
  return out;
}

int default_trials(const std::string& suite) { return find_suite(suite).trials; }

SuiteResult run_suite(const std::string& name, std::uint64_t seed, int trials) {
  const SuiteEntry& entry = find_suite(name);
  if (trials < 0) throw Error(Errc::invalid_argument, "trial count must be non-negative");
  const auto stream = static_cast<std::uint64_t>(&entry - kSuites);
  Rng rng(seed, stream);
  return entry.run(rng, trials > 0 ? trials : entry.trials);
}

SuiteReport verify_all(const VerifyConfig& config) {
  SuiteReport report;
  if (!config.suite.empty()) {
    report.suites.push_back(run_suite(config.suite, config.seed, config.trials));
    return report;
  }
  for (const auto& s : kSuites) report.suites.push_back(run_suite(s.name, config.seed, config.trials));
  return report;
}

}  // namespace conefield
