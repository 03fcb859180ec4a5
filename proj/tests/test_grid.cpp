#include <doctest.h>

#include <cmath>
#include <numbers>

#include "conefield/error.hpp"
#include "conefield/grid.hpp"

using namespace conefield;

namespace {

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::invalid_argument;
}

double x1(const Point& x) { return x[0]; }

}  // namespace

TEST_CASE("schedule arithmetic") {
  const Grid g = build_grid(1, 4.0, 3, 8);
  CHECK(g.radius(0) == 4.0);
  CHECK(g.radius(2) == 16.0);
  CHECK(g.num_points(0) == 65);
  CHECK(g.num_points(1) == 129);
  CHECK(g.num_points(2) == 257);
  CHECK(g.spacing() == 0.125);

  const Grid g2 = build_grid(2, 2.0, 2, 4);
  CHECK(g2.axis_points(0) == 17);
  CHECK(g2.num_points(0) == 17 * 17);
  CHECK(g2.num_points(1) == 33 * 33);
}

TEST_CASE("build errors") {
  CHECK(code_of([] { build_grid(5, 1.0, 2, 4); }) == Errc::invalid_dimension);
  CHECK(code_of([] { build_grid(0, 1.0, 2, 4); }) == Errc::invalid_dimension);
  CHECK(code_of([] { build_grid(1, 1.0, 1, 4); }) == Errc::invalid_argument);
  CHECK(code_of([] { build_grid(1, 1.0, 2, 3); }) == Errc::invalid_argument);
  CHECK(code_of([] { build_grid(1, -1.0, 2, 4); }) == Errc::invalid_argument);
  CHECK(code_of([] { build_grid(4, 64.0, 3, 16); }) == Errc::resolution_overflow);
}

TEST_CASE("weights are positive and sum to the box volume") {
  for (int dim = 1; dim <= 3; ++dim) {
    const Grid g = build_grid(dim, 1.5, 3, 4);
    for (int l = 0; l < g.levels(); ++l) {
      double sum = 0.0;
      bool positive = true;
      for (std::size_t i = 0; i < g.num_points(l); ++i) {
        const double w = g.weight(l, i);
        positive = positive && w > 0.0;
        sum += w;
      }
      CHECK(positive);
      CHECK(std::abs(sum - std::pow(2.0 * g.radius(l), dim)) <= 1e-12 * std::pow(2.0 * g.radius(l), dim));
    }
  }
}

TEST_CASE("nested lattices and sample bookkeeping") {
  const Grid g = build_grid(2, 1.0, 3, 4);
  CHECK(g.finest_points() == g.num_points(2));
  std::size_t level0 = 0, interior0 = 0;
  g.for_each_sample([&](const Grid::Sample& s) {
    const double r = std::max(std::abs(s.x[0]), std::abs(s.x[1]));
    CHECK(s.level >= 0);
    CHECK(r <= g.radius(s.level) + 1e-12);
    if (s.level > 0) CHECK(r > g.radius(s.level - 1));
    CHECK(s.interior_level >= s.level);
    if (s.level == 0) ++level0;
    if (s.interior_level == 0) ++interior0;
  });
  CHECK(level0 == g.num_points(0));
  CHECK(interior0 == (g.axis_points(0) - 4) * (g.axis_points(0) - 4));
}

TEST_CASE("quadrature examples") {
  const Grid g = build_grid(1, 4.0, 3, 16);
  CHECK(integrate([](const Point&) { return 1.0; }, g, 0) == doctest::Approx(8.0).epsilon(1e-14));
  const double gauss = integrate([](const Point& x) { return std::exp(-x[0] * x[0]); }, g, 1);
  CHECK(std::abs(gauss - std::sqrt(std::numbers::pi)) < 1e-8);

  const Grid wide = build_grid(1, 16.0, 3, 16);
  const double lorentz = integrate([](const Point& x) { return 1.0 / (1.0 + x[0] * x[0]); }, wide, 2);
  CHECK(std::abs(lorentz - std::numbers::pi) <= 2.0 / wide.radius(2));
  CHECK(lorentz < std::numbers::pi);

  CHECK_THROWS_AS(integrate([](const Point& x) { return 1.0 / x[0]; }, g, 0), Error);
}

TEST_CASE("quadrature order on a smooth integrand") {
  auto f = [](const Point& x) { return std::exp(-x[0] * x[0]); };
  const double exact = std::sqrt(std::numbers::pi) * std::erf(1.0);
  double prev = 0.0;
  for (int ppu : {4, 8, 16, 32}) {
    const double err = std::abs(integrate(f, build_grid(1, 1.0, 2, ppu), 0) - exact);
    if (prev > 0.0) CHECK(std::log2(prev / err) >= 3.5);
    prev = err;
  }
}

TEST_CASE("integrate_finest agrees with integrate") {
  const Grid g = build_grid(2, 1.0, 3, 4);
  auto f = [](const Point& x) { return std::cos(x[0]) * std::exp(-x[1] * x[1]); };
  std::vector<double> values(g.finest_points());
  g.for_each_sample([&](const Grid::Sample& s) { values[s.index] = f(s.x); });
  for (int l = 0; l < g.levels(); ++l)
    CHECK(g.integrate_finest(values, l) == doctest::Approx(integrate(f, g, l)).epsilon(1e-14));
}

TEST_CASE("tail verdicts") {
  SUBCASE("constant") {
    const Verdict v = tail_extrapolate({{5, 5, 5}, 1e-6});
    CHECK(v.status == Convergence::converged);
    CHECK(v.value == 5.0);
  }
  SUBCASE("linear growth") { CHECK(tail_extrapolate({{8, 16, 32}, 1e-6}).status == Convergence::divergent); }
  SUBCASE("halving increments report the last value") {
    const Verdict v = tail_extrapolate({{1.0, 1.5, 1.75, 1.875}, 0.2});
    CHECK(v.status == Convergence::converged);
    CHECK(v.value == 1.875);
  }
  SUBCASE("shrinking but above tolerance") {
    CHECK(tail_extrapolate({{1.0, 1.5, 1.75, 1.875}, 1e-6}).status == Convergence::inconclusive);
  }
  SUBCASE("appending the last value keeps a converged verdict") {
    const Verdict a = tail_extrapolate({{2.0, 2.0 + 1e-9, 2.0 + 1.5e-9}, 1e-6});
    REQUIRE(a.converged());
    const Verdict b = tail_extrapolate({{2.0, 2.0 + 1e-9, 2.0 + 1.5e-9, 2.0 + 1.5e-9}, 1e-6});
    CHECK(b.converged());
    CHECK(b.value == a.value);
  }
  SUBCASE("non-converged verdicts carry no value") {
    CHECK(std::isnan(tail_extrapolate({{8, 16, 32}, 1e-6}).value));
  }
}

TEST_CASE("derivative examples") {
  const Grid g2 = build_grid(2, 1.0, 2, 8);
  const SampledField c = derivative([](const Point&) { return 3.0; }, MultiIndex{{1, 0}}, g2, 0);
  CHECK(!c.values.empty());
  for (double v : c.values) CHECK(v == 0.0);

  const SampledField xy = derivative([](const Point& x) { return x[0] * x[1]; }, MultiIndex{{1, 1}}, g2, 0);
  for (double v : xy.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(xy.indices.size() == (g2.axis_points(0) - 4) * (g2.axis_points(0) - 4));

  double prev = 0.0;
  for (int ppu : {8, 16, 32}) {
    const Grid g = build_grid(1, 1.0, 2, ppu);
    const SampledField d = derivative([](const Point& x) { return std::sin(x[0]); }, MultiIndex{{2}}, g, 0);
    double err = 0.0;
    for (std::size_t i = 0; i < d.indices.size(); ++i)
      err = std::max(err, std::abs(d.values[i] + std::sin(g.point(0, d.indices[i])[0])));
    const double h = g.spacing();
    CHECK(err <= std::pow(h, 4) / 40.0);
    if (prev > 0.0) CHECK(std::log2(prev / err) >= 3.5);
    prev = err;
  }
}

TEST_CASE("derivative is exact on quartic polynomials") {
  const Grid g = build_grid(2, 1.0, 2, 8);
  auto p = [](const Point& x) { return 1.0 + 2.0 * x[0] - x[1] + x[0] * x[0] * x[1] * x[1] + 0.5 * std::pow(x[0], 4); };
  const SampledField d11 = derivative(p, MultiIndex{{2, 0}}, g, 0);
  for (std::size_t i = 0; i < d11.indices.size(); ++i) {
    const Point x = g.point(0, d11.indices[i]);
    CHECK(std::abs(d11.values[i] - (2.0 * x[1] * x[1] + 6.0 * x[0] * x[0])) < 1e-10);
  }
  const SampledField d12 = derivative(p, MultiIndex{{1, 1}}, g, 0);
  for (std::size_t i = 0; i < d12.indices.size(); ++i) {
    const Point x = g.point(0, d12.indices[i]);
    CHECK(std::abs(d12.values[i] - 4.0 * x[0] * x[1]) < 1e-10);
  }
  CHECK_THROWS_AS(derivative(x1, MultiIndex{{3}}, g, 0), Error);
  CHECK_THROWS_AS(derivative(x1, MultiIndex{{1}}, g, 2), Error);
}

TEST_CASE("pairwise sum and level max") {
  std::vector<double> v(1000, 0.1);
  CHECK(pairwise_sum(v) == doctest::Approx(100.0).epsilon(1e-14));
  LevelMax m(3);
  m.add(0, 1.0);
  m.add(2, 0.5);
  m.add(1, 2.0);
  CHECK(m.cumulative() == std::vector<double>{1.0, 2.0, 2.0});
}
