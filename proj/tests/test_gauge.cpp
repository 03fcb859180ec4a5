#include <doctest.h>

#include <cmath>
#include <random>

#include "conefield/error.hpp"
#include "conefield/gauge.hpp"
#include "support.hpp"

using namespace conefield;
using test::max_diff;

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

SymTensorField expr1(const std::string& e) {
  const std::vector<std::string> entries{e};
  return expr_field(1, entries);
}

SymTensorField expr2(const std::string& a, const std::string& b, const std::string& c) {
  const std::vector<std::string> entries{a, b, c};
  return expr_field(2, entries);
}

std::vector<double> params(std::initializer_list<double> p) { return p; }

const ConeSpec kOrthant = ConeSpec::orthant();

}  // namespace

TEST_CASE("jet prolongation") {
  const Grid g = build_grid(2, 1.0, 2, 8);
  SUBCASE("constant fields have vanishing derivatives") {
    const JetField j = jet_prolong(expr2("2", "0.5", "1"), 2, g, 0);
    REQUIRE(!j.jets.empty());
    for (const Jet& jet : j.jets) {
      for (int a = 0; a < 2; ++a) {
        CHECK(jet.a1[static_cast<std::size_t>(a)].max_abs() == 0.0);
        for (int b = 0; b < 2; ++b) CHECK(jet.a2[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].max_abs() == 0.0);
      }
    }
  }
  SUBCASE("linear fields are differentiated exactly") {
    const JetField j = jet_prolong(expr2("2*x1", "-x1", "0.5*x1"), 1, g, 0);
    const Mat b = Mat::from_rows({2, -1, -1, 0.5});
    for (const Jet& jet : j.jets) {
      CHECK(max_diff(jet.a1[0], b) < 1e-13);
      CHECK(jet.a1[1].max_abs() < 1e-13);
    }
  }
  SUBCASE("order 0 covers every sample; higher orders the interior") {
    CHECK(jet_prolong(builtin_field("euclidean", 2), 0, g, 0).jets.size() == g.num_points(0));
    CHECK(jet_prolong(builtin_field("euclidean", 2), 1, g, 0).jets.size() ==
          (g.axis_points(0) - 4) * (g.axis_points(0) - 4));
  }
  SUBCASE("builtin jets are closed form") {
    const Grid g1 = build_grid(1, 2.0, 2, 8);
    const JetField j = jet_prolong(builtin_field("exp_gauge", 1, params({1.0})), 1, g1, 1);
    for (std::size_t i = 0; i < j.jets.size(); ++i) {
      const double e = std::exp(j.points[i][0]);
      CHECK(std::abs(j.jets[i].a1[0](0, 0) - e) <= 1e-15 * e);
    }
  }
  SUBCASE("order out of range") { CHECK(code_of([&] { jet_prolong(builtin_field("euclidean", 2), 3, g, 0); }) == Errc::invalid_argument); }
}

TEST_CASE("positivity") {
  const Grid g2 = build_grid(2, 1.0, 2, 8);
  const PositivityResult eu = is_positive(builtin_field("euclidean", 2), 0, kOrthant, g2);
  CHECK(eu.positive);
  CHECK(eu.per_level == std::vector<bool>{true, true});
  CHECK(eu.min_margin[1] == 1.0);

  const PositivityResult bad = is_positive(expr2("1", "0", "-1"), 0, kOrthant, g2);
  CHECK_FALSE(bad.positive);
  CHECK(bad.per_level == std::vector<bool>{false, false});

  const Grid g1 = build_grid(1, 2.0, 2, 8);
  const ConeSpec up = ConeSpec::parse("ray:+e1", 1);
  CHECK(is_positive(builtin_field("exp_gauge", 1, params({1.0})), 1, up, g1).positive);
  const PositivityResult down = is_positive(builtin_field("exp_gauge", 1, params({-1.0})), 1, up, g1);
  CHECK_FALSE(down.positive);
  CHECK(down.worst_order == 1);
}

TEST_CASE("gauge admissibility") {
  const Grid g1 = build_grid(1, 2.0, 2, 8);
  const GaugeSection eu = gauge_admissible(builtin_field("euclidean", 1), 0, kOrthant, g1);
  CHECK(eu.margin == std::vector<double>{1.0, 1.0});
  CHECK_FALSE(eu.margin_decays);

  const GaugeSection gauss = gauge_admissible(builtin_field("gaussian_conformal", 1, params({1.0})), 0, kOrthant, g1);
  for (int j = 0; j < 2; ++j) {
    const double r = g1.radius(j);
    CHECK(gauss.min_eigenvalue[static_cast<std::size_t>(j)] == doctest::Approx(std::exp(-r * r)).epsilon(1e-14));
  }
  CHECK(gauss.min_eigenvalue[1] < gauss.min_eigenvalue[0]);

  const ConeSpec up = ConeSpec::parse("ray:+e1", 1);
  try {
    gauge_admissible(builtin_field("euclidean", 1), 1, up, g1);
    FAIL("euclidean has a zero derivative");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::gauge_not_interior);
    CHECK(std::string(e.what()).find("order 1") != std::string::npos);
  }
  CHECK(code_of([&] { gauge_admissible(expr1("x1"), 0, kOrthant, g1); }) == Errc::gauge_not_interior);
  // Rays are not solid in two dimensions.
  const Grid g2 = build_grid(2, 1.0, 2, 8);
  CHECK(code_of([&] { gauge_admissible(builtin_field("exp_gauge", 2, params({1.0, 1.0})), 1, ConeSpec::parse("ray:+e1", 2), g2); }) ==
        Errc::invalid_argument);
}

TEST_CASE("norm examples") {
  const Grid g2 = build_grid(2, 1.0, 2, 8);
  const SymTensorField zf = builtin_field("gaussian_conformal", 2, params({0.5}));
  const GaugeSection z = gauge_admissible(zf, 0, kOrthant, g2);

  const NormResult zero = zeta_norm(zero_field(2), z, 0, g2);
  CHECK(zero.verdict.converged());
  CHECK(zero.value() == 0.0);

  const NormResult three = zeta_norm(3.0 * zf, z, 0, g2);
  CHECK(three.verdict.converged());
  CHECK(three.value() == doctest::Approx(3.0).epsilon(1e-15));

  for (std::size_t j = 1; j < three.series.values.size(); ++j)
    CHECK(three.series.values[j] >= three.series.values[j - 1]);
}

TEST_CASE("order-one norm of e^x sin(x) against e^x") {
  const Grid g = build_grid(1, 1.0, 4, 1024);
  const GaugeSection z = gauge_admissible(builtin_field("exp_gauge", 1, params({1.0})), 1, ConeSpec::parse("ray:+e1", 1), g);
  const NormResult n = zeta_norm(expr1("exp(x1)*sin(x1)"), z, 1, g, {1e-6, 1e-10});
  CHECK(n.verdict.converged());
  CHECK(std::abs(n.value() - std::sqrt(2.0)) < 1e-6);
  CHECK(n.argmax_order == 1);
  // Order 0 alone is sup |sin| = 1; the grid maximum wanders by 1e-8, so
  // the verdict may stay inconclusive.
  const NormResult n0 = zeta_norm(expr1("exp(x1)*sin(x1)"), z, 0, g, {1e-6, 1e-10});
  CHECK(std::abs(n0.series.values.back() - 1.0) < 1e-6);
}

TEST_CASE("norm needs a gauge certified at the requested order and grid") {
  const Grid g = build_grid(1, 2.0, 2, 8);
  const GaugeSection z0 = gauge_admissible(builtin_field("exp_gauge", 1, params({1.0})), 0, kOrthant, g);
  CHECK(code_of([&] { zeta_norm(expr1("1"), z0, 1, g); }) == Errc::invalid_argument);
  const Grid other = build_grid(1, 2.0, 2, 16);
  CHECK(code_of([&] { zeta_norm(expr1("1"), z0, 0, other); }) == Errc::invalid_argument);
}

TEST_CASE("measurability") {
  const Grid g = build_grid(1, 8.0, 3, 4);
  const GaugeSection eu = gauge_admissible(builtin_field("euclidean", 1), 0, kOrthant, g);
  CHECK(measurable(expr1("x1^2"), eu, 0, g).status == Convergence::divergent);
  const Verdict t = measurable(expr1("tanh(x1)^2"), eu, 0, g);
  CHECK(t.converged());
  CHECK(std::abs(t.value - 1.0) < 1e-6);

  const double center[] = {0.5};
  const SymTensorField b = bump(center, 1.0, 2.0, Mat::identity(1));
  const GaugeSection gauss = gauge_admissible(builtin_field("gaussian_conformal", 1, params({0.05})), 0, kOrthant, g);
  const NormResult nb = zeta_norm(b, gauss, 0, g);
  CHECK(nb.verdict.converged());
  CHECK(nb.series.values[0] == nb.series.values[2]);
}

TEST_CASE("balls are open order intervals") {
  const Grid g = build_grid(2, 1.0, 2, 8);
  const SymTensorField zf = builtin_field("exp_gauge", 2, params({0.5, 1.0}));
  const GaugeSection z = gauge_admissible(zf, 0, kOrthant, g);
  const SymTensorField zero = zero_field(2);
  CHECK(ball_member(zero, 1.0, z, 0, 0.5 * zf, g));
  CHECK(interval_member(zero, 1.0, z, 0, 0.5 * zf, g));
  CHECK_FALSE(ball_member(zero, 1.0, z, 0, zf, g));
  CHECK_FALSE(interval_member(zero, 1.0, z, 0, zf, g));

  const Grid wide = build_grid(1, 4.0, 3, 4);
  const GaugeSection eu = gauge_admissible(builtin_field("euclidean", 1), 0, kOrthant, wide);
  CHECK_FALSE(ball_member(zero_field(1), 100.0, eu, 0, expr1("x1^2"), wide));
  CHECK(code_of([&] { ball_member(zero_field(1), 100.0, eu, 0, expr1("tanh(x1/8)"), wide); }) == Errc::inconclusive_norm);
}

TEST_CASE("ball and interval agree on random pairs") {
  const Grid g = build_grid(2, 4.0, 2, 4);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const SymTensorField zf = builtin_field("exp_gauge", 2, params({0.7, 1.1}));
  for (int k = 0; k <= 1; ++k) {
    const GaugeSection z = gauge_admissible(zf, k, kOrthant, g);
    for (int trial = 0; trial < 20; ++trial) {
      auto entry = [&] {
        char buf[160];
        std::snprintf(buf, sizeof buf, "(%.6f + %.6f*tanh(5*x1) + %.6f*tanh(5*x2))*exp(0.7*x1 + 1.1*x2)", u(rng), u(rng),
                      u(rng));
        return std::string(buf);
      };
      const SymTensorField s = expr2(entry(), entry(), entry());
      const NormResult d = zeta_norm(s, z, k, g);
      REQUIRE(d.verdict.converged());
      const double eps = d.value() * (1.0 + (trial % 2 ? 0.05 : -0.05));
      CHECK(ball_member(zero_field(2), eps, z, k, s, g) == interval_member(zero_field(2), eps, z, k, s, g));
      CHECK(ball_member(zero_field(2), eps, z, k, s, g) == (trial % 2 == 1));
    }
  }
}

TEST_CASE("generating decomposition") {
  const Grid g = build_grid(1, 8.0, 3, 4);
  const SymTensorField zf = builtin_field("exp_gauge", 1, params({0.1}));
  const GaugeSection z = gauge_admissible(zf, 0, kOrthant, g);
  const Point x{0.7};

  const Decomposition same = decompose(zf, z, g);
  CHECK(same.already_positive);
  CHECK(same.negative(x).max_abs() == 0.0);

  const Decomposition neg = decompose(-1.0 * zf, z, g);
  CHECK_FALSE(neg.already_positive);
  CHECK(neg.lambda == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(neg.positive(x).max_abs() < 1e-15 * zf(x).max_abs());
  CHECK(max_diff(neg.negative(x), zf(x)) < 1e-15 * zf(x).max_abs());

  const SymTensorField s = expr1("tanh(x1)*exp(0.1*x1)");
  const Decomposition t = decompose(s, z, g);
  CHECK(std::abs(t.lambda - 1.0) < 1e-6);
  CHECK(is_positive(t.positive, 0, kOrthant, g).positive);
  CHECK(is_positive(t.negative, 0, kOrthant, g).positive);
  g.for_each_sample([&](const Grid::Sample& smp) {
    const Mat r = t.positive(smp.x) - t.negative(smp.x);
    CHECK(max_diff(r, s(smp.x)) <= 1e-12 * std::max(s(smp.x).max_abs(), t.negative(smp.x).max_abs()));
  });

  CHECK(code_of([&] { decompose(expr1("x1"), z, g); }) == Errc::not_measurable);
}

TEST_CASE("charts") {
  const Grid g = build_grid(1, 64.0, 3, 4);
  const Chart zero = chart_for(zero_field(1), g);
  CHECK(zero.gauge.field(Point{3.0}) == Mat::identity(1));
  CHECK(zero.norm.value() == 0.0);

  const Chart sq = chart_for(expr1("x1^2"), g);
  CHECK(sq.norm.verdict.converged());
  for (int j = 0; j < 3; ++j) {
    const double r = g.radius(j);
    CHECK(sq.norm.series.values[static_cast<std::size_t>(j)] ==
          doctest::Approx(r * r / std::sqrt(1.0 + r * r * r * r)).epsilon(1e-14));
    CHECK(sq.norm.series.values[static_cast<std::size_t>(j)] <= 1.0);
  }
  CHECK(sq.gauge.field(Point{2.0})(0, 0) == doctest::Approx(std::sqrt(17.0)).epsilon(1e-15));

  const Grid g2 = build_grid(2, 1.0, 2, 8);
  const Chart b = chart_for(expr2("sin(x1)", "0.5*cos(x2)", "-tanh(x1*x2)"), g2);
  for (double v : b.norm.series.values) CHECK(v < 1.0);
}

TEST_CASE("joins dominate both gauges") {
  const Grid g = build_grid(2, 1.0, 2, 8);
  const GaugeSection eu = gauge_admissible(builtin_field("euclidean", 2), 0, kOrthant, g);
  const GaugeSection ga = gauge_admissible(builtin_field("gaussian_conformal", 2, params({1.0})), 0, kOrthant, g);

  const GaugeSection twice = join(eu, eu);
  const SymTensorField s = expr2("sin(x1)", "0.2", "x2");
  const auto last = [&](const SymTensorField& f, const GaugeSection& z) { return zeta_norm(f, z, 0, g).series.values.back(); };
  CHECK(last(s, twice) == doctest::Approx(0.5 * last(s, eu)).epsilon(1e-14));

  const GaugeSection j = join(eu, ga);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    char a[96], b[96], c[96];
    std::snprintf(a, sizeof a, "%.5f*exp(-x1^2-x2^2)*cos(%.5f*x1)", u(rng), 3 * u(rng));
    std::snprintf(b, sizeof b, "%.5f*exp(-x1^2-x2^2)", u(rng));
    std::snprintf(c, sizeof c, "%.5f*exp(-x1^2-x2^2)*tanh(x2)", u(rng));
    const SymTensorField f = expr2(a, b, c);
    const double nj = last(f, j);
    CHECK(nj <= last(f, eu) * (1.0 + 1e-12));
    CHECK(nj <= last(f, ga) * (1.0 + 1e-12));
  }
  const GaugeSection ek = gauge_admissible(builtin_field("exp_gauge", 2, params({1.0, 1.0})), 1, kOrthant, g);
  CHECK(code_of([&] { join(eu, ek); }) == Errc::invalid_argument);
}

TEST_CASE("section order") {
  const Grid g = build_grid(2, 1.0, 2, 8);
  const SymTensorField eu = builtin_field("euclidean", 2);
  CHECK(compare_sections(eu, 2.0 * eu, 0, kOrthant, g).relation == Relation::leq);
  CHECK(compare_sections(2.0 * eu, eu, 0, kOrthant, g).relation == Relation::geq);
  CHECK(compare_sections(eu, eu, 0, kOrthant, g).relation == Relation::equal);
  CHECK(compare_sections(expr2("1", "0", "0"), expr2("0", "0", "1"), 0, kOrthant, g).relation == Relation::incomparable);
  // Values ordered, derivatives not.
  const SymTensorField a = builtin_field("exp_gauge", 2, params({1.0, 1.0}));
  const SymTensorField b = a + expr2("2 - tanh(x1)", "0", "2 - tanh(x1)");
  CHECK(compare_sections(a, b, 0, kOrthant, g).relation == Relation::leq);
  CHECK(compare_sections(a, b, 1, kOrthant, g).relation == Relation::incomparable);
}

TEST_CASE("jet order monotonicity") {
  const Grid g = build_grid(2, 1.0, 2, 8);
  const SymTensorField zf = builtin_field("exp_gauge", 2, params({1.0, 0.8}));
  const GaugeSection z = gauge_admissible(zf, 2, kOrthant, g);
  const SymTensorField s =
      linear_combination(std::vector<double>{0.3, -1.2}, std::vector<SymTensorField>{builtin_field("gaussian_conformal", 2, params({0.4})), builtin_field("exp_gauge", 2, params({0.5, 0.2}))});
  const NormResult n0 = zeta_norm(s, z, 0, g), n1 = zeta_norm(s, z, 1, g), n2 = zeta_norm(s, z, 2, g);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(n0.series.values[j] <= n1.series.values[j]);
    CHECK(n1.series.values[j] <= n2.series.values[j]);
  }
}
