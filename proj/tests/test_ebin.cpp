#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "conefield/ebin.hpp"
#include "conefield/error.hpp"
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

SymTensorField expr(int dim, std::vector<std::string> entries) { return expr_field(dim, entries); }

std::vector<double> params(std::initializer_list<double> p) { return p; }

}  // namespace

TEST_CASE("volume") {
  SUBCASE("euclidean volume diverges") {
    const Grid g = build_grid(1, 4.0, 3, 4);
    const VolumeResult v = volume(make_metric(builtin_field("euclidean", 1), g), g);
    CHECK(v.verdict.status == Convergence::divergent);
    CHECK(std::isnan(v.value()));
    for (int j = 0; j < 3; ++j) CHECK(v.series.values[static_cast<std::size_t>(j)] == doctest::Approx(2.0 * g.radius(j)).epsilon(1e-14));
  }
  SUBCASE("gaussian conformal volume is sqrt(2 pi)") {
    const Grid g = build_grid(1, 8.0, 2, 16);
    const VolumeResult v = volume(make_metric(builtin_field("gaussian_conformal", 1, params({1.0})), g), g);
    CHECK(v.verdict.converged());
    CHECK(std::abs(v.value() - std::sqrt(2.0 * std::numbers::pi)) < 1e-8);
  }
  SUBCASE("slow decay is inconclusive or divergent") {
    const Grid g = build_grid(1, 4.0, 3, 8);
    const VolumeResult v = volume(make_metric(builtin_field("inverse_poly_conformal", 1, params({0.5})), g), g);
    CHECK_FALSE(v.verdict.converged());
  }
  SUBCASE("conformal in two dimensions") {
    const Grid g = build_grid(2, 6.0, 2, 4);
    // sqrt(det(e^{-|x|^2} I)) = e^{-|x|^2}
    const VolumeResult v = volume(make_metric(builtin_field("gaussian_conformal", 2, params({1.0})), g), g);
    CHECK(v.verdict.converged());
    CHECK(std::abs(v.value() - std::numbers::pi) < 1e-6);
  }
}

TEST_CASE("metric certification") {
  const Grid g = build_grid(1, 2.0, 2, 8);
  CHECK(code_of([&] { make_metric(expr(1, {"x1"}), g); }) == Errc::metric_degenerate);
  CHECK(code_of([&] { make_metric(zero_field(1), g); }) == Errc::metric_degenerate);
  CHECK(code_of([&] { make_metric(builtin_field("euclidean", 2), g); }) == Errc::dimension_mismatch);
  const MetricField m = make_metric(builtin_field("gaussian_conformal", 1, params({1.0})), g);
  CHECK(m.eigenvalue_decays);
  CHECK(m.min_eigenvalue[1] == doctest::Approx(std::exp(-16.0)).epsilon(1e-14));
  const Grid other = build_grid(1, 2.0, 2, 16);
  CHECK(code_of([&] { volume(m, other); }) == Errc::invalid_argument);
}

TEST_CASE("inner product examples") {
  const Grid g = build_grid(2, 6.0, 2, 4);
  const SymTensorField metric = builtin_field("gaussian_conformal", 2, params({1.0}));
  const MetricField m = make_metric(metric, g);
  const double vol = volume(m, g).value();

  SUBCASE("G(g, g) = n Vol") {
    const InnerResult r = ebin_inner(m, metric, metric, g);
    CHECK(r.verdict.converged());
    CHECK(r.value() == doctest::Approx(2.0 * vol).epsilon(1e-12));
    CHECK(ebin_inner(m, metric, -1.0 * metric, g).value() == doctest::Approx(-2.0 * vol).epsilon(1e-12));
  }
  SUBCASE("traceless against g vanishes") {
    const SymTensorField t = expr(2, {"exp(-x1^2-x2^2)*x1", "exp(-x1^2-x2^2)", "-exp(-x1^2-x2^2)*x1"});
    for (double v : ebin_inner(m, metric, t, g).series.values) CHECK(std::abs(v) < 1e-14);
  }
}

TEST_CASE("one dimensional example") {
  // g = e^{-x^2}, h = k = g: integrand h^2 g^{-2} sqrt(g) = e^{-x^2/2}.
  const Grid g = build_grid(1, 8.0, 2, 16);
  const SymTensorField metric = builtin_field("gaussian_conformal", 1, params({1.0}));
  const MetricField m = make_metric(metric, g);
  const InnerResult r = ebin_inner(m, metric, metric, g);
  CHECK(r.verdict.converged());
  CHECK(std::abs(r.value() - std::sqrt(2.0 * std::numbers::pi)) < 1e-6);
  const InnerResult f = ebin_inner_frame(m, metric, metric, g);
  CHECK(std::abs(f.value() - r.value()) <= 1e-12 * r.value());
}

TEST_CASE("diagonal closed form") {
  // Diagonal g, h, k: trace(g^-1 h g^-1 k) sqrt(det g) = sum h_i k_i / g_i^2 * sqrt(prod g_i).
  const Grid g = build_grid(2, 2.0, 2, 8);
  const SymTensorField metric = expr(2, {"1 + x1^2", "0", "2 + sin(x2)"});
  const SymTensorField h = expr(2, {"exp(-x1^2)", "0", "x2"});
  const SymTensorField k = expr(2, {"cos(x1)", "0", "exp(-x2^2)"});
  const MetricField m = make_metric(metric, g);
  const InnerResult r = ebin_inner(m, h, k, g);
  const InnerResult f = ebin_inner_frame(m, h, k, g);
  for (int j = 0; j < 2; ++j) {
    const double oracle = integrate(
        [](const Point& x) {
          const double g1 = 1 + x[0] * x[0], g2 = 2 + std::sin(x[1]);
          return (std::exp(-x[0] * x[0]) * std::cos(x[0]) / (g1 * g1) + x[1] * std::exp(-x[1] * x[1]) / (g2 * g2)) *
                 std::sqrt(g1 * g2);
        },
        g, j);
    CHECK(std::abs(r.series.values[static_cast<std::size_t>(j)] - oracle) <= 1e-13 * std::max(1.0, std::abs(oracle)));
    CHECK(std::abs(f.series.values[static_cast<std::size_t>(j)] - oracle) <= 1e-12 * std::max(1.0, std::abs(oracle)));
  }
}

TEST_CASE("orthonormal frames") {
  std::mt19937_64 rng(5);
  for (int n = 1; n <= 4; ++n)
    for (int trial = 0; trial < 50; ++trial) {
      const Mat g = test::random_spd(rng, n);
      const Mat e = orthonormal_frame(g);
      CHECK(max_diff(e.transpose() * g * e, Mat::identity(n)) < 1e-12);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) CHECK(e(j, i) == 0.0);  // upper triangular: Gram-Schmidt of e_1..e_n
    }
  CHECK(code_of([] { orthonormal_frame(Mat::from_rows({1, 2, 2, 1})); }) == Errc::metric_degenerate);
}

TEST_CASE("symmetry and bilinearity") {
  const Grid g = build_grid(2, 2.0, 2, 8);
  const MetricField m = make_metric(expr(2, {"2 + tanh(x1)", "0.3*sin(x2)", "1.5 + 0.5*cos(x1*x2)"}), g);
  const SymTensorField a = expr(2, {"exp(-x1^2)", "x2*exp(-x2^2)", "sin(x1)"});
  const SymTensorField b = expr(2, {"cos(x2)", "-0.4", "exp(-x1^2-x2^2)"});
  const SymTensorField c = expr(2, {"x1", "x1*x2", "1"});
  const auto val = [&](const SymTensorField& h, const SymTensorField& k) { return ebin_inner(m, h, k, g).series.values; };
  const auto ab = val(a, b), ba = val(b, a), ac = val(a, c), bc = val(b, c);
  const auto comb = val(a, 2.0 * b - 3.0 * c);
  const auto comb_l = val(2.0 * a + c, b);
  const auto cb = val(c, b);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(std::abs(ab[j] - ba[j]) <= 1e-12 * std::abs(ab[j]));
    CHECK(std::abs(comb[j] - (2 * ab[j] - 3 * ac[j])) <= 1e-12 * (std::abs(ab[j]) + std::abs(ac[j])));
    CHECK(std::abs(comb_l[j] - (2 * ab[j] + cb[j])) <= 1e-12 * (std::abs(ab[j]) + std::abs(bc[j])));
  }
  CHECK(code_of([&] { ebin_inner(m, a, builtin_field("euclidean", 1), g); }) == Errc::dimension_mismatch);
}

TEST_CASE("boundedness certificate") {
  const Grid g = build_grid(1, 8.0, 2, 16);
  const SymTensorField metric = builtin_field("gaussian_conformal", 1, params({1.0}));
  const MetricField m = make_metric(metric, g);
  SUBCASE("saturated at h = k = g") {
    const BoundCertificate c = bound_certificate(m, metric, metric, g);
    CHECK(c.pass);
    CHECK(c.h_norm == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(c.slack) <= 1e-12 * c.bound);
  }
  SUBCASE("slack for a smaller pair") {
    const SymTensorField h = expr(1, {"exp(-x1^2)*tanh(x1)"});
    const BoundCertificate c = bound_certificate(m, h, metric, g);
    CHECK(c.pass);
    CHECK(c.slack > 0.0);
    for (std::size_t j = 0; j < c.level_slack.size(); ++j) CHECK(c.level_slack[j] >= 0.0);
  }
  SUBCASE("unmeasurable and divergent inputs") {
    CHECK(code_of([&] { bound_certificate(m, expr(1, {"1"}), metric, g); }) == Errc::not_measurable);
    const Grid wide = build_grid(1, 4.0, 3, 4);
    const SymTensorField eu = builtin_field("euclidean", 1);
    CHECK(code_of([&] { bound_certificate(make_metric(eu, wide), eu, eu, wide); }) == Errc::volume_divergent);
  }
}

TEST_CASE("gram matrices") {
  const Grid g = build_grid(1, 8.0, 2, 16);
  const SymTensorField metric = builtin_field("gaussian_conformal", 1, params({1.0}));
  const MetricField m = make_metric(metric, g);
  CHECK(gram(m, std::vector<SymTensorField>{}, g).empty());
  const auto single = gram(m, std::vector<SymTensorField>{metric}, g);
  REQUIRE(single.size() == 1);
  CHECK(std::abs(single[0][0] - std::sqrt(2.0 * std::numbers::pi)) < 1e-6);

  const Grid g2 = build_grid(2, 6.0, 2, 4);
  const MetricField m2 = make_metric(builtin_field("gaussian_conformal", 2, params({1.0})), g2);
  const std::vector<SymTensorField> fs{expr(2, {"exp(-x1^2-x2^2)", "0", "0"}), expr(2, {"0", "exp(-x1^2-x2^2)", "0"}),
                                       expr(2, {"0", "0", "exp(-x1^2-x2^2)"})};
  const auto gm = gram(m2, fs, g2);
  CHECK(gm[0][1] == 0.0);
  CHECK(gm[0][2] == 0.0);
  CHECK(gm[1][2] == 0.0);
  CHECK(gm[1][1] == doctest::Approx(2.0 * gm[0][0]).epsilon(1e-14));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(gm[i][j] == gm[j][i]);

  const Grid wide = build_grid(1, 4.0, 3, 4);
  const SymTensorField eu = builtin_field("euclidean", 1);
  CHECK(code_of([&] { gram(make_metric(eu, wide), std::vector<SymTensorField>{eu}, wide); }) == Errc::not_converged);
}
