#pragma once

// Seeded property suites and the random field generator they draw from.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "conefield/field.hpp"
#include "conefield/grid.hpp"
#include "conefield/report.hpp"

namespace conefield {

struct SuiteResult {
  std::string name;
  int trials = 0;
  int failures = 0;
  // Smallest normalised slack seen; a check fails when its slack is below its tolerance.
  double worst_slack = 0.0;
  std::string first_failure;
};

struct SuiteReport {
  std::vector<SuiteResult> suites;
  bool pass() const;
  Json to_json() const;
};

struct VerifyConfig {
  std::uint64_t seed = 0;
  std::string suite;  // empty: every suite
  int trials = 0;     // 0: the suite's default count
};

std::vector<std::string> suite_names();
int default_trials(const std::string& suite);
// Throws invalid_argument for an unknown suite name.
SuiteResult run_suite(const std::string& name, std::uint64_t seed, int trials = 0);
SuiteReport verify_all(const VerifyConfig& config);

namespace gen {

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);
  double uniform(double lo, double hi);
  int index(int count);  // 0 .. count-1
  bool coin() { return index(2) == 1; }

 private:
  std::mt19937_64 engine_;
};

// A builtin gauge with the coordinate expressions of sqrt(d_a d_b), where
// d is its diagonal. All catalogue gauges are diagonal.
struct Gauge {
  SymTensorField field;
  std::string name;
  std::vector<std::string> pair_factor;  // upper triangle, row major
  int dim = 1;

  const std::string& factor(int a, int b) const;
};

Gauge euclidean(int dim);
Gauge gaussian(int dim, double a);
Gauge inverse_poly(int dim, double p);
Gauge exp_gauge(std::span<const double> c);
Gauge cusp2d();
// Every builtin family at this dimension with representative parameters.
std::vector<Gauge> catalogue(int dim);
// Random member of the catalogue; with jet_capable only exp_gauge with
// positive coefficients (admissible up to order 2 for the orthant).
Gauge random_gauge(Rng& rng, int dim, bool jet_capable);

// c0 + sum c_i t_i + sum_{i<=j} c_ij t_i t_j with t_i = tanh(s x_i) and
// coefficients in [-1, 1]. bound receives sum |c|.
std::string tanh_poly(Rng& rng, int dim, double steepness, double* bound = nullptr);

// Entries B_ab(tanh(s x)) sqrt(d_a d_b): measurable against the gauge by construction.
SymTensorField bounded_field(Rng& rng, const Gauge& gauge, double steepness);
// Same, with B replaced by c I + B and c beyond the Gershgorin radius of B,
// so the result is uniformly comparable to the gauge.
SymTensorField comparable_gauge(Rng& rng, const Gauge& gauge, double steepness);
// phi (I + beta B(tanh(s x))) with ||beta B|| <= 0.9 by Gershgorin.
SymTensorField random_metric(Rng& rng, const Gauge& conformal, double steepness);

}  // namespace gen

}  // namespace conefield
