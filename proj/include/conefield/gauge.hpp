#pragma once

// Section-level cone calculus: positivity up to jet order k, gauge
// admissibility, gauge norms with convergence verdicts, balls versus order
// intervals, the generating decomposition, and the chart/join constructions.
//
// The jet cone K^k declares (A0, .., Ak) positive iff A0 is PSD and
// Ai(v, .., v) is PSD for every v in the tangent cone. Order 1 is checked on
// the extreme rays (exact, by linearity); order 2 on sampled directions, so
// order-2 norms are lower bounds.

#include <optional>
#include <vector>

#include "conefield/fiber_cone.hpp"
#include "conefield/field.hpp"
#include "conefield/grid.hpp"

namespace conefield {

inline constexpr int kMaxJetOrder = 2;

struct CalcOptions {
  double tol_rel = 1e-6;  // convergence verdicts
  double tol_pd = 1e-10;  // membership thresholds and interior margins
};

struct JetField {
  int order = 0;
  int level = 0;
  std::vector<std::size_t> indices;  // into the level lattice
  std::vector<Point> points;
  std::vector<Jet> jets;
};

// Order 0 covers every level sample; higher orders only the samples inside
// the stencil band.
JetField jet_prolong(const SymTensorField& sigma, int k, const Grid& grid, int level);

struct PositivityResult {
  bool positive = true;
  std::vector<bool> per_level;
  std::vector<double> min_margin;  // per level: min of lambda_min / rho over all checks
  Point worst_point{};
  int worst_order = 0;
};

PositivityResult is_positive(const SymTensorField& sigma, int k, const ConeSpec& cone, const Grid& grid,
                             const CalcOptions& options = {});

struct GaugeSection {
  SymTensorField field;
  int order = 0;
  ConeSpec cone;
  GridConfig grid;
  std::vector<double> min_eigenvalue;  // per level, of zeta(x) itself
  std::vector<double> margin;          // per level, min relative interior margin over orders 0..k
  bool margin_decays = false;
};

// Throws gauge_not_interior (naming the worst point and order) unless every
// relative interior margin exceeds options.tol_pd.
GaugeSection gauge_admissible(const SymTensorField& zeta, int k, const ConeSpec& cone, const Grid& grid,
                              const CalcOptions& options = {});

struct NormResult {
  LevelSeries series;                       // per-level sup of the minimal lambda
  Verdict verdict;
  std::vector<std::vector<double>> per_order;  // per_order[i][level]
  Point argmax{};                           // worst sample at the last level
  int argmax_order = 0;

  double value() const { return verdict.value; }
};

NormResult zeta_norm(const SymTensorField& sigma, const GaugeSection& zeta, int k, const Grid& grid,
                     const CalcOptions& options = {});

// Converged norm verdict means measurable over the computed exhaustion.
Verdict measurable(const SymTensorField& sigma, const GaugeSection& zeta, int k, const Grid& grid,
                   const CalcOptions& options = {});

// |sigma - center|^k_zeta < eps. Throws inconclusive_norm when the verdict is
// inconclusive; a divergent norm is simply outside every ball.
bool ball_member(const SymTensorField& center, double eps, const GaugeSection& zeta, int k,
                 const SymTensorField& sigma, const Grid& grid, const CalcOptions& options = {});

// center - eps*zeta < sigma < center + eps*zeta strictly, for all jet orders
// <= k, at every sample of every level. Uses eigenvalues of the differences,
// not the pencil.
bool interval_member(const SymTensorField& center, double eps, const GaugeSection& zeta, int k,
                     const SymTensorField& sigma, const Grid& grid);

struct Decomposition {
  SymTensorField positive;  // zeta1
  SymTensorField negative;  // zeta2
  double lambda = 0.0;      // |sigma|^0_zeta used for the shift (0 if sigma is positive)
  bool already_positive = false;
};

// sigma = zeta1 - zeta2 with zeta2 = |sigma|^0_zeta * zeta, zeta1 = sigma + zeta2.
Decomposition decompose(const SymTensorField& sigma, const GaugeSection& zeta, const Grid& grid,
                        const CalcOptions& options = {});

struct Chart {
  GaugeSection gauge;
  NormResult norm;
};

// Gauge (1 + ||sigma||_F^2)^{1/2} I, which bounds |sigma|^0 by 1 on every level.
Chart chart_for(const SymTensorField& sigma, const Grid& grid, const CalcOptions& options = {});

// zeta1 + zeta2, re-certified; dominates both for the norm.
GaugeSection join(const GaugeSection& zeta1, const GaugeSection& zeta2, const CalcOptions& options = {});

struct SectionOrder {
  Relation relation = Relation::incomparable;
  std::vector<Relation> per_level;
};

// a <= b iff j^i(b - a) lies in the jet cone for i <= k at every sample.
SectionOrder compare_sections(const SymTensorField& a, const SymTensorField& b, int k, const ConeSpec& cone,
                              const Grid& grid, const CalcOptions& options = {});

}  // namespace conefield
