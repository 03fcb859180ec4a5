#pragma once

// The canonical L2 metric on Riemannian metrics over the truncated domain:
// volume, the trace and frame forms of G_g(h, k), and the boundedness
// certificate |G_g(h, k)| <= n |h|_g |k|_g Vol(g).

#include <vector>

#include "conefield/field.hpp"
#include "conefield/gauge.hpp"
#include "conefield/grid.hpp"

namespace conefield {

struct MetricField {
  SymTensorField field;
  GridConfig grid;
  std::vector<double> min_eigenvalue;  // per level
  bool eigenvalue_decays = false;
};

// Throws metric_degenerate unless lambda_min / rho of g(x) exceeds tol_pd at
// every sample. The test is scale free, so decaying conformal factors pass.
MetricField make_metric(const SymTensorField& g, const Grid& grid, double tol_pd = 1e-10);

struct VolumeResult {
  LevelSeries series;
  Verdict verdict;
  double value() const { return verdict.value; }
};

VolumeResult volume(const MetricField& g, const Grid& grid, double tol_rel = 1e-6);
Verdict is_finite_volume(const MetricField& g, const Grid& grid, double tol_rel = 1e-6);

struct InnerResult {
  LevelSeries series;
  Verdict verdict;
  double value() const { return verdict.value; }
};

// Per level: integral of trace(g^-1 h g^-1 k) sqrt(det g).
InnerResult ebin_inner(const MetricField& g, const SymTensorField& h, const SymTensorField& k, const Grid& grid,
                       double tol_rel = 1e-6);

// Columns E_i with E^T g E = I: Gram-Schmidt of e_1..e_n in coordinate order,
// with one reorthogonalisation pass.
Mat orthonormal_frame(const Mat& g);
Mat orthonormal_frame(const MetricField& g, const Point& x);

// Same integral in the frame form: sum_i E_i^T k g^-1 h E_i with g^-1 = E E^T
// and sqrt(det g) = 1 / |det E|.
InnerResult ebin_inner_frame(const MetricField& g, const SymTensorField& h, const SymTensorField& k,
                             const Grid& grid, double tol_rel = 1e-6);

struct BoundCertificate {
  double value = 0.0;  // G at the last level
  int n = 0;
  double h_norm = 0.0;
  double k_norm = 0.0;
  double volume = 0.0;
  double bound = 0.0;
  double slack = 0.0;  // bound - |value|, last level
  bool pass = false;   // slack >= -1e-9 * bound at every level
  std::vector<double> level_values;
  std::vector<double> level_bounds;
  std::vector<double> level_slack;
};

// Requires converged order-0 norms of h and k against g (not_measurable) and
// a converged volume (volume_divergent).
BoundCertificate bound_certificate(const MetricField& g, const SymTensorField& h, const SymTensorField& k,
                                   const Grid& grid, const CalcOptions& options = {});

// Converged G_g values; throws not_converged for any inconclusive or divergent entry.
std::vector<std::vector<double>> gram(const MetricField& g, std::span<const SymTensorField> fields,
                                      const Grid& grid, double tol_rel = 1e-6);

}  // namespace conefield
