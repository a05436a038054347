#ifndef SBP_STABILITY_HPP
#define SBP_STABILITY_HPP

#include <optional>
#include <string>
#include <vector>

#include "sbp/metric_ops.hpp"

namespace sbp {

/// Eigenvalues (ascending) of a dense symmetric matrix by cyclic Jacobi rotations.
/// Optionally returns the eigenvectors as columns of `vectors`.
Vec symmetric_eigen(const DenseMatrix& A, DenseMatrix* vectors = nullptr, double tol = 1e-12, int max_sweeps = 30);

/// True when a dense symmetric matrix admits a Cholesky factorization.
bool cholesky_succeeds(const DenseMatrix& A);

struct LineBounds {
  double alpha = 0.0;  // 1 / max λ⁽¹⁾
  double beta = 0.0;   // 1 / max λ⁽²⁾
  Vec lambda1;         // largest eigenvalue on each r¹ line (r² = x̂_j)
  Vec lambda2;         // largest eigenvalue on each r² line (r¹ = x̂_k)
};

/// Decoupled 1-D eigenproblems for the B-block bounds.
LineBounds line_eigen_bounds(const MetricFields& metric, const StaggeredGrid2D& g);

struct PointwiseResult {
  double min_eigenvalue = 0.0;
  bool definite = false;
};

/// Smallest eigenvalue over cell centers of [[α ĝ¹¹, ĝ¹²], [ĝ¹², β ĝ²²]].
/// The positive factor ĤĴ is left out; it cannot change the sign.
PointwiseResult pointwise_definiteness(const MetricFields& metric, double alpha, double beta);

/// Dense HJG (or HJG̃): symmetrized after checking asymmetry, spectrum by Jacobi.
double direct_min_eigenvalue(const MetricTensorOp& op);
DenseMatrix dense_HJG(const MetricTensorOp& op);

struct StabilityReport {
  double alpha = 0.0;
  double beta = 0.0;
  Vec lambda1;
  Vec lambda2;
  double min_eig_C = 0.0;
  bool definite = false;
  std::optional<double> direct_min;
  std::string note = "point-wise test drops the positive factor HJ at each cell";

  std::string verdict() const { return definite ? "definite" : "inconclusive"; }
  std::string to_json() const;
};

StabilityReport stability_check(const MetricFields& metric, const StaggeredGrid2D& g);

struct SweepRow {
  double gamma = 0.0;
  double norm_PPhat = 0.0;
  double lambda_min_direct = 0.0;
  double lambda_min_bound = 0.0;
  bool definite = false;
};

/// Gaussian-hill sweep at n×n cells for each coefficient table (variant = modified).
std::vector<SweepRow> gamma_sweep(const std::vector<double>& gammas, const std::vector<CoefficientTable>& tables,
                                  int n = 16, MetricMethod method = MetricMethod::Analytic);

std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Smallest γ in [lo, hi] with an indefinite HJG̃ (direct) or an inconclusive
/// point-wise test (bound), by bisection. Returns hi when no change is found.
double critical_gamma_direct(const CoefficientTable& table, int n, double lo, double hi, double tol = 1e-3,
                             MetricMethod method = MetricMethod::Analytic);
double critical_gamma_bound(const CoefficientTable& table, int n, double lo, double hi, double tol = 1e-4,
                            MetricMethod method = MetricMethod::Analytic);

/// Modified metric tensor on a Gaussian-hill grid.
MetricTensorOp hill_operator(const CoefficientTable& table, int n, double gamma, MetricMethod method,
                             MetricVariant variant = MetricVariant::Modified);

}  // namespace sbp

#endif  // SBP_STABILITY_HPP
