#ifndef SBP_METRIC_OPS_HPP
#define SBP_METRIC_OPS_HPP

#include <memory>
#include <string>

#include "sbp/kron.hpp"
#include "sbp/metrics.hpp"

namespace sbp {

/// Unconditional: every block interpolates to cell centers and back.
/// Modified: diagonal blocks are the edge samples g₁¹¹, g₂²² directly.
enum class MetricVariant { Unconditional, Modified };

std::string to_string(MetricVariant v);
MetricVariant parse_metric_variant(const std::string& name);

struct CgOptions {
  double tol = 1e-12;
  int max_iter = 0;  // 0 means 10·n
  bool jacobi = false;
};

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  bool indefinite = false;  // a search direction with pᵀAp <= 0 was met
};

/// Matrix-free contravariant metric tensor acting on paired vectors
/// w = [w₁ (edge1); w₂ (edge2)] stored contiguously.
class MetricTensorOp {
 public:
  MetricTensorOp(std::shared_ptr<const StaggeredGrid2D> grid, std::shared_ptr<const Operators2D> ops,
                 std::shared_ptr<const MetricFields> metric, MetricVariant variant);

  MetricVariant variant() const { return variant_; }
  std::size_t n1() const { return n1_; }
  std::size_t n2() const { return n2_; }
  std::size_t size() const { return n1_ + n2_; }
  const StaggeredGrid2D& grid() const { return *grid_; }
  const Operators2D& ops() const { return *ops_; }
  const MetricFields& metric() const { return *metric_; }
  const NormWeights2D& norms() const { return norms_; }

  /// y = G w.
  void apply(std::span<const double> w, std::span<double> y) const;
  /// y = H J G w.
  void apply_HJG(std::span<const double> w, std::span<double> y) const;
  /// y = H J w (diagonal).
  void apply_HJ(std::span<const double> w, std::span<double> y) const;
  /// Diagonal of H J G, for preconditioning.
  Vec diagonal_HJG() const;

  /// Solve H J G z = rhs by conjugate gradients; z holds the initial guess.
  CgResult solve_HJG(std::span<const double> rhs, std::span<double> z, const CgOptions& opt = {}) const;
  /// As solve_HJG but throws ConvergenceError when CG fails.
  Vec solve_HJG_checked(std::span<const double> rhs, const CgOptions& opt = {}) const;

  /// Explicit matrices for oracles and benchmarks.
  SparseMatrix assemble_G() const;
  SparseMatrix assemble_HJG() const;

 private:
  std::shared_ptr<const StaggeredGrid2D> grid_;
  std::shared_ptr<const Operators2D> ops_;
  std::shared_ptr<const MetricFields> metric_;
  MetricVariant variant_;
  NormWeights2D norms_;
  std::size_t n1_ = 0, n2_ = 0, nc_ = 0;
  Vec Jg11c_, Jg12c_, Jg22c_;  // Ĵĝᵏˡ at cells
  Vec invJ1_, invJ2_;
  Vec HJ1_, HJ2_;
};

/// Assemble [[A, B], [C, D]]; null blocks are zero.
SparseMatrix block_matrix(const SparseMatrix* a, const SparseMatrix* b, const SparseMatrix* c, const SparseMatrix* d,
                          std::size_t r1, std::size_t r2, std::size_t c1, std::size_t c2);

}  // namespace sbp

#endif  // SBP_METRIC_OPS_HPP
