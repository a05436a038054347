#ifndef SBP_CONSTRUCT_HPP
#define SBP_CONSTRUCT_HPP

#include <string>
#include <vector>

#include "sbp/operators1d.hpp"

namespace sbp {

enum class Objective { MinNorm, MaxNorm, Accuracy };

Objective parse_objective(const std::string& name);
std::string to_string(Objective o);

struct ConstructOptions {
  Objective objective = Objective::MinNorm;
  /// ‖PP̂‖₂ aimed for by MaxNorm.
  double max_norm_target = 8.53;
  /// Resolution at which ‖PP̂‖₂ is evaluated during the search.
  int eval_N = 32;
  /// Lower bound on every closure norm weight during the search.
  double min_weight = 0.05;
  int max_evaluations = 20000;
  /// Largest ‖PP̂‖₂ of the accuracy-optimal interpolation pair admitted when
  /// choosing the difference parameters.
  double norm_cap = 1.04;
  /// Weight-changing difference parameters; empty means chosen by the degree-3 residual.
  std::vector<double> params_d;
};

struct ConstructionResult {
  CoefficientTable table;
  double norm_PPhat = 0.0;
  int equations_d = 0;
  int rank_d = 0;
  int free_d = 0;
  /// Free difference parameters that change the norm weights.
  int weight_free_d = 0;
  int equations_p = 0;
  int rank_p = 0;
  int free_p = 0;
  std::vector<double> params_d;
  std::vector<double> params_p;
  /// ℓ₂ degree-3 residual of the D and D̂ closure rows.
  double residual_d3 = 0.0;
  int evaluations = 0;
  /// Non-fatal diagnostics, e.g. min_norm ending above 1.5.
  std::vector<std::string> warnings;
};

/// Solve the closure constraint systems of a 4/2 staggered pair and fix the
/// free parameters by the requested objective. Throws VerificationError if the
/// constraints are inconsistent.
ConstructionResult construct_operator_set(int boundary_order, const ConstructOptions& opts = {});

/// Derivative-free simplex minimisation. Exposed for testing.
struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int evaluations = 0;
};

template <class F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> x0, double step, int max_evals, double ftol = 1e-13);

}  // namespace sbp

#include "sbp/detail/nelder_mead.hpp"

#endif  // SBP_CONSTRUCT_HPP
