#ifndef SBP_VERIFY_HPP
#define SBP_VERIFY_HPP

#include <array>
#include <string>

#include "sbp/operators1d.hpp"

namespace sbp {

/// Residuals of the defining identities of an operator set. Monomial entries
/// are indexed by degree; -1 marks a degree that is not checked.
struct VerificationReport {
  int N = 0;
  bool periodic = false;
  double sbp_difference = 0.0;
  double sbp_interpolation = 0.0;
  std::array<double, 5> d_exact{};
  std::array<double, 5> dhat_exact{};
  std::array<double, 4> p_exact{};
  std::array<double, 4> phat_exact{};
  std::array<double, 4> quadrature{};
  double min_m = 0.0;
  double min_mhat = 0.0;
  double min_sv_p = 0.0;
  double min_sv_phat = 0.0;

  /// Largest of the identity, exactness and quadrature residuals.
  double max_residual() const;
  /// Name of the first residual above tol, or empty.
  std::string first_failure(double tol) const;
  std::string to_json() const;
};

/// Periodic sets are checked for exactness on locally centred monomials.
VerificationReport verify_operator_set(const OperatorSet1D& ops);

}  // namespace sbp

#endif  // SBP_VERIFY_HPP
