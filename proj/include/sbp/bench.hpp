#ifndef SBP_BENCH_HPP
#define SBP_BENCH_HPP

#include <string>
#include <vector>

#include "sbp/solver.hpp"

namespace sbp {

enum class RhsImpl { MatrixFree, Assembled };
std::string to_string(RhsImpl impl);
RhsImpl parse_rhs_impl(const std::string& name);

struct BenchTiming {
  RhsImpl impl = RhsImpl::MatrixFree;
  int reps = 0;
  double seconds_per_apply = 0.0;
  double unknowns_per_second = 0.0;
  std::size_t operator_nnz = 0;  // stored sparse entries, assembled only
};

struct BenchReport {
  int n1 = 0, n2 = 0;
  std::size_t unknowns = 0;
  double max_rel_diff = 0.0;  // between the implementations, before timing
  std::vector<BenchTiming> timings;
  std::string to_json() const;
};

/// Full RHS application (covariant, G̃, homogeneous SAT) on the Gaussian-top
/// domain at a random state with a fixed seed. Both implementations are built
/// and compared; throws VerificationError if they differ by more than tol
/// relative to max |rhs|. Only `impls` are timed.
BenchReport bench_apply(int n1, int n2, const std::vector<RhsImpl>& impls, int reps, double tol = 1e-12,
                        unsigned seed = 7);

}  // namespace sbp

#endif  // SBP_BENCH_HPP
