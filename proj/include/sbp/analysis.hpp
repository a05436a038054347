#ifndef SBP_ANALYSIS_HPP
#define SBP_ANALYSIS_HPP

#include <array>
#include <string>
#include <vector>

#include "sbp/solver.hpp"

namespace sbp {

struct EnergySample {
  double t = 0.0;
  double acoustic = 0.0;
  double kinetic = 0.0;
  double total() const { return acoustic + kinetic; }
};

/// E_a = ½pᵀĤĴp, E_k = ½(HJv)ᵀ(HJG)⁻¹(HJv) (covariant) or ½vᵀHJv (Cartesian).
EnergySample energy(const Discretization& d, const State& s, const CgOptions& cg = {});

/// dE/dt for the state s given its time derivative ds.
double energy_rate(const Discretization& d, const State& s, const State& ds, const CgOptions& cg = {});

/// Manufactured solution in Cartesian components.
struct Mms {
  static double p(double x, double y, double t, int order = 0);
  static double vx(double x, double y, double t, int order = 0);
  static double vy(double x, double y, double t, int order = 0);
};

/// Exact state (or its time derivative for order 1) in the unknowns of the formulation.
/// Contravariant components use the discrete contravariant basis of the metric fields.
State mms_state(const Discretization& d, double t, int order = 0);

/// Pressure data p = p̃ on every SAT side.
BoundaryData mms_boundary_data(const Discretization& d);

struct FieldNorms {
  std::array<double, 3> l2{};    // p, v1, v2
  std::array<double, 3> linf{};
  double sum_l2() const { return l2[0] + l2[1] + l2[2]; }
  double sum_linf() const { return linf[0] + linf[1] + linf[2]; }
};

/// l₂ with uniform h₁h₂ weighting and l∞, per field.
FieldNorms error_norms(const Discretization& d, const State& s, const State& exact);

struct ErrorRow {
  int n = 0;
  double h = 0.0;
  FieldNorms err;
  double q_l2 = 0.0;  // NaN on the first row
  double q_inf = 0.0;
};

struct ErrorTable {
  std::vector<ErrorRow> rows;
  std::string csv(const std::string& label = "") const;
};

/// Rates log₂(E_{2h}/E_h) between consecutive rows; rows must be nested by factors of 2.
ErrorTable convergence_table(const std::vector<std::pair<int, FieldNorms>>& runs);
double rate(double coarse, double fine);

/// Characteristic variables at the bottom boundary.
struct Characteristics {
  double w_plus = 0.0, w_minus = 0.0, w_zero = 0.0, eta = 0.0;
};
Characteristics characteristic_variables(double p, double v1, double v2, double J, double g11, double g12,
                                         double g22);

/// Symmetrizer factor F with W = FFᵀ, row-major 3×3.
std::array<double, 9> symmetrizer_factor(double J, double g11, double g12, double g22);
std::array<double, 9> symmetrizer(double J, double g11, double g12, double g22);

struct CharacteristicSlice {
  Vec r2;  // cell-centred r² coordinates of the slice
  Vec w_plus, w_minus, w_zero;
  Vec err_v1, err_v2, err_p;  // pointwise absolute errors
  double err_c_l2 = 0.0, err_c_inf = 0.0;
  double err_nc_l2 = 0.0, err_nc_inf = 0.0;
};

/// Slice r¹ = r1 through the bottom boundary, first `points` cell-centred points in r².
/// p and v² are interpolated to the edge1 line with the SBP interpolation operators.
CharacteristicSlice characteristic_errors(const Discretization& d, const State& s, const State& exact,
                                          double r1 = 0.5, int points = 4);

struct MmsResult {
  int n1 = 0, n2 = 0;
  double dt = 0.0;
  int steps = 0;
  FieldNorms err;
  CharacteristicSlice slice;
};

/// Manufactured-solution run: exact initial data, Dirichlet pressure data on all SAT sides.
MmsResult run_mms(const SolverConfig& cfg, bool with_slice = false);

struct ConvergenceStudy {
  std::vector<MmsResult> runs;
  ErrorTable table;
};

/// MMS runs at n₁ ∈ levels, n₂ = n2_ratio·n₁. A positive dt_coarse fixes
/// Δt = dt_coarse·levels[0]/n₁; otherwise the CFL rule of `base` applies.
/// Levels may run on `jobs` worker threads; results stay ordered by level.
/// Instability is rethrown with the level in the message.
ConvergenceStudy run_convergence(const SolverConfig& base, const std::vector<int>& levels, int n2_ratio = 1,
                                 double dt_coarse = 0.0, bool with_slice = false, int jobs = 1);

/// Point source on the Gaussian-top domain at refinement `level`:
/// (128·2^level)×(64·2^level) cells, Δt = 0.03125/2^level, T = 7.8125, receiver r = (0.5, 0.5).
SolverConfig point_source_config(int level);
RunResult run_point_source(const SolverConfig& cfg);

struct TraceError {
  double p = 0.0, v1 = 0.0, v2 = 0.0;
};
/// Relative l₂ difference over the coarse sample times; the reference time
/// samples must contain the coarse ones at a fixed integer stride.
TraceError receiver_error(const RunResult& coarse, const RunResult& reference, std::size_t receiver = 0);

/// Largest second difference |f_{k+1} - 2f_k + f_{k-1}|/4 for t_k < t_end, relative to max |f|.
double pre_arrival_oscillation(const Vec& times, const Vec& trace, double t_end);

/// Earliest time at which the source wavelet could reach the receiver: t₀ + distance - 1,
/// with unit wave speed.
double pre_arrival_end(const SolverConfig& cfg, std::size_t receiver = 0);

}  // namespace sbp

#endif  // SBP_ANALYSIS_HPP
