#ifndef SBP_SOLVER_HPP
#define SBP_SOLVER_HPP

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sbp/metric_ops.hpp"

namespace sbp {

/// Covariant: velocity unknowns are contravariant components (v¹, v²).
/// Cartesian: velocity unknowns are (vₓ on edge1, v_y on edge2).
enum class Formulation { Covariant, Cartesian };

/// Boundary data supplied to the RK4 stages.
/// Carpenter: stage values of the forced solution (default).
/// Taylor: cubic Taylor polynomial of the data at the stage time.
/// Naive: data evaluated at the stage time.
enum class StageData { Carpenter, Taylor, Naive };

std::string to_string(Formulation f);
Formulation parse_formulation(const std::string& name);
std::string to_string(StageData s);
StageData parse_stage_data(const std::string& name);

struct State {
  Vec p;   // cells
  Vec v1;  // edge1
  Vec v2;  // edge2
  double t = 0.0;
};

/// Pressure data on each SAT side: fills one value per boundary point
/// (cell-centred along the side) for the requested time derivative order 0..3.
struct BoundaryData {
  std::function<void(Side side, double t, int order, Vec& out)> eval;
  explicit operator bool() const { return static_cast<bool>(eval); }
};

struct SourceSpec {
  double r_star = 0.45;  // r¹ coordinate on the top boundary r² = 1
  double t0 = 1.7;
  double amplitude = 1.0;
};

struct SolverConfig {
  MappingSpec mapping = MappingSpec::identity();
  CoefficientTable table;  // empty closure rows mean the default table
  int n1 = 16;
  int n2 = 16;
  bool periodic1 = false;
  bool periodic2 = false;
  MetricVariant variant = MetricVariant::Modified;
  MetricMethod metric_method = MetricMethod::Sbp;
  Formulation formulation = Formulation::Covariant;
  StageData stage_data = StageData::Carpenter;
  double dt = 0.0;  // 0 selects dt from cfl
  double cfl = 0.5;
  double T = 0.5;
  std::optional<SourceSpec> source;
  std::vector<std::array<double, 2>> receivers;  // parameter coordinates
  std::vector<double> snapshot_times;
  int energy_every = 0;  // 0 disables the energy series
  bool skip_stability_check = false;
  /// Apply operators through explicit sparse matrices instead of line sweeps.
  bool assembled_operators = false;
};

/// Six-point discrete delta on a boundary line of cell-centred coordinates.
/// Moments Σ w (r̂ - r*)^m h = δ_{m0} for m = 0..4, remaining freedom spent on
/// the smallest second-difference energy. Returns (first index, weights).
struct DeltaWeights {
  std::size_t first = 0;
  Vec w;
};
DeltaWeights discretize_point_source(double r_star, const Vec& coords, double h, int closure_width = 4);

double ricker(double t, double t0);
/// d^k s / dt^k for k = 0..3.
double ricker_derivative(double t, double t0, int k);

/// Grid, operators, metric and tensor for one configuration.
class Discretization {
 public:
  explicit Discretization(const SolverConfig& cfg);

  const SolverConfig& config() const { return cfg_; }
  const StaggeredGrid2D& grid() const { return *grid_; }
  const Operators2D& ops() const { return *ops_; }
  const MetricFields& metric() const { return *metric_; }
  const MetricTensorOp& tensor() const { return *tensor_; }
  std::shared_ptr<const MetricTensorOp> tensor_ptr() const { return tensor_; }
  const NormWeights2D& norms() const { return tensor_->norms(); }

  /// Sides that carry a SAT (non-periodic directions).
  const std::vector<Side>& sat_sides() const { return sat_sides_; }
  std::size_t side_size(Side s) const;

  State zero_state(double t = 0.0) const;

  /// Semi-discrete right-hand side. `data` holds one vector per Side (indexed by
  /// the enum value); null means homogeneous data.
  void rhs(const State& s, const std::array<Vec, 4>* data, State& out) const;

  /// Time step from the CFL number and the largest metric spectral radius.
  double stable_dt(double cfl) const;

 private:
  SolverConfig cfg_;
  std::shared_ptr<const StaggeredGrid2D> grid_;
  std::shared_ptr<const Operators2D> ops_;
  std::shared_ptr<const MetricFields> metric_;
  std::shared_ptr<const MetricTensorOp> tensor_;
  std::vector<Side> sat_sides_;
  Vec invJc_, J1_, J2_;
  Vec AJ11_, AJ12_, AJ21_, AJ22_;  // Cartesian transform entries times the edge Jacobian
  mutable Vec w_, tmp1_, tmp2_, tmpc_;
};

/// Boundary data of a point source on the top side.
BoundaryData point_source_data(const Discretization& d, const SourceSpec& src);

struct ReceiverSeries {
  std::array<double, 2> r{};
  Vec p, v1, v2;
};

struct EnergyPoint {
  double t = 0.0;
  double acoustic = 0.0;
  double kinetic = 0.0;
};

struct RunResult {
  State final_state;
  Vec times;  // sample times of the receiver series (t = 0 and every step)
  std::vector<ReceiverSeries> receivers;
  std::vector<EnergyPoint> energy;
  std::vector<State> snapshots;
  int steps = 0;
  double dt = 0.0;
};

/// 4×4 Lagrange interpolation of a field at parameter point r.
double interpolate_at(const StaggeredGrid2D& g, Location loc, std::span<const double> f, double r1, double r2);

/// One classical RK4 step with stage-consistent boundary data.
void rk4_step(const Discretization& d, State& s, double dt, const BoundaryData& data, StageData mode);

/// Integrate from `initial` to cfg.T. Throws InstabilityError on a non-finite state
/// and when the modified tensor fails the point-wise stability check.
RunResult run(const Discretization& d, const State& initial, const BoundaryData& data);

}  // namespace sbp

#endif  // SBP_SOLVER_HPP
