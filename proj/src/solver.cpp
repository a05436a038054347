#include "sbp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "sbp/analysis.hpp"
#include "sbp/errors.hpp"
#include "sbp/stability.hpp"

namespace sbp {

std::string to_string(Formulation f) { return f == Formulation::Covariant ? "covariant" : "cartesian"; }

Formulation parse_formulation(const std::string& name) {
  if (name == "covariant" || name == "co") return Formulation::Covariant;
  if (name == "cartesian" || name == "ca") return Formulation::Cartesian;
  throw ConfigError("unknown formulation '" + name + "' (expected covariant or cartesian)");
}

std::string to_string(StageData s) {
  switch (s) {
    case StageData::Carpenter: return "carpenter";
    case StageData::Taylor: return "taylor";
    case StageData::Naive: return "naive";
  }
  return "?";
}

StageData parse_stage_data(const std::string& name) {
  if (name == "carpenter") return StageData::Carpenter;
  if (name == "taylor") return StageData::Taylor;
  if (name == "naive") return StageData::Naive;
  throw ConfigError("unknown stage data mode '" + name + "' (expected carpenter, taylor or naive)");
}

double ricker(double t, double t0) { return ricker_derivative(t, t0, 0); }

double ricker_derivative(double t, double t0, int k) {
  const double a = std::numbers::pi * std::numbers::pi;
  const double s = t - t0;
  const double E = std::exp(-a * s * s);
  switch (k) {
    case 0: return (1.0 - 2.0 * a * s * s) * E;
    case 1: return E * (-6.0 * a * s + 4.0 * a * a * s * s * s);
    case 2: return E * (-6.0 * a + 24.0 * a * a * s * s - 8.0 * a * a * a * s * s * s * s);
    case 3:
      return E * (60.0 * a * a * s - 80.0 * a * a * a * s * s * s + 16.0 * a * a * a * a * s * s * s * s * s);
    default: throw ConfigError("ricker_derivative: order must be 0..3");
  }
}

DeltaWeights discretize_point_source(double r_star, const Vec& coords, double h, int closure_width) {
  const std::size_t n = coords.size();
  if (!(r_star > 0.0 && r_star < 1.0)) throw ConfigError("point source: r* must lie in (0, 1)");
  std::size_t i0 = 0;
  while (i0 + 1 < n && coords[i0 + 1] <= r_star) ++i0;
  if (i0 < 2 + static_cast<std::size_t>(closure_width) || i0 + 4 + closure_width > n) {
    std::ostringstream os;
    os << "point source at r* = " << r_star << " overlaps the boundary closure region";
    throw ConfigError(os.str());
  }
  DeltaWeights d;
  d.first = i0 - 2;
  constexpr int K = 6;
  // moments in units of h keep the system O(1)
  Eigen::MatrixXd A(5, K);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(5);
  b(0) = 1.0 / h;
  for (int m = 0; m < 5; ++m)
    for (int k = 0; k < K; ++k) A(m, k) = std::pow((coords[d.first + k] - r_star) / h, m);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(K, K);
  for (int k = 0; k < K; ++k) {
    L(k, k) = -2.0;
    if (k > 0) L(k, k - 1) = 1.0;
    if (k + 1 < K) L(k, k + 1) = 1.0;
  }
  const Eigen::MatrixXd Q = L.transpose() * L;
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(K + 5, K + 5);
  kkt.topLeftCorner(K, K) = 2.0 * Q;
  kkt.topRightCorner(K, 5) = A.transpose();
  kkt.bottomLeftCorner(5, K) = A;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(K + 5);
  rhs.tail(5) = b;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  if (!lu.isInvertible()) throw VerificationError("point source: singular moment system");
  const Eigen::VectorXd sol = lu.solve(rhs);
  d.w.resize(K);
  for (int k = 0; k < K; ++k) d.w[k] = sol(k);
  return d;
}

Discretization::Discretization(const SolverConfig& cfg) : cfg_(cfg) {
  if (cfg_.table.closure_d.empty()) cfg_.table = default_table();
  if (cfg_.T < 0.0) throw ConfigError("final time T must be non-negative");
  if (cfg_.dt < 0.0) throw ConfigError("time step must be positive");
  grid_ = std::make_shared<const StaggeredGrid2D>(cfg_.table, cfg_.n1, cfg_.n2, cfg_.periodic1, cfg_.periodic2);
  ops_ = std::make_shared<const Operators2D>(*grid_, cfg_.assembled_operators);
  metric_ = std::make_shared<const MetricFields>(build_metric_fields(cfg_.mapping, *grid_, cfg_.metric_method));
  tensor_ = std::make_shared<const MetricTensorOp>(grid_, ops_, metric_, cfg_.variant);
  if (!cfg_.periodic1) sat_sides_.insert(sat_sides_.end(), {Side::Left, Side::Right});
  if (!cfg_.periodic2) sat_sides_.insert(sat_sides_.end(), {Side::Bottom, Side::Top});
  const LocationMetrics &c = metric_->cell, &e1 = metric_->edge1, &e2 = metric_->edge2;
  invJc_.resize(c.J.size());
  for (std::size_t k = 0; k < c.J.size(); ++k) invJc_[k] = 1.0 / c.J[k];
  J1_ = e1.J;
  J2_ = e2.J;
  AJ11_.resize(J1_.size()), AJ12_.resize(J1_.size());
  for (std::size_t k = 0; k < J1_.size(); ++k) {
    AJ11_[k] = e1.A11[k] * J1_[k];
    AJ12_[k] = e1.A12[k] * J1_[k];
  }
  AJ21_.resize(J2_.size()), AJ22_.resize(J2_.size());
  for (std::size_t k = 0; k < J2_.size(); ++k) {
    AJ21_[k] = e2.A21[k] * J2_[k];
    AJ22_[k] = e2.A22[k] * J2_[k];
  }
}

std::size_t Discretization::side_size(Side s) const {
  const Shape c = grid_->shape(Location::Cell);
  return (s == Side::Left || s == Side::Right) ? c.n2 : c.n1;
}

State Discretization::zero_state(double t) const {
  State s;
  s.p.assign(grid_->size(Location::Cell), 0.0);
  s.v1.assign(grid_->size(Location::Edge1), 0.0);
  s.v2.assign(grid_->size(Location::Edge2), 0.0);
  s.t = t;
  return s;
}

void Discretization::rhs(const State& s, const std::array<Vec, 4>* data, State& out) const {
  const std::size_t n1 = J1_.size(), n2 = J2_.size(), nc = invJc_.size();
  const Shape sc = grid_->shape(Location::Cell), se1 = grid_->shape(Location::Edge1), se2 = grid_->shape(Location::Edge2);
  out.p.resize(nc), out.v1.resize(n1), out.v2.resize(n2);
  out.t = s.t;
  w_.resize(n1 + n2);
  tmp1_.resize(n1), tmp2_.resize(n2), tmpc_.resize(nc);
  std::span<double> w1(w_.data(), n1), w2(w_.data() + n1, n2);

  // pressure gradient with SAT: w = D p - S
  ops_->D1.apply(s.p, w1);
  ops_->D2.apply(s.p, w2);
  for (Side side : sat_sides_) {
    const Vec* f = data ? &(*data)[static_cast<int>(side)] : nullptr;
    if (f && f->empty()) f = nullptr;
    switch (side) {
      case Side::Left: {
        const double m = grid_->ops(1).M.front();
        for (std::size_t j = 0; j < sc.n2; ++j) w1[j] += (s.p[j] - (f ? (*f)[j] : 0.0)) / m;
        break;
      }
      case Side::Right: {
        const double m = grid_->ops(1).M.back();
        const std::size_t ic = (sc.n1 - 1) * sc.n2, ie = (se1.n1 - 1) * se1.n2;
        for (std::size_t j = 0; j < sc.n2; ++j) w1[ie + j] -= (s.p[ic + j] - (f ? (*f)[j] : 0.0)) / m;
        break;
      }
      case Side::Bottom: {
        const double m = grid_->ops(2).M.front();
        for (std::size_t i = 0; i < sc.n1; ++i) w2[i * se2.n2] += (s.p[i * sc.n2] - (f ? (*f)[i] : 0.0)) / m;
        break;
      }
      case Side::Top: {
        const double m = grid_->ops(2).M.back();
        for (std::size_t i = 0; i < sc.n1; ++i)
          w2[i * se2.n2 + se2.n2 - 1] -= (s.p[i * sc.n2 + sc.n2 - 1] - (f ? (*f)[i] : 0.0)) / m;
        break;
      }
    }
  }

  // velocity update
  if (cfg_.formulation == Formulation::Covariant) {
    thread_local Vec gw;
    gw.resize(n1 + n2);
    tensor_->apply(w_, gw);
    for (std::size_t k = 0; k < n1; ++k) out.v1[k] = -gw[k];
    for (std::size_t k = 0; k < n2; ++k) out.v2[k] = -gw[n1 + k];
    // pressure: -Ĵ⁻¹ (D̂₁ J₁ v¹ + D̂₂ J₂ v²)
    for (std::size_t k = 0; k < n1; ++k) tmp1_[k] = J1_[k] * s.v1[k];
    for (std::size_t k = 0; k < n2; ++k) tmp2_[k] = J2_[k] * s.v2[k];
  } else {
    const LocationMetrics &e1 = metric_->edge1, &e2 = metric_->edge2;
    // d(vx, vy)/dt = -Ã w
    ops_->P12.apply(w2, tmp1_);
    ops_->P21.apply(w1, tmp2_);
    for (std::size_t k = 0; k < n1; ++k) out.v1[k] = -(e1.A11[k] * w1[k] + e1.A12[k] * tmp1_[k]);
    for (std::size_t k = 0; k < n2; ++k) out.v2[k] = -(e2.A21[k] * tmp2_[k] + e2.A22[k] * w2[k]);
    // u = H⁻¹ Ãᵀ H J v
    thread_local Vec a, b;
    a.resize(n2), b.resize(n1);
    for (std::size_t k = 0; k < n2; ++k) a[k] = AJ21_[k] * s.v2[k];
    for (std::size_t k = 0; k < n1; ++k) b[k] = AJ12_[k] * s.v1[k];
    ops_->P12.apply(a, tmp1_);
    ops_->P21.apply(b, tmp2_);
    for (std::size_t k = 0; k < n1; ++k) tmp1_[k] += AJ11_[k] * s.v1[k];
    for (std::size_t k = 0; k < n2; ++k) tmp2_[k] += AJ22_[k] * s.v2[k];
  }
  ops_->Dhat1.apply(tmp1_, out.p);
  ops_->Dhat2.apply(tmp2_, tmpc_);
  for (std::size_t k = 0; k < nc; ++k) out.p[k] = -invJc_[k] * (out.p[k] + tmpc_[k]);
}

double Discretization::stable_dt(double cfl) const {
  const LocationMetrics& c = metric_->cell;
  const double h1 = grid_->h(1), h2 = grid_->h(2);
  double rho = 0.0;
  for (std::size_t k = 0; k < c.J.size(); ++k) {
    const double a = c.gu11[k] / (h1 * h1), b = c.gu12[k] / (h1 * h2), d = c.gu22[k] / (h2 * h2);
    rho = std::max(rho, 0.5 * (a + d) + std::sqrt(0.25 * (a - d) * (a - d) + b * b));
  }
  return cfl / std::sqrt(rho);
}

BoundaryData point_source_data(const Discretization& d, const SourceSpec& src) {
  if (d.config().periodic2) throw ConfigError("point source requires a non-periodic top boundary");
  const StaggeredGrid2D& g = d.grid();
  const Vec& r1 = g.coords(Location::Cell, 1);
  const DeltaWeights dw = discretize_point_source(src.r_star, r1, g.h(1), g.ops(1).boundary_width);
  Vec scaled(dw.w.size());
  for (std::size_t k = 0; k < dw.w.size(); ++k) {
    const MapJacobian J = mapping_derivatives(d.metric().mapping, r1[dw.first + k], 1.0);
    scaled[k] = src.amplitude * dw.w[k] / std::hypot(J.xr1, J.yr1);
  }
  const std::size_t n = d.side_size(Side::Top);
  BoundaryData bd;
  bd.eval = [dw, scaled, n, src](Side side, double t, int order, Vec& out) {
    out.assign(n, 0.0);
    if (side != Side::Top) return;
    const double s = ricker_derivative(t, src.t0, order);
    for (std::size_t k = 0; k < scaled.size(); ++k) out[dw.first + k] = scaled[k] * s;
  };
  return bd;
}

namespace {

// 4-point Lagrange weights on nonuniform coordinates; returns the first index.
std::size_t lagrange4(const Vec& x, double r, std::array<double, 4>& w) {
  const std::size_t n = x.size();
  std::size_t i = 0;
  while (i + 1 < n && x[i + 1] <= r) ++i;
  std::size_t first = i >= 1 ? i - 1 : 0;
  if (first + 4 > n) first = n - 4;
  for (int a = 0; a < 4; ++a) {
    double v = 1.0;
    for (int b = 0; b < 4; ++b)
      if (a != b) v *= (r - x[first + b]) / (x[first + a] - x[first + b]);
    w[a] = v;
  }
  return first;
}

void axpy(Vec& y, const Vec& x, double a, const Vec& z) {
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = x[k] + a * z[k];
}

void state_axpy(State& y, const State& x, double a, const State& k) {
  axpy(y.p, x.p, a, k.p);
  axpy(y.v1, x.v1, a, k.v1);
  axpy(y.v2, x.v2, a, k.v2);
}

bool finite_state(const State& s, double limit) {
  auto ok = [limit](const Vec& v) {
    for (double x : v)
      if (!(std::abs(x) <= limit)) return false;
    return true;
  };
  return ok(s.p) && ok(s.v1) && ok(s.v2);
}

}  // namespace

double interpolate_at(const StaggeredGrid2D& g, Location loc, std::span<const double> f, double r1, double r2) {
  std::array<double, 4> w1{}, w2{};
  const std::size_t i0 = lagrange4(g.coords(loc, 1), r1, w1);
  const std::size_t j0 = lagrange4(g.coords(loc, 2), r2, w2);
  const std::size_t n2 = g.shape(loc).n2;
  double v = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) v += w1[a] * w2[b] * f[(i0 + a) * n2 + j0 + b];
  return v;
}

void rk4_step(const Discretization& d, State& s, double dt, const BoundaryData& data, StageData mode) {
  thread_local State k1, k2, k3, k4, u;
  std::array<std::array<Vec, 4>, 4> f;  // [stage][side]
  const bool has_data = static_cast<bool>(data);
  if (has_data) {
    static constexpr double c[4] = {0.0, 0.5, 0.5, 1.0};
    for (Side side : d.sat_sides()) {
      const int si = static_cast<int>(side);
      if (mode == StageData::Naive) {
        for (int st = 0; st < 4; ++st) data.eval(side, s.t + c[st] * dt, 0, f[st][si]);
        continue;
      }
      std::array<Vec, 4> g;
      for (int k = 0; k < 4; ++k) data.eval(side, s.t, k, g[k]);
      const std::size_t n = g[0].size();
      for (int st = 0; st < 4; ++st) f[st][si].assign(n, 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        const double g0 = g[0][j], g1 = g[1][j], g2 = g[2][j], g3 = g[3][j];
        if (mode == StageData::Carpenter) {
          f[0][si][j] = g0;
          f[1][si][j] = g0 + 0.5 * dt * g1;
          f[2][si][j] = g0 + 0.5 * dt * g1 + 0.25 * dt * dt * g2;
          f[3][si][j] = g0 + dt * g1 + 0.5 * dt * dt * g2 + 0.25 * dt * dt * dt * g3;
        } else {
          for (int st = 0; st < 4; ++st) {
            const double tau = c[st] * dt;
            f[st][si][j] = g0 + tau * g1 + 0.5 * tau * tau * g2 + tau * tau * tau / 6.0 * g3;
          }
        }
      }
    }
  }
  auto stage = [&](int st) { return has_data ? &f[st] : nullptr; };
  u = s;
  d.rhs(s, stage(0), k1);
  state_axpy(u, s, 0.5 * dt, k1);
  u.t = s.t + 0.5 * dt;
  d.rhs(u, stage(1), k2);
  state_axpy(u, s, 0.5 * dt, k2);
  d.rhs(u, stage(2), k3);
  state_axpy(u, s, dt, k3);
  u.t = s.t + dt;
  d.rhs(u, stage(3), k4);
  const double a = dt / 6.0;
  for (std::size_t k = 0; k < s.p.size(); ++k) s.p[k] += a * (k1.p[k] + 2.0 * k2.p[k] + 2.0 * k3.p[k] + k4.p[k]);
  for (std::size_t k = 0; k < s.v1.size(); ++k)
    s.v1[k] += a * (k1.v1[k] + 2.0 * k2.v1[k] + 2.0 * k3.v1[k] + k4.v1[k]);
  for (std::size_t k = 0; k < s.v2.size(); ++k)
    s.v2[k] += a * (k1.v2[k] + 2.0 * k2.v2[k] + 2.0 * k3.v2[k] + k4.v2[k]);
  s.t += dt;
}

RunResult run(const Discretization& d, const State& initial, const BoundaryData& data) {
  const SolverConfig& cfg = d.config();
  if (cfg.variant == MetricVariant::Modified && cfg.formulation == Formulation::Covariant &&
      !cfg.skip_stability_check) {
    const StabilityReport rep = stability_check(d.metric(), d.grid());
    if (!rep.definite) {
      std::ostringstream os;
      os << "stability precheck failed for the modified metric tensor (min eig of C = " << rep.min_eig_C
         << "); pass skip_stability_check to override";
      throw InstabilityError(os.str(), 0);
    }
  }
  RunResult res;
  double dt = cfg.dt > 0.0 ? cfg.dt : d.stable_dt(cfg.cfl);
  const int steps = cfg.T > 0.0 ? static_cast<int>(std::ceil(cfg.T / dt - 1e-9)) : 0;
  if (steps > 0) dt = cfg.T / steps;
  res.dt = dt;
  res.steps = steps;
  State s = initial;
  for (const auto& r : cfg.receivers) res.receivers.push_back({r, {}, {}, {}});
  auto record = [&] {
    res.times.push_back(s.t);
    for (ReceiverSeries& rs : res.receivers) {
      rs.p.push_back(interpolate_at(d.grid(), Location::Cell, s.p, rs.r[0], rs.r[1]));
      rs.v1.push_back(interpolate_at(d.grid(), Location::Edge1, s.v1, rs.r[0], rs.r[1]));
      rs.v2.push_back(interpolate_at(d.grid(), Location::Edge2, s.v2, rs.r[0], rs.r[1]));
    }
    if (cfg.energy_every > 0 && (res.times.size() - 1) % static_cast<std::size_t>(cfg.energy_every) == 0) {
      const EnergySample e = energy(d, s);
      res.energy.push_back({s.t, e.acoustic, e.kinetic});
    }
  };
  std::vector<int> snap_steps;
  for (double ts : cfg.snapshot_times) snap_steps.push_back(static_cast<int>(std::lround(ts / dt)));
  auto snap = [&](int step) {
    for (int ss : snap_steps)
      if (ss == step) res.snapshots.push_back(s);
  };
  if (!cfg.receivers.empty() || cfg.energy_every > 0) record();
  snap(0);
  for (int n = 1; n <= steps; ++n) {
    rk4_step(d, s, dt, data, cfg.stage_data);
    if (!finite_state(s, 1e150)) {
      std::ostringstream os;
      os << "non-finite solution detected at step " << n << " (t = " << s.t << ")";
      throw InstabilityError(os.str(), n);
    }
    if (!cfg.receivers.empty() || cfg.energy_every > 0) record();
    snap(n);
  }
  res.final_state = std::move(s);
  return res;
}

}  // namespace sbp
