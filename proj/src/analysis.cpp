#include "sbp/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "sbp/errors.hpp"

namespace sbp {

using std::numbers::pi;

EnergySample energy(const Discretization& d, const State& s, const CgOptions& cg) {
  EnergySample e;
  e.t = s.t;
  const Vec& Hh = d.norms().Hhat;
  const Vec& Jc = d.metric().cell.J;
  for (std::size_t k = 0; k < s.p.size(); ++k) e.acoustic += 0.5 * Hh[k] * Jc[k] * s.p[k] * s.p[k];
  const MetricTensorOp& op = d.tensor();
  Vec v(s.v1);
  v.insert(v.end(), s.v2.begin(), s.v2.end());
  Vec hjv(v.size());
  op.apply_HJ(v, hjv);
  if (d.config().formulation == Formulation::Cartesian) {
    e.kinetic = 0.5 * dot(hjv, v);
    return e;
  }
  const Vec z = op.solve_HJG_checked(hjv, cg);
  e.kinetic = 0.5 * dot(hjv, z);
  return e;
}

double energy_rate(const Discretization& d, const State& s, const State& ds, const CgOptions& cg) {
  const Vec& Hh = d.norms().Hhat;
  const Vec& Jc = d.metric().cell.J;
  double r = 0.0;
  for (std::size_t k = 0; k < s.p.size(); ++k) r += Hh[k] * Jc[k] * s.p[k] * ds.p[k];
  const MetricTensorOp& op = d.tensor();
  Vec v(s.v1), dv(ds.v1);
  v.insert(v.end(), s.v2.begin(), s.v2.end());
  dv.insert(dv.end(), ds.v2.begin(), ds.v2.end());
  Vec hjdv(dv.size());
  op.apply_HJ(dv, hjdv);
  if (d.config().formulation == Formulation::Cartesian) return r + dot(hjdv, v);
  Vec hjv(v.size());
  op.apply_HJ(v, hjv);
  const Vec z = op.solve_HJG_checked(hjdv, cg);
  return r + dot(hjv, z);
}

namespace {

const double kOmega = 2.0 * std::numbers::sqrt2 * pi;

// d^k/dt^k of cos(ωt) and sin(ωt)
double dcos(double t, int k) {
  const double w = std::pow(kOmega, k);
  switch (k % 4) {
    case 0: return w * std::cos(kOmega * t);
    case 1: return -w * std::sin(kOmega * t);
    case 2: return -w * std::cos(kOmega * t);
    default: return w * std::sin(kOmega * t);
  }
}
double dsin(double t, int k) {
  const double w = std::pow(kOmega, k);
  switch (k % 4) {
    case 0: return w * std::sin(kOmega * t);
    case 1: return w * std::cos(kOmega * t);
    case 2: return -w * std::sin(kOmega * t);
    default: return -w * std::cos(kOmega * t);
  }
}

}  // namespace

double Mms::p(double x, double y, double t, int order) {
  return std::sin(2 * pi * x) * std::sin(2 * pi * y) * dcos(t, order);
}
double Mms::vx(double x, double y, double t, int order) {
  return -(1.0 / std::numbers::sqrt2) * std::cos(2 * pi * x) * std::sin(2 * pi * y) * dsin(t, order);
}
double Mms::vy(double x, double y, double t, int order) {
  return -(1.0 / std::numbers::sqrt2) * std::sin(2 * pi * x) * std::cos(2 * pi * y) * dsin(t, order);
}

State mms_state(const Discretization& d, double t, int order) {
  State s = d.zero_state(t);
  const MetricFields& m = d.metric();
  for (std::size_t k = 0; k < s.p.size(); ++k) s.p[k] = Mms::p(m.cell.x[k], m.cell.y[k], t, order);
  const bool cart = d.config().formulation == Formulation::Cartesian;
  const LocationMetrics &e1 = m.edge1, &e2 = m.edge2;
  for (std::size_t k = 0; k < s.v1.size(); ++k) {
    const double vx = Mms::vx(e1.x[k], e1.y[k], t, order), vy = Mms::vy(e1.x[k], e1.y[k], t, order);
    s.v1[k] = cart ? vx : vx * e1.A11[k] + vy * e1.A21[k];
  }
  for (std::size_t k = 0; k < s.v2.size(); ++k) {
    const double vx = Mms::vx(e2.x[k], e2.y[k], t, order), vy = Mms::vy(e2.x[k], e2.y[k], t, order);
    s.v2[k] = cart ? vy : vx * e2.A12[k] + vy * e2.A22[k];
  }
  return s;
}

BoundaryData mms_boundary_data(const Discretization& d) {
  const StaggeredGrid2D& g = d.grid();
  const Vec& r1 = g.coords(Location::Cell, 1);
  const Vec& r2 = g.coords(Location::Cell, 2);
  std::array<std::vector<MapPoint>, 4> pts;
  for (Side side : d.sat_sides()) {
    auto& v = pts[static_cast<int>(side)];
    switch (side) {
      case Side::Left:
        for (double y : r2) v.push_back(evaluate_mapping(d.metric().mapping, 0.0, y));
        break;
      case Side::Right:
        for (double y : r2) v.push_back(evaluate_mapping(d.metric().mapping, 1.0, y));
        break;
      case Side::Bottom:
        for (double x : r1) v.push_back(evaluate_mapping(d.metric().mapping, x, 0.0));
        break;
      case Side::Top:
        for (double x : r1) v.push_back(evaluate_mapping(d.metric().mapping, x, 1.0));
        break;
    }
  }
  BoundaryData bd;
  bd.eval = [pts](Side side, double t, int order, Vec& out) {
    const auto& v = pts[static_cast<int>(side)];
    out.resize(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) out[k] = Mms::p(v[k].x, v[k].y, t, order);
  };
  return bd;
}

FieldNorms error_norms(const Discretization& d, const State& s, const State& exact) {
  const double w = d.grid().h(1) * d.grid().h(2);
  FieldNorms n;
  const Vec* a[3] = {&s.p, &s.v1, &s.v2};
  const Vec* b[3] = {&exact.p, &exact.v1, &exact.v2};
  for (int f = 0; f < 3; ++f) {
    if (a[f]->size() != b[f]->size()) throw ConfigError("error_norms: location mismatch");
    double sum = 0.0, mx = 0.0;
    for (std::size_t k = 0; k < a[f]->size(); ++k) {
      const double e = (*a[f])[k] - (*b[f])[k];
      sum += e * e;
      mx = std::max(mx, std::abs(e));
    }
    n.l2[f] = std::sqrt(w * sum);
    n.linf[f] = mx;
  }
  return n;
}

double rate(double coarse, double fine) { return std::log2(coarse / fine); }

ErrorTable convergence_table(const std::vector<std::pair<int, FieldNorms>>& runs) {
  if (runs.size() < 2) throw ConfigError("convergence_table: at least two resolutions are required");
  ErrorTable t;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    ErrorRow r;
    r.n = runs[k].first;
    r.h = 1.0 / r.n;
    r.err = runs[k].second;
    r.q_l2 = r.q_inf = std::numeric_limits<double>::quiet_NaN();
    if (k > 0) {
      if (runs[k].first != 2 * runs[k - 1].first)
        throw ConfigError("convergence_table: resolutions must be nested by factors of 2");
      r.q_l2 = rate(t.rows.back().err.sum_l2(), r.err.sum_l2());
      r.q_inf = rate(t.rows.back().err.sum_linf(), r.err.sum_linf());
    }
    t.rows.push_back(r);
  }
  return t;
}

std::string ErrorTable::csv(const std::string& label) const {
  std::ostringstream os;
  const std::string sfx = label.empty() ? "" : "_" + label;
  os << "N,h,err_l2" << sfx << ",err_inf" << sfx << ",q_l2" << sfx << ",q_inf" << sfx << ",p_l2,v1_l2,v2_l2\n";
  char buf[512];
  for (const ErrorRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.6e,%.6e,%.6e,%.4f,%.4f,%.6e,%.6e,%.6e\n", r.n, r.h, r.err.sum_l2(),
                  r.err.sum_linf(), r.q_l2, r.q_inf, r.err.l2[0], r.err.l2[1], r.err.l2[2]);
    os << buf;
  }
  return os.str();
}

Characteristics characteristic_variables(double p, double v1, double v2, double J, double g11, double g12,
                                         double g22) {
  Characteristics c;
  c.eta = std::sqrt(g11 * g22 - g12 * g12);
  const double s = 1.0 / std::sqrt(2.0 * J * g11);
  c.w_plus = s * (J * std::sqrt(g11) * p + c.eta * v2);
  c.w_minus = s * (-J * std::sqrt(g11) * p + c.eta * v2);
  c.w_zero = s * (g11 * v1 + g12 * v2);
  return c;
}

std::array<double, 9> symmetrizer_factor(double J, double g11, double g12, double g22) {
  const double eta = std::sqrt(g11 * g22 - g12 * g12);
  const double s = 1.0 / std::sqrt(J * g11);
  return {s * J * std::sqrt(g11), 0.0, 0.0, 0.0, s * g11, 0.0, 0.0, s * g12, s * eta};
}

std::array<double, 9> symmetrizer(double J, double g11, double g12, double g22) {
  return {J, 0.0, 0.0, 0.0, g11 / J, g12 / J, 0.0, g12 / J, g22 / J};
}

CharacteristicSlice characteristic_errors(const Discretization& d, const State& s, const State& exact, double r1,
                                          int points) {
  const StaggeredGrid2D& g = d.grid();
  const Shape se1 = g.shape(Location::Edge1);
  const Vec& nodes1 = g.coords(Location::Edge1, 1);
  std::size_t i = 0;
  while (i + 1 < nodes1.size() && std::abs(nodes1[i] - r1) > std::abs(nodes1[i + 1] - r1) - 1e-14) ++i;
  if (std::abs(nodes1[i] - r1) > 1e-12) throw ConfigError("characteristic slice: r1 must coincide with a node");
  if (points < 1 || static_cast<std::size_t>(points) > se1.n2) throw ConfigError("characteristic slice: bad length");

  // co-locate on edge1: p via P₁c, v² via P₁₂
  auto to_edge1 = [&](const Vec& p, const Vec& v2, Vec& pe, Vec& ve) {
    pe.assign(se1.size(), 0.0);
    ve.assign(se1.size(), 0.0);
    d.ops().P1c.apply(p, pe);
    d.ops().P12.apply(v2, ve);
  };
  Vec pn, vn, pe, ve;
  to_edge1(s.p, s.v2, pn, vn);
  to_edge1(exact.p, exact.v2, pe, ve);

  CharacteristicSlice sl;
  const LocationMetrics& m = d.metric().edge1;
  const Vec& r2 = g.coords(Location::Edge1, 2);
  const double h = g.h(2);
  double c2 = 0.0, nc_v2 = 0.0, nc_p = 0.0, cinf = 0.0, ncinf_v2 = 0.0, ncinf_p = 0.0;
  for (int j = 0; j < points; ++j) {
    const std::size_t k = i * se1.n2 + static_cast<std::size_t>(j);
    sl.r2.push_back(r2[j]);
    const Characteristics w = characteristic_variables(pn[k], s.v1[k], vn[k], m.J[k], m.g11[k], m.g12[k], m.g22[k]);
    sl.w_plus.push_back(w.w_plus);
    sl.w_minus.push_back(w.w_minus);
    sl.w_zero.push_back(w.w_zero);
    const double ev1 = std::abs(s.v1[k] - exact.v1[k]);
    const double ev2 = std::abs(vn[k] - ve[k]);
    const double ep = std::abs(pn[k] - pe[k]);
    sl.err_v1.push_back(ev1);
    sl.err_v2.push_back(ev2);
    sl.err_p.push_back(ep);
    c2 += ev1 * ev1;
    nc_v2 += ev2 * ev2;
    nc_p += ep * ep;
    cinf = std::max(cinf, ev1);
    ncinf_v2 = std::max(ncinf_v2, ev2);
    ncinf_p = std::max(ncinf_p, ep);
  }
  const double w = h * h;
  sl.err_c_l2 = std::sqrt(w * c2);
  sl.err_c_inf = cinf;
  sl.err_nc_l2 = std::sqrt(w * nc_v2) + std::sqrt(w * nc_p);
  sl.err_nc_inf = ncinf_v2 + ncinf_p;
  return sl;
}

MmsResult run_mms(const SolverConfig& cfg, bool with_slice) {
  const Discretization d(cfg);
  const State init = mms_state(d, 0.0);
  const BoundaryData bd = mms_boundary_data(d);
  const RunResult r = run(d, init, bd);
  const State exact = mms_state(d, r.final_state.t);
  MmsResult m;
  m.n1 = cfg.n1;
  m.n2 = cfg.n2;
  m.dt = r.dt;
  m.steps = r.steps;
  m.err = error_norms(d, r.final_state, exact);
  if (with_slice) m.slice = characteristic_errors(d, r.final_state, exact);
  return m;
}

ConvergenceStudy run_convergence(const SolverConfig& base, const std::vector<int>& levels, int n2_ratio,
                                 double dt_coarse, bool with_slice, int jobs) {
  if (levels.empty()) throw ConfigError("run_convergence: no levels");
  if (n2_ratio < 1) throw ConfigError("run_convergence: n2_ratio must be positive");
  for (std::size_t k = 1; k < levels.size(); ++k)
    if (levels[k] != 2 * levels[k - 1]) throw ConfigError("run_convergence: levels must be nested by factors of 2");
  ConvergenceStudy study;
  study.runs.resize(levels.size());
  std::vector<std::exception_ptr> errors(levels.size());
  auto one = [&](std::size_t k) {
    try {
      SolverConfig c = base;
      c.n1 = levels[k];
      c.n2 = n2_ratio * levels[k];
      if (dt_coarse > 0.0) c.dt = dt_coarse * levels[0] / levels[k];
      try {
        study.runs[k] = run_mms(c, with_slice);
      } catch (const InstabilityError& e) {
        throw InstabilityError("level N=" + std::to_string(levels[k]) + ": " + e.what(), e.step());
      }
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, levels.size());
  if (workers == 1) {
    for (std::size_t k = 0; k < levels.size(); ++k) one(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < levels.size(); k = next++) one(k);
      });
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<std::pair<int, FieldNorms>> rows;
  for (std::size_t k = 0; k < levels.size(); ++k) rows.emplace_back(levels[k], study.runs[k].err);
  study.table = convergence_table(rows);
  return study;
}

SolverConfig point_source_config(int level) {
  if (level < 0) throw ConfigError("point_source_config: level must be non-negative");
  SolverConfig c;
  c.mapping = MappingSpec::gaussian_top();
  c.n1 = 128 << level;
  c.n2 = 64 << level;
  c.dt = 0.03125 / static_cast<double>(1 << level);
  c.T = 7.8125;
  c.source = SourceSpec{};
  c.receivers = {{0.5, 0.5}};
  return c;
}

RunResult run_point_source(const SolverConfig& cfg) {
  if (!cfg.source) throw ConfigError("run_point_source: configuration has no source");
  const Discretization d(cfg);
  return run(d, d.zero_state(), point_source_data(d, *cfg.source));
}

TraceError receiver_error(const RunResult& coarse, const RunResult& reference, std::size_t receiver) {
  if (receiver >= coarse.receivers.size() || receiver >= reference.receivers.size())
    throw ConfigError("receiver_error: no such receiver");
  const std::size_t nc = coarse.times.size(), nr = reference.times.size();
  if (nc < 2 || nr < nc || (nr - 1) % (nc - 1) != 0) throw ConfigError("receiver_error: time samples do not nest");
  const std::size_t stride = (nr - 1) / (nc - 1);
  for (std::size_t k = 0; k < nc; ++k)
    if (std::abs(coarse.times[k] - reference.times[k * stride]) > 1e-9 * (1.0 + std::abs(coarse.times[k])))
      throw ConfigError("receiver_error: time samples do not nest");
  auto rel = [&](const Vec& c, const Vec& r) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < nc; ++k) {
      const double e = c[k] - r[k * stride];
      num += e * e;
      den += r[k * stride] * r[k * stride];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  };
  const ReceiverSeries &c = coarse.receivers[receiver], &r = reference.receivers[receiver];
  return {rel(c.p, r.p), rel(c.v1, r.v1), rel(c.v2, r.v2)};
}

double pre_arrival_oscillation(const Vec& times, const Vec& trace, double t_end) {
  double peak = 0.0, osc = 0.0;
  for (double v : trace) peak = std::max(peak, std::abs(v));
  for (std::size_t k = 1; k + 1 < trace.size() && times[k] < t_end; ++k)
    osc = std::max(osc, 0.25 * std::abs(trace[k + 1] - 2.0 * trace[k] + trace[k - 1]));
  return peak > 0.0 ? osc / peak : 0.0;
}

double pre_arrival_end(const SolverConfig& cfg, std::size_t receiver) {
  if (!cfg.source || receiver >= cfg.receivers.size()) throw ConfigError("pre_arrival_end: needs a source and a receiver");
  const MappingSpec m = resolve(cfg.mapping, cfg.n1, cfg.n2);
  const MapPoint s = evaluate_mapping(m, cfg.source->r_star, 1.0);
  const MapPoint r = evaluate_mapping(m, cfg.receivers[receiver][0], cfg.receivers[receiver][1]);
  return cfg.source->t0 + std::hypot(s.x - r.x, s.y - r.y) - 1.0;
}

}  // namespace sbp
