#include "sbp/metrics.hpp"

#include <cmath>
#include <sstream>

#include "sbp/errors.hpp"
#include "sbp/kron.hpp"

namespace sbp {

std::string to_string(MetricMethod m) { return m == MetricMethod::Analytic ? "analytic" : "sbp"; }

MetricMethod parse_metric_method(const std::string& name) {
  if (name == "analytic") return MetricMethod::Analytic;
  if (name == "sbp") return MetricMethod::Sbp;
  throw ConfigError("unknown metric method '" + name + "' (expected analytic or sbp)");
}

const LocationMetrics& MetricFields::at(Location loc) const {
  switch (loc) {
    case Location::Cell: return cell;
    case Location::Edge1: return edge1;
    case Location::Edge2: return edge2;
    case Location::Node: break;
  }
  throw ConfigError("metric fields are not stored at nodes");
}

void map_coordinates(const MappingSpec& spec, const StaggeredGrid2D& g, Location loc, Vec& x, Vec& y) {
  const Vec& r1 = g.coords(loc, 1);
  const Vec& r2 = g.coords(loc, 2);
  x.assign(r1.size() * r2.size(), 0.0);
  y.assign(x.size(), 0.0);
  for (std::size_t i = 0; i < r1.size(); ++i)
    for (std::size_t j = 0; j < r2.size(); ++j) {
      const MapPoint p = evaluate_mapping(spec, r1[i], r2[j]);
      x[i * r2.size() + j] = p.x;
      y[i * r2.size() + j] = p.y;
    }
}

namespace {

// Where the 1-D derivative of each basis vector is sampled from:
// a₁ at loc uses D or D̂ along r¹ of X at src1, a₂ uses r² derivatives of X at src2.
struct DerivativeSource {
  Location src1;
  bool node_out1;  // true: output on nodes along r¹ (use D), false: cells (use D̂)
  Location src2;
  bool node_out2;
};

DerivativeSource sources(Location loc) {
  switch (loc) {
    case Location::Cell: return {Location::Edge1, false, Location::Edge2, false};
    case Location::Edge1: return {Location::Cell, true, Location::Node, false};
    case Location::Edge2: return {Location::Node, false, Location::Cell, true};
    case Location::Node: break;
  }
  throw ConfigError("metric fields are not stored at nodes");
}

void finish(const MappingSpec& spec, const StaggeredGrid2D& g, LocationMetrics& m) {
  const std::size_t n = m.a1x.size();
  m.J.resize(n);
  m.g11.resize(n), m.g12.resize(n), m.g22.resize(n);
  m.gu11.resize(n), m.gu12.resize(n), m.gu22.resize(n);
  m.A11.resize(n), m.A12.resize(n), m.A21.resize(n), m.A22.resize(n);
  const Vec& r1 = g.coords(m.location, 1);
  const Vec& r2 = g.coords(m.location, 2);
  for (std::size_t k = 0; k < n; ++k) {
    const double J = m.a1x[k] * m.a2y[k] - m.a1y[k] * m.a2x[k];
    if (!(J > 0.0)) {
      std::ostringstream os;
      os << "singular mapping '" << to_string(spec.kind) << "': J = " << J << " at " << to_string(m.location) << " ("
         << k / m.shape.n2 << ", " << k % m.shape.n2 << "), r = (" << r1[k / m.shape.n2] << ", "
         << r2[k % m.shape.n2] << ")";
      throw SingularMappingError(os.str());
    }
    m.J[k] = J;
    m.g11[k] = m.a1x[k] * m.a1x[k] + m.a1y[k] * m.a1y[k];
    m.g12[k] = m.a1x[k] * m.a2x[k] + m.a1y[k] * m.a2y[k];
    m.g22[k] = m.a2x[k] * m.a2x[k] + m.a2y[k] * m.a2y[k];
    const double det = m.g11[k] * m.g22[k] - m.g12[k] * m.g12[k];
    m.gu11[k] = m.g22[k] / det;
    m.gu12[k] = -m.g12[k] / det;
    m.gu22[k] = m.g11[k] / det;
    if (!(det > 0.0 && m.gu11[k] > 0.0 && m.gu22[k] > 0.0)) {
      std::ostringstream os;
      os << "metric tensor is not positive definite at " << to_string(m.location) << " (" << k / m.shape.n2 << ", "
         << k % m.shape.n2 << ")";
      throw SingularMappingError(os.str());
    }
    // a¹ = (a2y, -a2x)/J, a² = (-a1y, a1x)/J
    m.A11[k] = m.a2y[k] / J;
    m.A21[k] = -m.a2x[k] / J;
    m.A12[k] = -m.a1y[k] / J;
    m.A22[k] = m.a1x[k] / J;
  }
}

LocationMetrics analytic_location(const MappingSpec& spec, const StaggeredGrid2D& g, Location loc) {
  LocationMetrics m;
  m.location = loc;
  m.shape = g.shape(loc);
  map_coordinates(spec, g, loc, m.x, m.y);
  const Vec& r1 = g.coords(loc, 1);
  const Vec& r2 = g.coords(loc, 2);
  const std::size_t n = m.shape.size();
  m.a1x.resize(n), m.a1y.resize(n), m.a2x.resize(n), m.a2y.resize(n);
  for (std::size_t i = 0; i < r1.size(); ++i)
    for (std::size_t j = 0; j < r2.size(); ++j) {
      const MapJacobian d = mapping_derivatives(spec, r1[i], r2[j]);
      const std::size_t k = i * r2.size() + j;
      m.a1x[k] = d.xr1, m.a1y[k] = d.yr1, m.a2x[k] = d.xr2, m.a2y[k] = d.yr2;
    }
  finish(spec, g, m);
  return m;
}

LocationMetrics sbp_location(const MappingSpec& spec, const StaggeredGrid2D& g, Location loc) {
  LocationMetrics m;
  m.location = loc;
  m.shape = g.shape(loc);
  map_coordinates(spec, g, loc, m.x, m.y);
  const DerivativeSource s = sources(loc);
  const std::size_t n = m.shape.size();
  m.a1x.assign(n, 0.0), m.a1y.assign(n, 0.0), m.a2x.assign(n, 0.0), m.a2y.assign(n, 0.0);
  Vec x, y;
  map_coordinates(spec, g, s.src1, x, y);
  const SparseMatrix& A1 = s.node_out1 ? g.ops(1).D : g.ops(1).Dhat;
  apply_along(A1, 1, g.shape(s.src1), x, m.a1x);
  apply_along(A1, 1, g.shape(s.src1), y, m.a1y);
  map_coordinates(spec, g, s.src2, x, y);
  const SparseMatrix& A2 = s.node_out2 ? g.ops(2).D : g.ops(2).Dhat;
  apply_along(A2, 2, g.shape(s.src2), x, m.a2x);
  apply_along(A2, 2, g.shape(s.src2), y, m.a2y);
  finish(spec, g, m);
  return m;
}

}  // namespace

MetricFields build_metric_fields(const MappingSpec& spec_in, const StaggeredGrid2D& g, MetricMethod method) {
  MetricFields f;
  f.mapping = resolve(spec_in, g.cells(1), g.cells(2));
  f.method = method;
  auto build = [&](Location loc) {
    return method == MetricMethod::Analytic ? analytic_location(f.mapping, g, loc) : sbp_location(f.mapping, g, loc);
  };
  f.cell = build(Location::Cell);
  f.edge1 = build(Location::Edge1);
  f.edge2 = build(Location::Edge2);
  return f;
}

}  // namespace sbp
