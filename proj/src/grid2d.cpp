#include "sbp/grid2d.hpp"

#include "sbp/errors.hpp"

namespace sbp {

std::string to_string(Location loc) {
  switch (loc) {
    case Location::Cell: return "cell";
    case Location::Edge1: return "edge1";
    case Location::Edge2: return "edge2";
    case Location::Node: return "node";
  }
  return "?";
}

std::string to_string(Side side) {
  switch (side) {
    case Side::Left: return "L";
    case Side::Right: return "R";
    case Side::Bottom: return "B";
    case Side::Top: return "T";
  }
  return "?";
}

Location parse_location(const std::string& name) {
  if (name == "cell") return Location::Cell;
  if (name == "edge1") return Location::Edge1;
  if (name == "edge2") return Location::Edge2;
  if (name == "node") return Location::Node;
  throw ConfigError("unknown grid location '" + name + "'");
}

StaggeredGrid2D::StaggeredGrid2D(const CoefficientTable& table, int n1, int n2, bool periodic1, bool periodic2)
    : ops1_(std::make_shared<const OperatorSet1D>(instantiate(table, n1, periodic1))),
      ops2_(n1 == n2 && periodic1 == periodic2 ? ops1_
                                                : std::make_shared<const OperatorSet1D>(instantiate(table, n2, periodic2))) {}

namespace {
bool nodal(Location loc, int dir) {
  if (loc == Location::Node) return true;
  if (loc == Location::Cell) return false;
  return (loc == Location::Edge1) == (dir == 1);
}
}  // namespace

Shape StaggeredGrid2D::shape(Location loc) const {
  return {coords(loc, 1).size(), coords(loc, 2).size()};
}

const Vec& StaggeredGrid2D::coords(Location loc, int dir) const {
  const auto& o = ops(dir);
  return nodal(loc, dir) ? o.grid.nodes : o.grid.cells;
}

NormWeights2D::NormWeights2D(const StaggeredGrid2D& g) {
  auto outer = [](const Vec& a, const Vec& b) {
    Vec w(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) w[i * b.size() + j] = a[i] * b[j];
    return w;
  };
  const auto& o1 = g.ops(1);
  const auto& o2 = g.ops(2);
  H1 = outer(o1.M, o2.Mhat);
  H2 = outer(o1.Mhat, o2.M);
  Hhat = outer(o1.Mhat, o2.Mhat);
  Hnode = outer(o1.M, o2.M);
}

const Vec& NormWeights2D::at(Location loc) const {
  switch (loc) {
    case Location::Cell: return Hhat;
    case Location::Edge1: return H1;
    case Location::Edge2: return H2;
    case Location::Node: return Hnode;
  }
  return Hhat;
}

namespace {
void check_side(const StaggeredGrid2D& g, Side side) {
  const int dir = (side == Side::Left || side == Side::Right) ? 1 : 2;
  if (g.periodic(dir)) throw ConfigError("boundary side " + to_string(side) + " lies along a periodic direction");
}
}  // namespace

Vec boundary_restrict(const StaggeredGrid2D& g, const GridFunction& f, Side side) {
  check_side(g, side);
  if (f.shape != g.shape(f.location)) throw ConfigError("boundary_restrict: grid function shape does not match its location");
  const auto [n1, n2] = f.shape;
  Vec w;
  switch (side) {
    case Side::Left:
    case Side::Right: {
      const std::size_t i = side == Side::Left ? 0 : n1 - 1;
      w.assign(f.values.begin() + static_cast<long>(i * n2), f.values.begin() + static_cast<long>((i + 1) * n2));
      break;
    }
    case Side::Bottom:
    case Side::Top: {
      const std::size_t j = side == Side::Bottom ? 0 : n2 - 1;
      w.resize(n1);
      for (std::size_t i = 0; i < n1; ++i) w[i] = f(i, j);
      break;
    }
  }
  return w;
}

GridFunction boundary_lift(const StaggeredGrid2D& g, Location loc, Side side, std::span<const double> w) {
  check_side(g, side);
  GridFunction f(g, loc);
  const auto [n1, n2] = f.shape;
  const bool lr = side == Side::Left || side == Side::Right;
  if (w.size() != (lr ? n2 : n1)) throw ConfigError("boundary_lift: boundary vector has the wrong length");
  if (lr) {
    const std::size_t i = side == Side::Left ? 0 : n1 - 1;
    for (std::size_t j = 0; j < n2; ++j) f(i, j) = w[j];
  } else {
    const std::size_t j = side == Side::Bottom ? 0 : n2 - 1;
    for (std::size_t i = 0; i < n1; ++i) f(i, j) = w[i];
  }
  return f;
}

const Vec& boundary_norm(const StaggeredGrid2D& g, Location loc, Side side) {
  const int along = (side == Side::Left || side == Side::Right) ? 2 : 1;
  const auto& o = g.ops(along);
  const bool nod = loc == Location::Node || (loc == Location::Edge1 && along == 1) || (loc == Location::Edge2 && along == 2);
  return nod ? o.M : o.Mhat;
}

}  // namespace sbp
