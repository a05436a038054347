#ifndef SBP_GRID2D_HPP
#define SBP_GRID2D_HPP

#include <memory>
#include <string>

#include "sbp/linalg.hpp"
#include "sbp/operators1d.hpp"

namespace sbp {

/// Staggered locations. The first letter names the 1-D grid used along r¹,
/// the second along r²: Cell = (x̂, x̂), Edge1 = (x, x̂), Edge2 = (x̂, x), Node = (x, x).
enum class Location { Cell, Edge1, Edge2, Node };

enum class Side { Left, Right, Bottom, Top };

std::string to_string(Location loc);
std::string to_string(Side side);
Location parse_location(const std::string& name);

struct Shape {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::size_t size() const { return n1 * n2; }
  bool operator==(const Shape&) const = default;
};

/// Tensor-product staggered grid with independent resolution and periodicity
/// per direction. Holds the 1-D operator sets used along each direction.
class StaggeredGrid2D {
 public:
  StaggeredGrid2D(const CoefficientTable& table, int n1, int n2, bool periodic1 = false, bool periodic2 = false);
  StaggeredGrid2D(const CoefficientTable& table, int n, bool periodic = false)
      : StaggeredGrid2D(table, n, n, periodic, periodic) {}

  const OperatorSet1D& ops(int dir) const { return dir == 1 ? *ops1_ : *ops2_; }
  std::shared_ptr<const OperatorSet1D> ops_ptr(int dir) const { return dir == 1 ? ops1_ : ops2_; }
  int cells(int dir) const { return ops(dir).N; }
  double h(int dir) const { return ops(dir).h; }
  bool periodic(int dir) const { return ops(dir).periodic; }

  Shape shape(Location loc) const;
  std::size_t size(Location loc) const { return shape(loc).size(); }

  /// 1-D coordinates of a location along a direction.
  const Vec& coords(Location loc, int dir) const;

 private:
  std::shared_ptr<const OperatorSet1D> ops1_;
  std::shared_ptr<const OperatorSet1D> ops2_;
};

/// Samples at one staggered location, stored with the r² index fastest.
struct GridFunction {
  Location location = Location::Cell;
  Shape shape;
  Vec values;

  GridFunction() = default;
  GridFunction(Location loc, Shape s, double fill = 0.0) : location(loc), shape(s), values(s.size(), fill) {}
  GridFunction(const StaggeredGrid2D& g, Location loc, double fill = 0.0) : GridFunction(loc, g.shape(loc), fill) {}

  double& operator()(std::size_t i, std::size_t j) { return values[i * shape.n2 + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * shape.n2 + j]; }
  std::size_t size() const { return values.size(); }
};

/// Fill a grid function from f(r¹, r²).
template <class F>
GridFunction sample(const StaggeredGrid2D& g, Location loc, F&& f) {
  GridFunction gf(g, loc);
  const Vec& r1 = g.coords(loc, 1);
  const Vec& r2 = g.coords(loc, 2);
  for (std::size_t i = 0; i < r1.size(); ++i)
    for (std::size_t j = 0; j < r2.size(); ++j) gf(i, j) = f(r1[i], r2[j]);
  return gf;
}

/// Diagonal norm weights H₁ = M⊗M̂ (edge1), H₂ = M̂⊗M (edge2), Ĥ = M̂⊗M̂ (cell).
struct NormWeights2D {
  Vec H1;
  Vec H2;
  Vec Hhat;
  Vec Hnode;

  explicit NormWeights2D(const StaggeredGrid2D& g);
  const Vec& at(Location loc) const;
};

/// Gather a boundary grid line. Left/Right fix the r¹ index, Bottom/Top the r² index.
/// Throws ConfigError when the side lies along a periodic direction.
Vec boundary_restrict(const StaggeredGrid2D& g, const GridFunction& f, Side side);
/// Scatter a boundary line into an otherwise zero grid function.
GridFunction boundary_lift(const StaggeredGrid2D& g, Location loc, Side side, std::span<const double> w);

/// 1-D norm along a boundary line of the given location.
const Vec& boundary_norm(const StaggeredGrid2D& g, Location loc, Side side);

}  // namespace sbp

#endif  // SBP_GRID2D_HPP
