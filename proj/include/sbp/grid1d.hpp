#ifndef SBP_GRID1D_HPP
#define SBP_GRID1D_HPP

#include "sbp/linalg.hpp"

namespace sbp {

/// Nodes x_i and cell centres x̂_i of a uniform staggered grid on [0, 1].
///
/// Bounded: N+1 nodes at i*h, N+2 cells with the two boundary points 0 and 1
/// appended to the N cell midpoints. Periodic: N nodes at i*h and N cells at
/// (i + 1/2)*h.
struct StaggeredGrid1D {
  int N = 0;
  double h = 0.0;
  Vec nodes;
  Vec cells;
  bool periodic = false;

  std::size_t n_nodes() const { return nodes.size(); }
  std::size_t n_cells() const { return cells.size(); }
};

inline constexpr int kMinCells = 8;

/// Throws ConfigError when N < min_cells.
StaggeredGrid1D build_grids(int N, bool periodic, int min_cells = kMinCells);

}  // namespace sbp

#endif  // SBP_GRID1D_HPP
