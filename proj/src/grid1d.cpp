#include "sbp/grid1d.hpp"

#include <string>

#include "sbp/errors.hpp"

namespace sbp {

StaggeredGrid1D build_grids(int N, bool periodic, int min_cells) {
  if (N < min_cells)
    throw ConfigError("build_grids: N = " + std::to_string(N) + " is below the required minimum of " +
                      std::to_string(min_cells) + " cells");
  StaggeredGrid1D g;
  g.N = N;
  g.h = 1.0 / N;
  g.periodic = periodic;
  const auto n = static_cast<std::size_t>(N);
  if (periodic) {
    g.nodes.resize(n);
    g.cells.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      g.nodes[i] = static_cast<double>(i) * g.h;
      g.cells[i] = (static_cast<double>(i) + 0.5) * g.h;
    }
    return g;
  }
  g.nodes.resize(n + 1);
  g.cells.resize(n + 2);
  for (std::size_t i = 0; i <= n; ++i) g.nodes[i] = static_cast<double>(i) * g.h;
  g.cells[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) g.cells[i] = (static_cast<double>(i) - 0.5) * g.h;
  g.cells[n + 1] = 1.0;
  return g;
}

}  // namespace sbp
