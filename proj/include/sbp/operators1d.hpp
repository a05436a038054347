#ifndef SBP_OPERATORS1D_HPP
#define SBP_OPERATORS1D_HPP

#include <array>
#include <string>
#include <vector>

#include "sbp/grid1d.hpp"
#include "sbp/linalg.hpp"

namespace sbp {

/// Grid-independent description of a 4/2 staggered operator family.
///
/// Closure rows are stored in grid units (h = 1): the bounded operator row i
/// near the left end equals closure_x[i] / h for D and D̂, closure_x[i] for P
/// and P̂. Column 0 of closure_d and closure_p refers to cell 0, column 0 of
/// closure_dhat and closure_phat to node 0.
struct CoefficientTable {
  std::array<double, 4> interior_d{1.0 / 24, -27.0 / 24, 27.0 / 24, -1.0 / 24};
  std::array<double, 4> interior_p{-1.0 / 16, 9.0 / 16, 9.0 / 16, -1.0 / 16};
  std::vector<std::vector<double>> closure_d;
  std::vector<std::vector<double>> closure_dhat;
  std::vector<std::vector<double>> closure_p;
  std::vector<std::vector<double>> closure_phat;
  std::vector<double> m_weights;
  std::vector<double> mhat_weights;
  int boundary_order = 2;
  std::string provenance;

  int boundary_width() const { return static_cast<int>(m_weights.size()); }
};

/// The six 1-D matrices for one resolution. D: nodes <- cells, D̂: cells <- nodes.
struct OperatorSet1D {
  int N = 0;
  double h = 0.0;
  SparseMatrix D;
  SparseMatrix Dhat;
  SparseMatrix P;
  SparseMatrix Phat;
  Vec M;
  Vec Mhat;
  int interior_order = 4;
  int boundary_order = 2;
  int boundary_width = 4;
  bool periodic = false;
  StaggeredGrid1D grid;

  std::size_t n_nodes() const { return M.size(); }
  std::size_t n_cells() const { return Mhat.size(); }
};

/// Assemble operators for N cells. Periodic sets use only the interior stencils.
OperatorSet1D instantiate(const CoefficientTable& table, int N, bool periodic = false);

/// Boundary matrix E of the difference identity, as a dense (N+1)x(N+2) matrix.
DenseMatrix boundary_matrix(const OperatorSet1D& ops);

/// JSON text with 17 significant digit decimal strings.
std::string table_to_json(const CoefficientTable& table);
/// Throws ConfigError on malformed input.
CoefficientTable table_from_json(const std::string& text);
CoefficientTable load_table(const std::string& path);
void save_table(const CoefficientTable& table, const std::string& path);

/// Table compiled into the library, or the file named by SBP_COEFF_PATH.
const CoefficientTable& default_table();
/// Compiled-in table for a named objective ("accuracy", "min_norm" or "max_norm").
CoefficientTable builtin_table(const std::string& name);

/// Spectral norm of P*P̂ by Lanczos iteration on its normal matrix.
/// Throws ConvergenceError after max_iter iterations.
double interpolation_norm(const OperatorSet1D& ops, double rel_tol = 1e-10, int max_iter = 100000,
                          int* iterations = nullptr);
/// Same quantity from a dense singular value decomposition.
double interpolation_norm_dense(const OperatorSet1D& ops);

}  // namespace sbp

#endif  // SBP_OPERATORS1D_HPP
