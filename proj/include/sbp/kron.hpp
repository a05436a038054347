#ifndef SBP_KRON_HPP
#define SBP_KRON_HPP

#include <memory>
#include <string>

#include "sbp/grid2d.hpp"

namespace sbp {

enum class OpKind { D1, D2, Dhat1, Dhat2, P1c, Pc1, P2c, Pc2, P12, P21 };

std::string to_string(OpKind kind);

/// A ⊗ B acting on r²-fastest storage. A null factor is the identity.
class Operator2D {
 public:
  Operator2D() = default;
  Operator2D(std::shared_ptr<const SparseMatrix> left, std::shared_ptr<const SparseMatrix> right, Location in,
             Location out, Shape in_shape, Shape out_shape, std::string name);

  static Operator2D make(const StaggeredGrid2D& g, OpKind kind);

  /// Operator with factors Aᵀ ⊗ Bᵀ and swapped locations.
  Operator2D transposed() const;

  Location input() const { return in_; }
  Location output() const { return out_; }
  Shape input_shape() const { return in_shape_; }
  Shape output_shape() const { return out_shape_; }
  const SparseMatrix* left() const { return left_.get(); }
  const SparseMatrix* right() const { return right_.get(); }
  const std::string& name() const { return name_; }

  /// y = (A ⊗ B) x by sweeps along grid lines, or by the stored Kronecker
  /// matrix after materialize(). x and y must not alias.
  void apply(std::span<const double> x, std::span<double> y) const;

  /// Copy that applies through its explicit CSR Kronecker matrix.
  Operator2D materialized() const;
  bool is_materialized() const { return static_cast<bool>(assembled_); }
  std::size_t stored_nnz() const { return assembled_ ? assembled_->nnz() : 0; }

 private:
  std::shared_ptr<const SparseMatrix> left_;
  std::shared_ptr<const SparseMatrix> right_;
  std::shared_ptr<const SparseMatrix> assembled_;
  Location in_ = Location::Cell;
  Location out_ = Location::Cell;
  Shape in_shape_;
  Shape out_shape_;
  std::string name_;
};

/// Matrix-free application; throws ConfigError on a location mismatch.
GridFunction kron_apply(const Operator2D& op, const GridFunction& f);

/// Explicit Kronecker matrix, for oracles and the assembled benchmark path.
SparseMatrix assemble_sparse(const Operator2D& op);

/// Apply a 1-D operator along one direction of a grid function with the given shape.
void apply_along(const SparseMatrix& A, int dir, Shape in, std::span<const double> x, std::span<double> y);

/// All ten operators of a grid, built once.
struct Operators2D {
  Operator2D D1, D2, Dhat1, Dhat2, P1c, Pc1, P2c, Pc2, P12, P21;
  /// `assembled` stores every operator as an explicit sparse matrix.
  explicit Operators2D(const StaggeredGrid2D& g, bool assembled = false);
  const Operator2D& get(OpKind kind) const;
};

}  // namespace sbp

#endif  // SBP_KRON_HPP
