#ifndef SBP_LINALG_HPP
#define SBP_LINALG_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace sbp {

using Vec = std::vector<double>;

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Row-major dense matrix. Only used for oracles, small eigenproblems and
/// operator assembly at test sizes.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  DenseMatrix transpose() const;
  DenseMatrix operator*(const DenseMatrix& other) const;
  Vec operator*(std::span<const double> x) const;

  static DenseMatrix identity(std::size_t n);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Compressed sparse row matrix. Entries within a row are sorted by column and
/// duplicates are summed at construction, so assembly order is row-major.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);

  static SparseMatrix identity(std::size_t n);
  static SparseMatrix diagonal(std::span<const double> d);
  static SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b);
  static SparseMatrix from_dense(const DenseMatrix& a, double drop = 0.0);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::size_t> row_cols(std::size_t r) const {
    return {cols_idx_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  std::span<const double> row_values(std::size_t r) const {
    return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& col_idx() const { return cols_idx_; }
  const std::vector<double>& values() const { return values_; }

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  Vec operator*(std::span<const double> x) const;
  SparseMatrix operator*(const SparseMatrix& other) const;
  SparseMatrix operator+(const SparseMatrix& other) const;
  SparseMatrix scaled(double s) const;

  SparseMatrix transpose() const;
  /// diag(left) * A * diag(right); empty spans mean identity.
  SparseMatrix scale_rows_cols(std::span<const double> left, std::span<const double> right) const;

  double at(std::size_t r, std::size_t c) const;
  DenseMatrix to_dense() const;
  std::vector<Triplet> triplets() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> cols_idx_;
  std::vector<double> values_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double max_abs(std::span<const double> a);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

/// max_ij |A_ij - B_ij| for matrices of equal shape.
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace sbp

#endif  // SBP_LINALG_HPP
