#include "sbp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sbp {

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

DenseMatrix DenseMatrix::operator*(const DenseMatrix& other) const {
  if (cols_ != other.rows_) throw std::invalid_argument("DenseMatrix: shape mismatch");
  DenseMatrix c(rows_, other.cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < cols_; ++k) {
      const double a = (*this)(i, k);
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < other.cols_; ++j) c(i, j) += a * other(k, j);
    }
  return c;
}

Vec DenseMatrix::operator*(std::span<const double> x) const {
  if (x.size() != cols_) throw std::invalid_argument("DenseMatrix: vector size mismatch");
  Vec y(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets)
    : rows_(rows), cols_(cols) {
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  row_ptr_.assign(rows + 1, 0);
  std::size_t last_row = rows;
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) throw std::out_of_range("SparseMatrix: triplet out of range");
    if (t.row == last_row && cols_idx_.back() == t.col) {
      values_.back() += t.value;
      continue;
    }
    cols_idx_.push_back(t.col);
    values_.push_back(t.value);
    row_ptr_[t.row + 1] = values_.size();
    last_row = t.row;
  }
  for (std::size_t r = 1; r <= rows; ++r) row_ptr_[r] = std::max(row_ptr_[r], row_ptr_[r - 1]);
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return SparseMatrix(n, n, std::move(t));
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> d) {
  std::vector<Triplet> t;
  t.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) t.push_back({i, i, d[i]});
  return SparseMatrix(d.size(), d.size(), std::move(t));
}

SparseMatrix SparseMatrix::kron(const SparseMatrix& a, const SparseMatrix& b) {
  std::vector<Triplet> t;
  t.reserve(a.nnz() * b.nnz());
  for (std::size_t ia = 0; ia < a.rows(); ++ia)
    for (std::size_t ib = 0; ib < b.rows(); ++ib) {
      auto ac = a.row_cols(ia);
      auto av = a.row_values(ia);
      auto bc = b.row_cols(ib);
      auto bv = b.row_values(ib);
      for (std::size_t p = 0; p < ac.size(); ++p)
        for (std::size_t q = 0; q < bc.size(); ++q)
          t.push_back({ia * b.rows() + ib, ac[p] * b.cols() + bc[q], av[p] * bv[q]});
    }
  return SparseMatrix(a.rows() * b.rows(), a.cols() * b.cols(), std::move(t));
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& a, double drop) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (std::abs(a(i, j)) > drop) t.push_back({i, j, a(i, j)});
  return SparseMatrix(a.rows(), a.cols(), std::move(t));
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != cols_ || y.size() != rows_) throw std::invalid_argument("SparseMatrix: size mismatch");
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += values_[k] * x[cols_idx_[k]];
    y[r] = s;
  }
}

Vec SparseMatrix::operator*(std::span<const double> x) const {
  Vec y(rows_);
  multiply(x, y);
  return y;
}

SparseMatrix SparseMatrix::operator*(const SparseMatrix& other) const {
  if (cols_ != other.rows_) throw std::invalid_argument("SparseMatrix: product shape mismatch");
  std::vector<Triplet> t;
  std::vector<double> acc(other.cols_, 0.0);
  std::vector<char> used(other.cols_, 0);
  std::vector<std::size_t> touched;
  for (std::size_t r = 0; r < rows_; ++r) {
    touched.clear();
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const std::size_t mid = cols_idx_[k];
      const double a = values_[k];
      for (std::size_t q = other.row_ptr_[mid]; q < other.row_ptr_[mid + 1]; ++q) {
        const std::size_t c = other.cols_idx_[q];
        if (!used[c]) {
          used[c] = 1;
          touched.push_back(c);
        }
        acc[c] += a * other.values_[q];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (std::size_t c : touched) {
      t.push_back({r, c, acc[c]});
      acc[c] = 0.0;
      used[c] = 0;
    }
  }
  return SparseMatrix(rows_, other.cols_, std::move(t));
}

SparseMatrix SparseMatrix::operator+(const SparseMatrix& other) const {
  if (rows_ != other.rows_ || cols_ != other.cols_) throw std::invalid_argument("SparseMatrix: sum shape mismatch");
  auto t = triplets();
  auto u = other.triplets();
  t.insert(t.end(), u.begin(), u.end());
  return SparseMatrix(rows_, cols_, std::move(t));
}

SparseMatrix SparseMatrix::scaled(double s) const {
  SparseMatrix m = *this;
  for (auto& v : m.values_) v *= s;
  return m;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) t.push_back({cols_idx_[k], r, values_[k]});
  return SparseMatrix(cols_, rows_, std::move(t));
}

SparseMatrix SparseMatrix::scale_rows_cols(std::span<const double> left, std::span<const double> right) const {
  if ((!left.empty() && left.size() != rows_) || (!right.empty() && right.size() != cols_))
    throw std::invalid_argument("SparseMatrix: scaling size mismatch");
  SparseMatrix m = *this;
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      if (!left.empty()) m.values_[k] *= left[r];
      if (!right.empty()) m.values_[k] *= right[cols_idx_[k]];
    }
  return m;
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  auto cols = row_cols(r);
  auto it = std::lower_bound(cols.begin(), cols.end(), c);
  if (it == cols.end() || *it != c) return 0.0;
  return values_[row_ptr_[r] + static_cast<std::size_t>(it - cols.begin())];
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) d(r, cols_idx_[k]) += values_[k];
  return d;
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) t.push_back({r, cols_idx_[k], values_[k]});
  return t;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("max_abs_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("max_abs_diff: shape mismatch");
  return max_abs_diff(std::span<const double>(a.data()), std::span<const double>(b.data()));
}

}  // namespace sbp
