#include "sbp/kron.hpp"

#include <algorithm>

#include "sbp/errors.hpp"

namespace sbp {

std::string to_string(OpKind kind) {
  switch (kind) {
    case OpKind::D1: return "D1";
    case OpKind::D2: return "D2";
    case OpKind::Dhat1: return "Dhat1";
    case OpKind::Dhat2: return "Dhat2";
    case OpKind::P1c: return "P1c";
    case OpKind::Pc1: return "Pc1";
    case OpKind::P2c: return "P2c";
    case OpKind::Pc2: return "Pc2";
    case OpKind::P12: return "P12";
    case OpKind::P21: return "P21";
  }
  return "?";
}

Operator2D::Operator2D(std::shared_ptr<const SparseMatrix> left, std::shared_ptr<const SparseMatrix> right, Location in,
                       Location out, Shape in_shape, Shape out_shape, std::string name)
    : left_(std::move(left)), right_(std::move(right)), in_(in), out_(out), in_shape_(in_shape), out_shape_(out_shape),
      name_(std::move(name)) {}

Operator2D Operator2D::make(const StaggeredGrid2D& g, OpKind kind) {
  auto o1 = g.ops_ptr(1);
  auto o2 = g.ops_ptr(2);
  // Aliasing constructors keep the operator set alive for as long as the factor is used.
  auto D = [](const std::shared_ptr<const OperatorSet1D>& o) { return std::shared_ptr<const SparseMatrix>(o, &o->D); };
  auto Dh = [](const std::shared_ptr<const OperatorSet1D>& o) { return std::shared_ptr<const SparseMatrix>(o, &o->Dhat); };
  auto P = [](const std::shared_ptr<const OperatorSet1D>& o) { return std::shared_ptr<const SparseMatrix>(o, &o->P); };
  auto Ph = [](const std::shared_ptr<const OperatorSet1D>& o) { return std::shared_ptr<const SparseMatrix>(o, &o->Phat); };
  using L = Location;
  auto mk = [&](std::shared_ptr<const SparseMatrix> a, std::shared_ptr<const SparseMatrix> b, L in, L out) {
    return Operator2D(std::move(a), std::move(b), in, out, g.shape(in), g.shape(out), to_string(kind));
  };
  switch (kind) {
    case OpKind::D1: return mk(D(o1), nullptr, L::Cell, L::Edge1);
    case OpKind::D2: return mk(nullptr, D(o2), L::Cell, L::Edge2);
    case OpKind::Dhat1: return mk(Dh(o1), nullptr, L::Edge1, L::Cell);
    case OpKind::Dhat2: return mk(nullptr, Dh(o2), L::Edge2, L::Cell);
    case OpKind::P1c: return mk(P(o1), nullptr, L::Cell, L::Edge1);
    case OpKind::Pc1: return mk(Ph(o1), nullptr, L::Edge1, L::Cell);
    case OpKind::P2c: return mk(nullptr, P(o2), L::Cell, L::Edge2);
    case OpKind::Pc2: return mk(nullptr, Ph(o2), L::Edge2, L::Cell);
    case OpKind::P12: return mk(P(o1), Ph(o2), L::Edge2, L::Edge1);
    case OpKind::P21: return mk(Ph(o1), P(o2), L::Edge1, L::Edge2);
  }
  throw ConfigError("unknown operator kind");
}

Operator2D Operator2D::transposed() const {
  auto t = [](const std::shared_ptr<const SparseMatrix>& m) -> std::shared_ptr<const SparseMatrix> {
    return m ? std::make_shared<const SparseMatrix>(m->transpose()) : nullptr;
  };
  return Operator2D(t(left_), t(right_), out_, in_, out_shape_, in_shape_, name_ + "^T");
}

void apply_along(const SparseMatrix& A, int dir, Shape in, std::span<const double> x, std::span<double> y) {
  const std::size_t n1 = in.n1, n2 = in.n2;
  if (dir == 2) {
    const std::size_t m2 = A.rows();
    const auto& rp = A.row_ptr();
    const auto& ci = A.col_idx();
    const auto& va = A.values();
    for (std::size_t i = 0; i < n1; ++i) {
      const double* xi = x.data() + i * n2;
      double* yi = y.data() + i * m2;
      for (std::size_t j = 0; j < m2; ++j) {
        double s = 0.0;
        for (std::size_t k = rp[j]; k < rp[j + 1]; ++k) s += va[k] * xi[ci[k]];
        yi[j] = s;
      }
    }
    return;
  }
  const std::size_t m1 = A.rows();
  const auto& rp = A.row_ptr();
  const auto& ci = A.col_idx();
  const auto& va = A.values();
  for (std::size_t i = 0; i < m1; ++i) {
    double* yi = y.data() + i * n2;
    std::fill(yi, yi + n2, 0.0);
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
      const double a = va[k];
      const double* xk = x.data() + ci[k] * n2;
      for (std::size_t j = 0; j < n2; ++j) yi[j] += a * xk[j];
    }
  }
}

void Operator2D::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != in_shape_.size() || y.size() != out_shape_.size())
    throw ConfigError("Operator2D " + name_ + ": vector length mismatch");
  if (assembled_) {
    assembled_->multiply(x, y);
  } else if (left_ && right_) {
    const Shape mid{in_shape_.n1, out_shape_.n2};
    thread_local Vec scratch;
    scratch.resize(mid.size());
    apply_along(*right_, 2, in_shape_, x, scratch);
    apply_along(*left_, 1, mid, scratch, y);
  } else if (left_) {
    apply_along(*left_, 1, in_shape_, x, y);
  } else if (right_) {
    apply_along(*right_, 2, in_shape_, x, y);
  } else {
    std::copy(x.begin(), x.end(), y.begin());
  }
}

GridFunction kron_apply(const Operator2D& op, const GridFunction& f) {
  if (f.location != op.input() || f.shape != op.input_shape())
    throw ConfigError("kron_apply: " + op.name() + " expects " + to_string(op.input()) + " input, got " + to_string(f.location));
  GridFunction out(op.output(), op.output_shape());
  op.apply(f.values, out.values);
  return out;
}

SparseMatrix assemble_sparse(const Operator2D& op) {
  const SparseMatrix a = op.left() ? *op.left() : SparseMatrix::identity(op.input_shape().n1);
  const SparseMatrix b = op.right() ? *op.right() : SparseMatrix::identity(op.input_shape().n2);
  return SparseMatrix::kron(a, b);
}

Operator2D Operator2D::materialized() const {
  Operator2D op = *this;
  op.assembled_ = std::make_shared<const SparseMatrix>(assemble_sparse(*this));
  return op;
}

namespace {
Operator2D make_op(const StaggeredGrid2D& g, OpKind kind, bool assembled) {
  Operator2D op = Operator2D::make(g, kind);
  return assembled ? op.materialized() : op;
}
}  // namespace

Operators2D::Operators2D(const StaggeredGrid2D& g, bool assembled)
    : D1(make_op(g, OpKind::D1, assembled)),
      D2(make_op(g, OpKind::D2, assembled)),
      Dhat1(make_op(g, OpKind::Dhat1, assembled)),
      Dhat2(make_op(g, OpKind::Dhat2, assembled)),
      P1c(make_op(g, OpKind::P1c, assembled)),
      Pc1(make_op(g, OpKind::Pc1, assembled)),
      P2c(make_op(g, OpKind::P2c, assembled)),
      Pc2(make_op(g, OpKind::Pc2, assembled)),
      P12(make_op(g, OpKind::P12, assembled)),
      P21(make_op(g, OpKind::P21, assembled)) {}

const Operator2D& Operators2D::get(OpKind kind) const {
  switch (kind) {
    case OpKind::D1: return D1;
    case OpKind::D2: return D2;
    case OpKind::Dhat1: return Dhat1;
    case OpKind::Dhat2: return Dhat2;
    case OpKind::P1c: return P1c;
    case OpKind::Pc1: return Pc1;
    case OpKind::P2c: return P2c;
    case OpKind::Pc2: return Pc2;
    case OpKind::P12: return P12;
    case OpKind::P21: return P21;
  }
  return D1;
}

}  // namespace sbp
