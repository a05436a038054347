#include "sbp/metric_ops.hpp"

#include <cmath>
#include <sstream>

#include "sbp/errors.hpp"

namespace sbp {

std::string to_string(MetricVariant v) { return v == MetricVariant::Unconditional ? "unconditional" : "modified"; }

MetricVariant parse_metric_variant(const std::string& name) {
  if (name == "unconditional" || name == "G") return MetricVariant::Unconditional;
  if (name == "modified" || name == "Gtilde") return MetricVariant::Modified;
  throw ConfigError("unknown metric variant '" + name + "' (expected unconditional or modified)");
}

MetricTensorOp::MetricTensorOp(std::shared_ptr<const StaggeredGrid2D> grid, std::shared_ptr<const Operators2D> ops,
                               std::shared_ptr<const MetricFields> metric, MetricVariant variant)
    : grid_(std::move(grid)), ops_(std::move(ops)), metric_(std::move(metric)), variant_(variant), norms_(*grid_) {
  n1_ = grid_->size(Location::Edge1);
  n2_ = grid_->size(Location::Edge2);
  nc_ = grid_->size(Location::Cell);
  const LocationMetrics& c = metric_->cell;
  Jg11c_.resize(nc_), Jg12c_.resize(nc_), Jg22c_.resize(nc_);
  for (std::size_t k = 0; k < nc_; ++k) {
    Jg11c_[k] = c.J[k] * c.gu11[k];
    Jg12c_[k] = c.J[k] * c.gu12[k];
    Jg22c_[k] = c.J[k] * c.gu22[k];
  }
  invJ1_.resize(n1_), HJ1_.resize(n1_);
  for (std::size_t k = 0; k < n1_; ++k) {
    invJ1_[k] = 1.0 / metric_->edge1.J[k];
    HJ1_[k] = norms_.H1[k] * metric_->edge1.J[k];
  }
  invJ2_.resize(n2_), HJ2_.resize(n2_);
  for (std::size_t k = 0; k < n2_; ++k) {
    invJ2_[k] = 1.0 / metric_->edge2.J[k];
    HJ2_[k] = norms_.H2[k] * metric_->edge2.J[k];
  }
}

void MetricTensorOp::apply(std::span<const double> w, std::span<double> y) const {
  thread_local Vec c1, c2, s1, s2;
  c1.resize(nc_), c2.resize(nc_), s1.resize(nc_), s2.resize(nc_);
  const auto w1 = w.subspan(0, n1_), w2 = w.subspan(n1_, n2_);
  auto y1 = y.subspan(0, n1_), y2 = y.subspan(n1_, n2_);
  ops_->Pc1.apply(w1, c1);
  ops_->Pc2.apply(w2, c2);
  if (variant_ == MetricVariant::Unconditional) {
    for (std::size_t k = 0; k < nc_; ++k) {
      s1[k] = Jg11c_[k] * c1[k] + Jg12c_[k] * c2[k];
      s2[k] = Jg12c_[k] * c1[k] + Jg22c_[k] * c2[k];
    }
  } else {
    for (std::size_t k = 0; k < nc_; ++k) {
      s1[k] = Jg12c_[k] * c2[k];
      s2[k] = Jg12c_[k] * c1[k];
    }
  }
  ops_->P1c.apply(s1, y1);
  ops_->P2c.apply(s2, y2);
  for (std::size_t k = 0; k < n1_; ++k) y1[k] *= invJ1_[k];
  for (std::size_t k = 0; k < n2_; ++k) y2[k] *= invJ2_[k];
  if (variant_ == MetricVariant::Modified) {
    const Vec& g1 = metric_->edge1.gu11;
    const Vec& g2 = metric_->edge2.gu22;
    for (std::size_t k = 0; k < n1_; ++k) y1[k] += g1[k] * w1[k];
    for (std::size_t k = 0; k < n2_; ++k) y2[k] += g2[k] * w2[k];
  }
}

void MetricTensorOp::apply_HJ(std::span<const double> w, std::span<double> y) const {
  for (std::size_t k = 0; k < n1_; ++k) y[k] = HJ1_[k] * w[k];
  for (std::size_t k = 0; k < n2_; ++k) y[n1_ + k] = HJ2_[k] * w[n1_ + k];
}

void MetricTensorOp::apply_HJG(std::span<const double> w, std::span<double> y) const {
  apply(w, y);
  for (std::size_t k = 0; k < n1_; ++k) y[k] *= HJ1_[k];
  for (std::size_t k = 0; k < n2_; ++k) y[n1_ + k] *= HJ2_[k];
}

Vec MetricTensorOp::diagonal_HJG() const {
  const SparseMatrix A = assemble_HJG();
  Vec d(A.rows(), 0.0);
  for (std::size_t r = 0; r < A.rows(); ++r) d[r] = A.at(r, r);
  return d;
}

CgResult MetricTensorOp::solve_HJG(std::span<const double> rhs, std::span<double> z, const CgOptions& opt) const {
  const std::size_t n = size();
  const int max_iter = opt.max_iter > 0 ? opt.max_iter : static_cast<int>(10 * n);
  Vec dinv;
  if (opt.jacobi) {
    dinv = diagonal_HJG();
    for (double& v : dinv) v = v > 0.0 ? 1.0 / v : 1.0;
  }
  Vec r(n), p(n), q(n), s(n);
  apply_HJG(z, q);
  for (std::size_t k = 0; k < n; ++k) r[k] = rhs[k] - q[k];
  const double bnorm = norm2(rhs);
  CgResult res;
  if (bnorm == 0.0) {
    std::fill(z.begin(), z.end(), 0.0);
    res.converged = true;
    return res;
  }
  auto precond = [&](const Vec& in, Vec& out) {
    if (opt.jacobi)
      for (std::size_t k = 0; k < n; ++k) out[k] = dinv[k] * in[k];
    else
      out = in;
  };
  precond(r, s);
  p = s;
  double rs = dot(r, s);
  res.relative_residual = norm2(r) / bnorm;
  while (res.relative_residual > opt.tol && res.iterations < max_iter) {
    apply_HJG(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) {
      res.indefinite = true;
      return res;
    }
    const double alpha = rs / pq;
    for (std::size_t k = 0; k < n; ++k) {
      z[k] += alpha * p[k];
      r[k] -= alpha * q[k];
    }
    ++res.iterations;
    res.relative_residual = norm2(r) / bnorm;
    precond(r, s);
    const double rs_new = dot(r, s);
    const double beta = rs_new / rs;
    rs = rs_new;
    for (std::size_t k = 0; k < n; ++k) p[k] = s[k] + beta * p[k];
  }
  res.converged = res.relative_residual <= opt.tol;
  return res;
}

Vec MetricTensorOp::solve_HJG_checked(std::span<const double> rhs, const CgOptions& opt) const {
  Vec z(size(), 0.0);
  const CgResult r = solve_HJG(rhs, z, opt);
  if (!r.converged) {
    std::ostringstream os;
    os << "CG on HJG did not converge (" << r.iterations << " iterations, relative residual " << r.relative_residual
       << ")";
    if (r.indefinite) os << ": non-positive curvature, HJG is likely indefinite";
    else os << ": HJG may be indefinite";
    throw ConvergenceError(os.str());
  }
  return z;
}

SparseMatrix block_matrix(const SparseMatrix* a, const SparseMatrix* b, const SparseMatrix* c, const SparseMatrix* d,
                          std::size_t r1, std::size_t r2, std::size_t c1, std::size_t c2) {
  std::vector<Triplet> t;
  auto add = [&](const SparseMatrix* m, std::size_t ro, std::size_t co) {
    if (!m) return;
    for (const Triplet& e : m->triplets()) t.push_back({e.row + ro, e.col + co, e.value});
  };
  add(a, 0, 0);
  add(b, 0, c1);
  add(c, r1, 0);
  add(d, r1, c1);
  return SparseMatrix(r1 + r2, c1 + c2, std::move(t));
}

SparseMatrix MetricTensorOp::assemble_G() const {
  const SparseMatrix P1c = assemble_sparse(ops_->P1c), Pc1 = assemble_sparse(ops_->Pc1);
  const SparseMatrix P2c = assemble_sparse(ops_->P2c), Pc2 = assemble_sparse(ops_->Pc2);
  auto blk = [&](const SparseMatrix& Pout, const Vec& invJ, const Vec& Jg, const SparseMatrix& Pin) {
    return (Pout.scale_rows_cols(invJ, Jg)) * Pin;
  };
  const SparseMatrix G12 = blk(P1c, invJ1_, Jg12c_, Pc2);
  const SparseMatrix G21 = blk(P2c, invJ2_, Jg12c_, Pc1);
  SparseMatrix G11, G22;
  if (variant_ == MetricVariant::Unconditional) {
    G11 = blk(P1c, invJ1_, Jg11c_, Pc1);
    G22 = blk(P2c, invJ2_, Jg22c_, Pc2);
  } else {
    G11 = SparseMatrix::diagonal(metric_->edge1.gu11);
    G22 = SparseMatrix::diagonal(metric_->edge2.gu22);
  }
  return block_matrix(&G11, &G12, &G21, &G22, n1_, n2_, n1_, n2_);
}

SparseMatrix MetricTensorOp::assemble_HJG() const {
  // Symmetric form Pc_kᵀ ĤĴĝᵏˡ Pc_l, equal to H J G through M P = P̂ᵀ M̂.
  const SparseMatrix Pc1 = assemble_sparse(ops_->Pc1), Pc2 = assemble_sparse(ops_->Pc2);
  const SparseMatrix Pc1t = Pc1.transpose(), Pc2t = Pc2.transpose();
  auto weighted = [&](const Vec& Jg) {
    Vec w(nc_);
    for (std::size_t k = 0; k < nc_; ++k) w[k] = norms_.Hhat[k] * Jg[k];
    return w;
  };
  const Vec w11 = weighted(Jg11c_), w12 = weighted(Jg12c_), w22 = weighted(Jg22c_);
  const SparseMatrix A12 = Pc1t.scale_rows_cols({}, w12) * Pc2;
  const SparseMatrix A21 = A12.transpose();
  SparseMatrix A11, A22;
  if (variant_ == MetricVariant::Unconditional) {
    A11 = Pc1t.scale_rows_cols({}, w11) * Pc1;
    A22 = Pc2t.scale_rows_cols({}, w22) * Pc2;
  } else {
    Vec d1(n1_), d2(n2_);
    for (std::size_t k = 0; k < n1_; ++k) d1[k] = HJ1_[k] * metric_->edge1.gu11[k];
    for (std::size_t k = 0; k < n2_; ++k) d2[k] = HJ2_[k] * metric_->edge2.gu22[k];
    A11 = SparseMatrix::diagonal(d1);
    A22 = SparseMatrix::diagonal(d2);
  }
  return block_matrix(&A11, &A12, &A21, &A22, n1_, n2_, n1_, n2_);
}

}  // namespace sbp
