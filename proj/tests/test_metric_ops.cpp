#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sbp/errors.hpp"
#include "sbp/stability.hpp"

using namespace sbp;

namespace {

struct Setup {
  std::shared_ptr<const StaggeredGrid2D> g;
  std::shared_ptr<const Operators2D> ops;
  std::shared_ptr<const MetricFields> m;
};

Setup make(const MappingSpec& spec, int n, const CoefficientTable& t = default_table(),
           MetricMethod method = MetricMethod::Sbp) {
  Setup s;
  s.g = std::make_shared<const StaggeredGrid2D>(t, n);
  s.ops = std::make_shared<const Operators2D>(*s.g);
  s.m = std::make_shared<const MetricFields>(build_metric_fields(spec, *s.g, method));
  return s;
}

// Dense G assembled from the 1-D factors and metric samples.
Eigen::MatrixXd oracle_G(const Setup& s, MetricVariant v) {
  using oracle::kron;
  const OperatorSet1D &o1 = s.g->ops(1), &o2 = s.g->ops(2);
  const Eigen::MatrixXd I1 = Eigen::MatrixXd::Identity(o1.n_cells(), o1.n_cells());
  const Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(o2.n_cells(), o2.n_cells());
  const Eigen::MatrixXd P1c = kron(oracle::to_eigen(o1.P), I2), Pc1 = kron(oracle::to_eigen(o1.Phat), I2);
  const Eigen::MatrixXd P2c = kron(I1, oracle::to_eigen(o2.P)), Pc2 = kron(I1, oracle::to_eigen(o2.Phat));
  const LocationMetrics &c = s.m->cell, &e1 = s.m->edge1, &e2 = s.m->edge2;
  const Eigen::VectorXd Jc = oracle::diag_vec(c.J);
  const Eigen::MatrixXd A11 = Jc.cwiseProduct(oracle::diag_vec(c.gu11)).asDiagonal();
  const Eigen::MatrixXd A12 = Jc.cwiseProduct(oracle::diag_vec(c.gu12)).asDiagonal();
  const Eigen::MatrixXd A22 = Jc.cwiseProduct(oracle::diag_vec(c.gu22)).asDiagonal();
  const Eigen::MatrixXd iJ1 = oracle::diag_vec(e1.J).cwiseInverse().asDiagonal();
  const Eigen::MatrixXd iJ2 = oracle::diag_vec(e2.J).cwiseInverse().asDiagonal();
  const Eigen::Index n1 = P1c.rows(), n2 = P2c.rows();
  Eigen::MatrixXd G(n1 + n2, n1 + n2);
  G.block(0, n1, n1, n2) = iJ1 * P1c * A12 * Pc2;
  G.block(n1, 0, n2, n1) = iJ2 * P2c * A12 * Pc1;
  if (v == MetricVariant::Unconditional) {
    G.block(0, 0, n1, n1) = iJ1 * P1c * A11 * Pc1;
    G.block(n1, n1, n2, n2) = iJ2 * P2c * A22 * Pc2;
  } else {
    G.block(0, 0, n1, n1) = oracle::diag_vec(e1.gu11).asDiagonal();
    G.block(n1, n1, n2, n2) = oracle::diag_vec(e2.gu22).asDiagonal();
  }
  return G;
}

Eigen::VectorXd HJ(const MetricTensorOp& op) {
  Vec one(op.size(), 1.0), d(op.size());
  op.apply_HJ(one, d);
  return oracle::diag_vec(d);
}

}  // namespace

TEST_CASE("matrix-free G matches the dense oracle") {
  std::mt19937_64 rng(3);
  for (const MappingSpec& spec : {MappingSpec::tfi(), MappingSpec::gaussian_hill(0.8)})
    for (MetricVariant v : {MetricVariant::Unconditional, MetricVariant::Modified}) {
      const Setup s = make(spec, 8);
      const MetricTensorOp op(s.g, s.ops, s.m, v);
      const Eigen::MatrixXd G = oracle_G(s, v);
      CHECK((oracle::to_eigen(op.assemble_G()) - G).cwiseAbs().maxCoeff() <= 1e-13 * G.cwiseAbs().maxCoeff());
      const Eigen::MatrixXd HJG = HJ(op).asDiagonal() * G;
      CHECK((oracle::to_eigen(op.assemble_HJG()) - HJG).cwiseAbs().maxCoeff() <= 1e-13 * HJG.cwiseAbs().maxCoeff());
      for (int t = 0; t < 20; ++t) {
        const Vec w = oracle::random_vec(op.size(), rng);
        Vec y(op.size());
        op.apply(w, y);
        const Eigen::VectorXd ref = G * oracle::diag_vec(w);
        CHECK((oracle::diag_vec(y) - ref).cwiseAbs().maxCoeff() <= 1e-13 * std::max(1.0, ref.cwiseAbs().maxCoeff()));
      }
    }
}

TEST_CASE("identity mapping gives G = I and HJG = diag(H1, H2)") {
  std::mt19937_64 rng(4);
  const Setup s = make(MappingSpec::identity(), 12);
  for (MetricVariant v : {MetricVariant::Unconditional, MetricVariant::Modified}) {
    const MetricTensorOp op(s.g, s.ops, s.m, v);
    // the unconditional variant reproduces constants only
    const Vec w = v == MetricVariant::Modified ? oracle::random_vec(op.size(), rng) : Vec(op.size(), 0.7);
    Vec y(op.size()), z(op.size());
    op.apply(w, y);
    CHECK(max_abs_diff(y, w) <= 1e-12);
    op.apply_HJG(w, z);
    const NormWeights2D& nw = op.norms();
    for (std::size_t k = 0; k < op.n1(); ++k) CHECK(z[k] == doctest::Approx(nw.H1[k] * w[k]).epsilon(1e-12));
    for (std::size_t k = 0; k < op.n2(); ++k) CHECK(z[op.n1() + k] == doctest::Approx(nw.H2[k] * w[op.n1() + k]).epsilon(1e-12));
    Vec x(op.size(), 0.0);
    const CgResult r = op.solve_HJG(z, x);
    CHECK(r.converged);
    CHECK(max_abs_diff(x, w) <= 1e-10);
  }
}

TEST_CASE("orthogonal grids have no off-diagonal action") {
  std::mt19937_64 rng(8);
  const Setup s = make(resolve(MappingSpec::annulus(), 12, 36), 12, default_table(), MetricMethod::Analytic);
  for (MetricVariant v : {MetricVariant::Unconditional, MetricVariant::Modified}) {
    const MetricTensorOp op(s.g, s.ops, s.m, v);
    Vec w = oracle::random_vec(op.size(), rng);
    std::fill(w.begin() + static_cast<long>(op.n1()), w.end(), 0.0);
    Vec y(op.size());
    op.apply(w, y);
    CHECK(max_abs(std::span<const double>(y).subspan(op.n1())) <= 1e-12 * max_abs(y));
  }
}

TEST_CASE("variants share off-diagonal blocks") {
  const Setup s = make(MappingSpec::tfi(), 10);
  const Eigen::MatrixXd G = oracle::to_eigen(MetricTensorOp(s.g, s.ops, s.m, MetricVariant::Unconditional).assemble_G());
  const Eigen::MatrixXd Gt = oracle::to_eigen(MetricTensorOp(s.g, s.ops, s.m, MetricVariant::Modified).assemble_G());
  const Eigen::Index n1 = static_cast<Eigen::Index>(s.g->size(Location::Edge1));
  const Eigen::Index n2 = G.rows() - n1;
  CHECK((G.block(0, n1, n1, n2) - Gt.block(0, n1, n1, n2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((G.block(n1, 0, n2, n1) - Gt.block(n1, 0, n2, n1)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((Gt.block(0, 0, n1, n1) - Eigen::MatrixXd(Gt.block(0, 0, n1, n1).diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("HJG is symmetric and the unconditional variant is positive") {
  std::mt19937_64 rng(12);
  for (const MappingSpec& spec : {MappingSpec::tfi(), MappingSpec::gaussian_hill(2.0), MappingSpec::rotation(0.3, MappingSpec::tfi())})
    for (MetricVariant v : {MetricVariant::Unconditional, MetricVariant::Modified}) {
      const Setup s = make(spec, 16);
      const MetricTensorOp op(s.g, s.ops, s.m, v);
      for (int t = 0; t < 100; ++t) {
        const Vec u = oracle::random_vec(op.size(), rng), w = oracle::random_vec(op.size(), rng);
        Vec Au(op.size()), Aw(op.size());
        op.apply_HJG(u, Au);
        op.apply_HJG(w, Aw);
        const double scale = norm2(u) * norm2(Aw) + norm2(w) * norm2(Au);
        CHECK(std::abs(dot(u, Aw) - dot(w, Au)) <= 1e-13 * scale);
        if (v == MetricVariant::Unconditional) CHECK(dot(w, Aw) > 0.0);
      }
    }
}

TEST_CASE("cell-centred metric blocks are SPD") {
  const Setup s = make(MappingSpec::gaussian_hill(2.0), 16);
  const LocationMetrics& c = s.m->cell;
  for (std::size_t k = 0; k < c.J.size(); ++k) {
    CHECK(c.gu11[k] + c.gu22[k] > 0.0);
    CHECK(c.gu11[k] * c.gu22[k] - c.gu12[k] * c.gu12[k] > 0.0);
  }
}

TEST_CASE("CG solves HJG to tolerance and recovers covariant vectors") {
  std::mt19937_64 rng(21);
  const Setup s = make(MappingSpec::tfi(), 16);
  for (bool jacobi : {false, true}) {
    const MetricTensorOp op(s.g, s.ops, s.m, MetricVariant::Modified);
    const Vec w = oracle::random_vec(op.size(), rng);
    Vec b(op.size()), Gw(op.size()), rhs(op.size());
    op.apply_HJG(w, b);
    CgOptions o;
    o.jacobi = jacobi;
    Vec z(op.size(), 0.0);
    const CgResult r = op.solve_HJG(b, z, o);
    CHECK(r.converged);
    CHECK(!r.indefinite);
    Vec Az(op.size());
    op.apply_HJG(z, Az);
    double res = 0.0;
    for (std::size_t k = 0; k < Az.size(); ++k) res += (Az[k] - b[k]) * (Az[k] - b[k]);
    CHECK(std::sqrt(res) <= 1e-12 * norm2(b));
    // G w, then G^-1 through HJ (HJG)^-1 HJ
    op.apply(w, Gw);
    op.apply_HJ(Gw, rhs);
    const Vec back = op.solve_HJG_checked(rhs, o);
    CHECK(max_abs_diff(back, w) <= 1e-9 * max_abs(w));
  }
}

TEST_CASE("CG reports an indefinite modified tensor") {
  const CoefficientTable t = builtin_table("max_norm");
  const Setup s = make(MappingSpec::gaussian_hill(1.0), 16, t);
  const MetricTensorOp op(s.g, s.ops, s.m, MetricVariant::Modified);
  REQUIRE(direct_min_eigenvalue(op) < 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle::to_eigen(dense_HJG(op)));
  const Eigen::VectorXd neg = es.eigenvectors().col(0);
  const Eigen::VectorXd pos = es.eigenvectors().col(es.eigenvectors().cols() - 1);
  Vec rhs(op.size());
  for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = neg(static_cast<Eigen::Index>(k)) + pos(static_cast<Eigen::Index>(k));
  Vec z(op.size(), 0.0);
  const CgResult r = op.solve_HJG(rhs, z);
  CHECK((r.indefinite || !r.converged));
  CHECK_THROWS_AS(op.solve_HJG_checked(rhs), ConvergenceError);
}

TEST_CASE("periodic unconditional tensor annihilates the odd-even mode") {
  const CoefficientTable& t = default_table();
  Setup s;
  s.g = std::make_shared<const StaggeredGrid2D>(t, 16, true);
  s.ops = std::make_shared<const Operators2D>(*s.g);
  s.m = std::make_shared<const MetricFields>(build_metric_fields(MappingSpec::identity(), *s.g, MetricMethod::Analytic));
  const MetricTensorOp op(s.g, s.ops, s.m, MetricVariant::Unconditional);
  const Shape se1 = s.g->shape(Location::Edge1);
  Vec w(op.size(), 0.0), y(op.size());
  for (std::size_t i = 0; i < se1.n1; ++i)
    for (std::size_t j = 0; j < se1.n2; ++j) w[i * se1.n2 + j] = (i % 2 == 0) ? 1.0 : -1.0;
  op.apply_HJG(w, y);
  double m = 0.0;
  for (double v : y) m = std::max(m, std::abs(v));
  CHECK(m <= 1e-14);
  const MetricTensorOp mod(s.g, s.ops, s.m, MetricVariant::Modified);
  mod.apply_HJG(w, y);
  CHECK(std::abs(y[0]) > 1e-3);
}
