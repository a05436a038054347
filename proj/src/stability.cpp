#include "sbp/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "json.hpp"

#include "sbp/errors.hpp"

namespace sbp {

Vec symmetric_eigen(const DenseMatrix& A_in, DenseMatrix* vectors, double tol, int max_sweeps) {
  const std::size_t n = A_in.rows();
  if (A_in.cols() != n) throw ConfigError("symmetric_eigen: matrix is not square");
  DenseMatrix A = A_in;
  DenseMatrix V;
  if (vectors) V = DenseMatrix::identity(n);
  double fro = 0.0;
  for (double v : A.data()) fro += v * v;
  fro = std::sqrt(fro);
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * A(i, j) * A(i, j);
    return std::sqrt(s);
  };
  int sweep = 0;
  double off = off_norm();
  while (off > tol * fro && fro > 0.0) {
    if (sweep++ >= max_sweeps) {
      std::ostringstream os;
      os << "Jacobi eigensolver did not converge in " << max_sweeps << " sweeps (off-diagonal norm " << off << ")";
      throw ConvergenceError(os.str());
    }
    const double skip = 1e-3 * tol * fro / static_cast<double>(n);
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (std::abs(apq) <= skip) continue;
        const double app = A(p, p), aqq = A(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        double* rp = A.row(p).data();
        double* rq = A.row(q).data();
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = rp[k], akq = rq[k];
          rp[k] = c * akp - s * akq;
          rq[k] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double* rk = A.row(k).data();
          const double akp = rk[p], akq = rk[q];
          rk[p] = c * akp - s * akq;
          rk[q] = s * akp + c * akq;
        }
        A(p, q) = A(q, p) = 0.0;
        if (vectors)
          for (std::size_t k = 0; k < n; ++k) {
            double* vk = V.row(k).data();
            const double vkp = vk[p], vkq = vk[q];
            vk[p] = c * vkp - s * vkq;
            vk[q] = s * vkp + c * vkq;
          }
      }
    }
    off = off_norm();
  }
  Vec ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = A(i, i);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ev[a] < ev[b]; });
  Vec sorted(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = ev[order[i]];
  if (vectors) {
    *vectors = DenseMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) (*vectors)(k, i) = V(k, order[i]);
  }
  return sorted;
}

bool cholesky_succeeds(const DenseMatrix& A_in) {
  const std::size_t n = A_in.rows();
  DenseMatrix L = A_in;
  for (std::size_t j = 0; j < n; ++j) {
    double d = L(j, j);
    const double* lj = L.row(j).data();
    for (std::size_t k = 0; k < j; ++k) d -= lj[k] * lj[k];
    if (!(d > 0.0)) return false;
    const double ljj = std::sqrt(d);
    L(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double* li = L.row(i).data();
      double s = li[j];
      for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
      li[j] = s / ljj;
    }
  }
  return true;
}

namespace {

// Largest eigenvalue of B = M^{-1/2} K^{-1/2} P̂ᵀ M̂ K̂ P̂ K^{-1/2} M^{-1/2} for one grid line.
SparseMatrix line_matrix(const OperatorSet1D& ops, const Vec& K, const Vec& Khat) {
  const std::size_t nn = ops.M.size();
  Vec s(nn), w(Khat.size());
  for (std::size_t i = 0; i < nn; ++i) s[i] = 1.0 / std::sqrt(ops.M[i] * K[i]);
  for (std::size_t r = 0; r < w.size(); ++r) w[r] = ops.Mhat[r] * Khat[r];
  const SparseMatrix PhS = ops.Phat.scale_rows_cols({}, s);
  return PhS.transpose().scale_rows_cols({}, w) * PhS;
}

// λ_max by bisection on the definiteness of σI - B through a banded LDLᵀ.
double banded_lambda_max(const SparseMatrix& B) {
  const std::size_t n = B.rows();
  std::size_t bw = 0;
  double lo = 0.0, hi = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double row = 0.0;
    const auto cols = B.row_cols(r);
    const auto vals = B.row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      bw = std::max(bw, cols[k] > r ? cols[k] - r : r - cols[k]);
      row += std::abs(vals[k]);
      if (cols[k] == r) lo = std::max(lo, vals[k]);
    }
    hi = std::max(hi, row);
  }
  // band storage: band[r][d] = A(r, r - bw + d) for the lower triangle
  std::vector<double> band(n * (bw + 1));
  auto definite = [&](double sigma) {
    std::fill(band.begin(), band.end(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const auto cols = B.row_cols(r);
      const auto vals = B.row_values(r);
      for (std::size_t k = 0; k < cols.size(); ++k)
        if (cols[k] <= r) band[r * (bw + 1) + (bw - (r - cols[k]))] = -vals[k];
      band[r * (bw + 1) + bw] += sigma;
    }
    auto at = [&](std::size_t i, std::size_t j) -> double& { return band[i * (bw + 1) + (bw - (i - j))]; };
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k0 = j > bw ? j - bw : 0;
      double d = at(j, j);
      for (std::size_t k = k0; k < j; ++k) d -= at(j, k) * at(j, k);
      if (!(d > 0.0)) return false;
      const double ljj = std::sqrt(d);
      at(j, j) = ljj;
      for (std::size_t i = j + 1; i <= std::min(n - 1, j + bw); ++i) {
        double v = at(i, j);
        const std::size_t ks = i > bw ? i - bw : 0;
        for (std::size_t k = std::max(k0, ks); k < j; ++k) v -= at(i, k) * at(j, k);
        at(i, j) = v / ljj;
      }
    }
    return true;
  };
  hi *= 1.0 + 1e-12;
  while (hi - lo > 1e-14 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (definite(mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

double line_lambda_max(const OperatorSet1D& ops, const Vec& K, const Vec& Khat) {
  const SparseMatrix B = line_matrix(ops, K, Khat);
  const std::size_t n = B.rows();
  if (n <= 64) return symmetric_eigen(B.to_dense()).back();
  if (!ops.periodic) return banded_lambda_max(B);
  const DenseMatrix Bd = B.to_dense();
  Eigen::MatrixXd E(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) E(i, j) = Bd(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(E, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

LineBounds line_eigen_bounds(const MetricFields& metric, const StaggeredGrid2D& g) {
  LineBounds lb;
  const Shape se1 = g.shape(Location::Edge1), se2 = g.shape(Location::Edge2), sc = g.shape(Location::Cell);
  const LocationMetrics &c = metric.cell, &e1 = metric.edge1, &e2 = metric.edge2;
  // direction 1: lines of fixed r² = x̂_j; nodal values on edge1, cell values on cells
  for (std::size_t j = 0; j < sc.n2; ++j) {
    Vec K(se1.n1), Kh(sc.n1);
    for (std::size_t i = 0; i < se1.n1; ++i) {
      const std::size_t k = i * se1.n2 + j;
      K[i] = e1.J[k] * e1.gu11[k];
    }
    for (std::size_t i = 0; i < sc.n1; ++i) {
      const std::size_t k = i * sc.n2 + j;
      Kh[i] = c.J[k] * c.gu11[k];
    }
    lb.lambda1.push_back(line_lambda_max(g.ops(1), K, Kh));
  }
  // direction 2: lines of fixed r¹ = x̂_k
  for (std::size_t i = 0; i < sc.n1; ++i) {
    Vec K(se2.n2), Kh(sc.n2);
    for (std::size_t j = 0; j < se2.n2; ++j) {
      const std::size_t k = i * se2.n2 + j;
      K[j] = e2.J[k] * e2.gu22[k];
    }
    for (std::size_t j = 0; j < sc.n2; ++j) {
      const std::size_t k = i * sc.n2 + j;
      Kh[j] = c.J[k] * c.gu22[k];
    }
    lb.lambda2.push_back(line_lambda_max(g.ops(2), K, Kh));
  }
  lb.alpha = 1.0 / *std::max_element(lb.lambda1.begin(), lb.lambda1.end());
  lb.beta = 1.0 / *std::max_element(lb.lambda2.begin(), lb.lambda2.end());
  return lb;
}

PointwiseResult pointwise_definiteness(const MetricFields& metric, double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw ConfigError("pointwise_definiteness: alpha and beta must be positive");
  const LocationMetrics& c = metric.cell;
  double mn = INFINITY;
  for (std::size_t k = 0; k < c.J.size(); ++k) {
    const double a = alpha * c.gu11[k], b = c.gu12[k], d = beta * c.gu22[k];
    const double lam = 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + b * b);
    mn = std::min(mn, lam);
  }
  return {mn, mn > 0.0};
}

DenseMatrix dense_HJG(const MetricTensorOp& op) {
  DenseMatrix A = op.assemble_HJG().to_dense();
  const std::size_t n = A.rows();
  double asym = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      asym = std::max(asym, std::abs(A(i, j) - A(j, i)));
      scale = std::max(scale, std::abs(A(i, j)));
    }
  if (asym > 1e-12 * std::max(scale, 1.0)) {
    std::ostringstream os;
    os << "HJG asymmetry " << asym << " exceeds threshold";
    throw VerificationError(os.str());
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) A(i, j) = A(j, i) = 0.5 * (A(i, j) + A(j, i));
  return A;
}

double direct_min_eigenvalue(const MetricTensorOp& op) { return symmetric_eigen(dense_HJG(op)).front(); }

std::string StabilityReport::to_json() const {
  nlohmann::json j;
  j["alpha_tilde"] = alpha;
  j["beta_tilde"] = beta;
  j["lambda1_max"] = lambda1.empty() ? 0.0 : *std::max_element(lambda1.begin(), lambda1.end());
  j["lambda2_max"] = lambda2.empty() ? 0.0 : *std::max_element(lambda2.begin(), lambda2.end());
  j["lambda1"] = lambda1;
  j["lambda2"] = lambda2;
  j["min_eig_C"] = min_eig_C;
  j["verdict"] = verdict();
  if (direct_min) j["direct_min_eigenvalue"] = *direct_min;
  j["note"] = note;
  return j.dump(2);
}

StabilityReport stability_check(const MetricFields& metric, const StaggeredGrid2D& g) {
  StabilityReport r;
  const LineBounds lb = line_eigen_bounds(metric, g);
  r.alpha = lb.alpha;
  r.beta = lb.beta;
  r.lambda1 = lb.lambda1;
  r.lambda2 = lb.lambda2;
  const PointwiseResult pw = pointwise_definiteness(metric, r.alpha, r.beta);
  r.min_eig_C = pw.min_eigenvalue;
  r.definite = pw.definite;
  return r;
}

MetricTensorOp hill_operator(const CoefficientTable& table, int n, double gamma, MetricMethod method,
                             MetricVariant variant) {
  auto g = std::make_shared<const StaggeredGrid2D>(table, n);
  auto ops = std::make_shared<const Operators2D>(*g);
  auto m = std::make_shared<const MetricFields>(build_metric_fields(MappingSpec::gaussian_hill(gamma), *g, method));
  return MetricTensorOp(g, ops, m, variant);
}

std::vector<SweepRow> gamma_sweep(const std::vector<double>& gammas, const std::vector<CoefficientTable>& tables,
                                  int n, MetricMethod method) {
  std::vector<SweepRow> rows;
  for (const CoefficientTable& t : tables) {
    const double nrm = interpolation_norm(instantiate(t, n));
    for (double gamma : gammas) {
      const MetricTensorOp op = hill_operator(t, n, gamma, method);
      const StabilityReport rep = stability_check(op.metric(), op.grid());
      SweepRow r;
      r.gamma = gamma;
      r.norm_PPhat = nrm;
      r.lambda_min_direct = direct_min_eigenvalue(op);
      r.lambda_min_bound = rep.min_eig_C;
      r.definite = rep.definite;
      rows.push_back(r);
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "gamma,norm_PPhat,lambda_min_direct,lambda_min_bound,verdict\n";
  char buf[256];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6g,%.6f,%.10e,%.10e,%s\n", r.gamma, r.norm_PPhat, r.lambda_min_direct,
                  r.lambda_min_bound, r.definite ? "definite" : "inconclusive");
    os << buf;
  }
  return os.str();
}

namespace {

template <class Pred>
double bisect_first_failure(Pred ok, double lo, double hi, double tol) {
  if (!ok(lo)) return lo;
  if (ok(hi)) return hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (ok(mid)) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double critical_gamma_direct(const CoefficientTable& table, int n, double lo, double hi, double tol,
                             MetricMethod method) {
  return bisect_first_failure(
      [&](double gamma) { return cholesky_succeeds(dense_HJG(hill_operator(table, n, gamma, method))); }, lo, hi,
      tol);
}

double critical_gamma_bound(const CoefficientTable& table, int n, double lo, double hi, double tol,
                            MetricMethod method) {
  return bisect_first_failure(
      [&](double gamma) {
        const StaggeredGrid2D g(table, n);
        const MetricFields m = build_metric_fields(MappingSpec::gaussian_hill(gamma), g, method);
        return stability_check(m, g).definite;
      },
      lo, hi, tol);
}

}  // namespace sbp
