#include "sbp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/Dense>
#include "json.hpp"

namespace sbp {

namespace {

double mono(double x, int k) { return k == 0 ? 1.0 : std::pow(x, k); }

// Wrapped offset y - x in [-1/2, 1/2).
double wrap(double d) { return d - std::floor(d + 0.5); }

// max |A y^k - k' x^{k'}| over the given rows, y sampled on the input grid.
double exactness(const SparseMatrix& A, const Vec& in, const Vec& out, int k, bool derivative, std::size_t skip,
                 bool periodic) {
  double r = 0.0;
  const std::size_t n = A.rows();
  for (std::size_t i = skip; i + skip < n; ++i) {
    auto cols = A.row_cols(i);
    auto vals = A.row_values(i);
    double s = 0.0;
    double ref = 0.0;
    if (periodic) {
      for (std::size_t p = 0; p < cols.size(); ++p) s += vals[p] * mono(wrap(in[cols[p]] - out[i]), k);
      ref = derivative ? (k == 1 ? 1.0 : 0.0) : (k == 0 ? 1.0 : 0.0);
    } else {
      for (std::size_t p = 0; p < cols.size(); ++p) s += vals[p] * mono(in[cols[p]], k);
      ref = derivative ? (k == 0 ? 0.0 : k * mono(out[i], k - 1)) : mono(out[i], k);
    }
    r = std::max(r, std::abs(s - ref));
  }
  return r;
}

double min_singular_value(const SparseMatrix& A) {
  const DenseMatrix d = A.to_dense();
  Eigen::MatrixXd m = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      d.data().data(), static_cast<Eigen::Index>(d.rows()), static_cast<Eigen::Index>(d.cols()));
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues().minCoeff();
}

}  // namespace

VerificationReport verify_operator_set(const OperatorSet1D& ops) {
  VerificationReport r;
  r.N = ops.N;
  r.periodic = ops.periodic;
  const Vec& x = ops.grid.nodes;
  const Vec& xh = ops.grid.cells;

  // (a) M D + D̂ᵀ M̂ - E, (b) M P - P̂ᵀ M̂
  const DenseMatrix E = boundary_matrix(ops);
  {
    DenseMatrix s = ops.D.scale_rows_cols(ops.M, {}).to_dense();
    const DenseMatrix t = ops.Dhat.scale_rows_cols(ops.Mhat, {}).transpose().to_dense();
    for (std::size_t i = 0; i < s.rows(); ++i)
      for (std::size_t j = 0; j < s.cols(); ++j) r.sbp_difference = std::max(r.sbp_difference, std::abs(s(i, j) + t(i, j) - E(i, j)));
    s = ops.P.scale_rows_cols(ops.M, {}).to_dense();
    const DenseMatrix u = ops.Phat.scale_rows_cols(ops.Mhat, {}).transpose().to_dense();
    for (std::size_t i = 0; i < s.rows(); ++i)
      for (std::size_t j = 0; j < s.cols(); ++j) r.sbp_interpolation = std::max(r.sbp_interpolation, std::abs(s(i, j) - u(i, j)));
  }

  const auto b = static_cast<std::size_t>(ops.boundary_width);
  const bool per = ops.periodic;
  for (int k = 0; k <= 4; ++k) {
    const std::size_t skip = k <= 2 ? 0 : b;
    r.d_exact[static_cast<std::size_t>(k)] = exactness(ops.D, xh, x, k, true, skip, per);
    r.dhat_exact[static_cast<std::size_t>(k)] = exactness(ops.Dhat, x, xh, k, true, skip, per);
  }
  for (int k = 0; k <= 3; ++k) {
    const std::size_t skip = k <= 1 ? 0 : b;
    r.p_exact[static_cast<std::size_t>(k)] = exactness(ops.P, xh, x, k, false, skip, per);
    r.phat_exact[static_cast<std::size_t>(k)] = exactness(ops.Phat, x, xh, k, false, skip, per);
  }
  for (int k = 0; k <= 3; ++k) {
    if (per && k > 0) continue;
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += ops.M[i] * mono(x[i], k);
    r.quadrature[static_cast<std::size_t>(k)] = std::abs(s - 1.0 / (k + 1));
  }
  r.min_m = *std::min_element(ops.M.begin(), ops.M.end());
  r.min_mhat = *std::min_element(ops.Mhat.begin(), ops.Mhat.end());
  r.min_sv_p = min_singular_value(ops.P);
  r.min_sv_phat = min_singular_value(ops.Phat);
  return r;
}

double VerificationReport::max_residual() const {
  double m = std::max(sbp_difference, sbp_interpolation);
  for (double v : d_exact) m = std::max(m, v);
  for (double v : dhat_exact) m = std::max(m, v);
  for (double v : p_exact) m = std::max(m, v);
  for (double v : phat_exact) m = std::max(m, v);
  for (double v : quadrature) m = std::max(m, v);
  return m;
}

std::string VerificationReport::first_failure(double tol) const {
  if (sbp_difference > tol) return "sbp_difference";
  if (sbp_interpolation > tol) return "sbp_interpolation";
  auto scan = [&](const auto& arr, const char* name) -> std::string {
    for (std::size_t k = 0; k < arr.size(); ++k)
      if (arr[k] > tol) return std::string(name) + "[" + std::to_string(k) + "]";
    return {};
  };
  for (auto s : {scan(d_exact, "d_exact"), scan(dhat_exact, "dhat_exact"), scan(p_exact, "p_exact"),
                 scan(phat_exact, "phat_exact"), scan(quadrature, "quadrature")})
    if (!s.empty()) return s;
  if (!(min_m > 0.0)) return "min_m";
  if (!(min_mhat > 0.0)) return "min_mhat";
  if (!(min_sv_p > 0.0)) return "min_sv_p";
  if (!(min_sv_phat > 0.0)) return "min_sv_phat";
  return {};
}

std::string VerificationReport::to_json() const {
  nlohmann::json j;
  j["N"] = N;
  j["periodic"] = periodic;
  j["sbp_difference"] = sbp_difference;
  j["sbp_interpolation"] = sbp_interpolation;
  j["d_exact"] = d_exact;
  j["dhat_exact"] = dhat_exact;
  j["p_exact"] = p_exact;
  j["phat_exact"] = phat_exact;
  j["quadrature"] = quadrature;
  j["min_m"] = min_m;
  j["min_mhat"] = min_mhat;
  j["min_sv_p"] = min_sv_p;
  j["min_sv_phat"] = min_sv_phat;
  j["max_residual"] = max_residual();
  return j.dump();
}

}  // namespace sbp
