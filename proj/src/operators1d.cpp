#include "sbp/operators1d.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "json.hpp"

#include "sbp/errors.hpp"
#include "sbp_default_tables.hpp"

namespace sbp {

namespace {

using json = nlohmann::json;

void check_table(const CoefficientTable& t) {
  const std::size_t b = t.m_weights.size();
  if (b == 0 || t.mhat_weights.size() != b) throw ConfigError("coefficient table: m/mhat weight counts differ or are empty");
  for (const auto* blk : {&t.closure_d, &t.closure_dhat, &t.closure_p, &t.closure_phat})
    if (blk->size() != b) throw ConfigError("coefficient table: closure block row count must equal boundary width");
  for (double w : t.m_weights)
    if (!(w > 0.0)) throw ConfigError("coefficient table: non-positive norm weight in m_weights");
  for (double w : t.mhat_weights)
    if (!(w > 0.0)) throw ConfigError("coefficient table: non-positive norm weight in mhat_weights");
}

// Bounded operator from closure rows, interior stencil and mirror sign.
SparseMatrix assemble_bounded(std::size_t rows, std::size_t cols, const std::vector<std::vector<double>>& closure,
                              const std::array<double, 4>& stencil, int stencil_offset, double sign, double scale) {
  const std::size_t b = closure.size();
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < rows; ++i) {
    if (i < b) {
      for (std::size_t j = 0; j < closure[i].size(); ++j)
        if (closure[i][j] != 0.0) t.push_back({i, j, closure[i][j] * scale});
    } else if (rows - 1 - i < b) {
      const std::size_t r = rows - 1 - i;
      for (std::size_t j = 0; j < closure[r].size(); ++j)
        if (closure[r][j] != 0.0) t.push_back({i, cols - 1 - j, sign * closure[r][j] * scale});
    } else {
      for (int k = 0; k < 4; ++k) {
        const long c = static_cast<long>(i) + stencil_offset + k;
        t.push_back({i, static_cast<std::size_t>(c), stencil[static_cast<std::size_t>(k)] * scale});
      }
    }
  }
  return SparseMatrix(rows, cols, std::move(t));
}

SparseMatrix assemble_periodic(std::size_t n, const std::array<double, 4>& stencil, int stencil_offset, double scale) {
  std::vector<Triplet> t;
  const long ln = static_cast<long>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < 4; ++k) {
      const long c = ((static_cast<long>(i) + stencil_offset + k) % ln + ln) % ln;
      t.push_back({i, static_cast<std::size_t>(c), stencil[static_cast<std::size_t>(k)] * scale});
    }
  return SparseMatrix(n, n, std::move(t));
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw ConfigError("coefficient table: cannot parse real '" + s + "'");
    return v;
  }
  if (j.is_number()) return j.get<double>();
  throw ConfigError("coefficient table: expected a real");
}

std::vector<double> parse_vec(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) throw ConfigError(std::string("coefficient table: missing array '") + key + "'");
  std::vector<double> v;
  for (const auto& e : j.at(key)) v.push_back(parse_real(e));
  return v;
}

std::vector<std::vector<double>> parse_block(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) throw ConfigError(std::string("coefficient table: missing block '") + key + "'");
  std::vector<std::vector<double>> blk;
  for (const auto& row : j.at(key)) {
    if (!row.is_array()) throw ConfigError(std::string("coefficient table: block '") + key + "' rows must be arrays");
    std::vector<double> r;
    for (const auto& e : row) r.push_back(parse_real(e));
    blk.push_back(std::move(r));
  }
  return blk;
}

json vec_json(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(fmt17(x));
  return a;
}

json block_json(const std::vector<std::vector<double>>& b) {
  json a = json::array();
  for (const auto& r : b) a.push_back(vec_json(r));
  return a;
}

}  // namespace

OperatorSet1D instantiate(const CoefficientTable& table, int N, bool periodic) {
  OperatorSet1D ops;
  ops.boundary_order = table.boundary_order;
  ops.periodic = periodic;
  const double h = 1.0 / N;
  if (periodic) {
    ops.grid = build_grids(N, true);
    ops.N = N;
    ops.h = h;
    ops.boundary_width = 0;
    const auto n = static_cast<std::size_t>(N);
    ops.D = assemble_periodic(n, table.interior_d, -2, 1.0 / h);
    ops.Dhat = assemble_periodic(n, table.interior_d, -1, 1.0 / h);
    ops.P = assemble_periodic(n, table.interior_p, -2, 1.0);
    ops.Phat = assemble_periodic(n, table.interior_p, -1, 1.0);
    ops.M.assign(n, h);
    ops.Mhat.assign(n, h);
    return ops;
  }
  check_table(table);
  const int b = table.boundary_width();
  if (N < 2 * b)
    throw ConfigError("instantiate: closures overlap, N = " + std::to_string(N) + " but at least " + std::to_string(2 * b) +
                      " cells are required");
  ops.grid = build_grids(N, false, 2 * b);
  ops.N = N;
  ops.h = h;
  ops.boundary_width = b;
  const auto nn = static_cast<std::size_t>(N) + 1;
  const auto nc = static_cast<std::size_t>(N) + 2;
  ops.D = assemble_bounded(nn, nc, table.closure_d, table.interior_d, -1, -1.0, 1.0 / h);
  ops.Dhat = assemble_bounded(nc, nn, table.closure_dhat, table.interior_d, -2, -1.0, 1.0 / h);
  ops.P = assemble_bounded(nn, nc, table.closure_p, table.interior_p, -1, 1.0, 1.0);
  ops.Phat = assemble_bounded(nc, nn, table.closure_phat, table.interior_p, -2, 1.0, 1.0);
  ops.M.assign(nn, h);
  ops.Mhat.assign(nc, h);
  const auto ub = static_cast<std::size_t>(b);
  for (std::size_t i = 0; i < ub; ++i) {
    ops.M[i] = ops.M[nn - 1 - i] = h * table.m_weights[i];
    ops.Mhat[i] = ops.Mhat[nc - 1 - i] = h * table.mhat_weights[i];
  }
  return ops;
}

DenseMatrix boundary_matrix(const OperatorSet1D& ops) {
  DenseMatrix E(ops.n_nodes(), ops.n_cells());
  if (!ops.periodic) {
    E(0, 0) = -1.0;
    E(ops.n_nodes() - 1, ops.n_cells() - 1) = 1.0;
  }
  return E;
}

std::string table_to_json(const CoefficientTable& t) {
  json j;
  j["interior_d"] = vec_json(t.interior_d);
  j["interior_p"] = vec_json(t.interior_p);
  j["closure_d"] = block_json(t.closure_d);
  j["closure_dhat"] = block_json(t.closure_dhat);
  j["closure_p"] = block_json(t.closure_p);
  j["closure_phat"] = block_json(t.closure_phat);
  j["m_weights"] = vec_json(t.m_weights);
  j["mhat_weights"] = vec_json(t.mhat_weights);
  j["boundary_order"] = t.boundary_order;
  j["provenance"] = t.provenance;
  return j.dump(2) + "\n";
}

CoefficientTable table_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("coefficient table: invalid JSON: ") + e.what());
  }
  CoefficientTable t;
  const auto id = parse_vec(j, "interior_d");
  const auto ip = parse_vec(j, "interior_p");
  if (id.size() != 4 || ip.size() != 4) throw ConfigError("coefficient table: interior stencils must have 4 entries");
  std::copy(id.begin(), id.end(), t.interior_d.begin());
  std::copy(ip.begin(), ip.end(), t.interior_p.begin());
  t.closure_d = parse_block(j, "closure_d");
  t.closure_dhat = parse_block(j, "closure_dhat");
  t.closure_p = parse_block(j, "closure_p");
  t.closure_phat = parse_block(j, "closure_phat");
  t.m_weights = parse_vec(j, "m_weights");
  t.mhat_weights = parse_vec(j, "mhat_weights");
  t.boundary_order = j.value("boundary_order", 2);
  t.provenance = j.value("provenance", std::string());
  check_table(t);
  return t;
}

CoefficientTable load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read coefficient table '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return table_from_json(ss.str());
}

void save_table(const CoefficientTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write coefficient table '" + path + "'");
  out << table_to_json(table);
}

CoefficientTable builtin_table(const std::string& name) {
  const char* text = nullptr;
  if (name == "accuracy") text = detail::kAccuracyTable;
  else if (name == "min_norm") text = detail::kMinNormTable;
  else if (name == "max_norm") text = detail::kMaxNormTable;
  else throw ConfigError("unknown builtin coefficient table '" + name + "'");
  if (text[0] == '\0') throw ConfigError("builtin coefficient table '" + name + "' was not embedded at build time");
  return table_from_json(text);
}

const CoefficientTable& default_table() {
  static const CoefficientTable table = [] {
    if (const char* path = std::getenv("SBP_COEFF_PATH"); path && *path) return load_table(path);
    return builtin_table("accuracy");
  }();
  return table;
}

double interpolation_norm(const OperatorSet1D& ops, double rel_tol, int max_iter, int* iterations) {
  // Lanczos with full reorthogonalization on (PP̂)ᵀ(PP̂); the top Ritz value is
  // within beta·|s_m| of the spectrum.
  const SparseMatrix A = ops.P * ops.Phat;
  const SparseMatrix At = A.transpose();
  const std::size_t n = A.rows();
  const std::size_t steps = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(max_iter, 1)));
  std::vector<Vec> V;
  Vec alpha, beta;
  Vec v(n), y(n), w(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(1.7 * static_cast<double>(i + 1) + 0.3);
  const double nv = norm2(v);
  for (double& x : v) x /= nv;
  std::size_t next_check = 4;
  for (std::size_t m = 0; m < steps; ++m) {
    V.push_back(v);
    A.multiply(v, y);
    At.multiply(y, w);
    alpha.push_back(dot(w, v));
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& q : V) {
        const double c = dot(w, q);
        for (std::size_t i = 0; i < n; ++i) w[i] -= c * q[i];
      }
    const double b = norm2(w);
    const auto k = static_cast<Eigen::Index>(alpha.size());
    const bool last = m + 1 == n || b <= 1e-14 * std::abs(alpha.front());
    if (m + 1 >= next_check || last) {
      next_check = std::max(m + 5, m + m / 5);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      es.computeFromTridiagonal(Eigen::Map<const Eigen::VectorXd>(alpha.data(), k),
                                Eigen::Map<const Eigen::VectorXd>(beta.data(), k - 1), Eigen::ComputeEigenvectors);
      const double theta = es.eigenvalues()(k - 1);
      const double res = b * std::abs(es.eigenvectors()(k - 1, k - 1));
      if (last || (theta > 0.0 && res <= rel_tol * theta)) {
        if (iterations) *iterations = static_cast<int>(m + 1);
        return std::sqrt(std::max(theta, 0.0));
      }
    }
    beta.push_back(b);
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / b;
  }
  throw ConvergenceError("interpolation_norm: Lanczos iteration did not converge");
}

double interpolation_norm_dense(const OperatorSet1D& ops) {
  const DenseMatrix d = (ops.P * ops.Phat).to_dense();
  const Eigen::MatrixXd m = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      d.data().data(), static_cast<Eigen::Index>(d.rows()), static_cast<Eigen::Index>(d.cols()));
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

}  // namespace sbp
