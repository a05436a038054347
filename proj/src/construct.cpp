#include "sbp/construct.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "sbp/errors.hpp"

namespace sbp {

namespace {

constexpr int kB = 4;
constexpr int kW = 8;
constexpr int kNq = kB * kB;

double xn(int i) { return i; }
double xc(int j) { return j == 0 ? 0.0 : j - 0.5; }
double ipow(double x, int k) { return k == 0 ? 1.0 : std::pow(x, k); }

double stencil_at(const std::array<double, 4>& st, int off) { return off >= 0 && off < 4 ? st[static_cast<std::size_t>(off)] : 0.0; }

// Corner entry as (coefficient index into the free block or -1, constant).
struct Entry {
  int free = -1;
  double sign = 1.0;
  double value = 0.0;
};

// Q = M·D (grid units). antisymmetric: Q̂ = E - Qᵀ; otherwise R̂ = Rᵀ.
Entry q_entry(int i, int j, const std::array<double, 4>& st, bool antisym) {
  if (i < kB && j < kB) return {i * kB + j, 1.0, 0.0};
  if (i < kB) {
    const double c = stencil_at(st, i - (j - 2));
    return {-1, 1.0, antisym ? -c : c};
  }
  return {-1, 1.0, stencil_at(st, j - (i - 1))};
}

Entry qhat_entry(int j, int i, const std::array<double, 4>& st, bool antisym) {
  if (j < kB) {
    Entry e = q_entry(i, j, st, antisym);
    if (!antisym) return e;
    e.sign = -1.0;
    e.value = ((i == 0 && j == 0) ? -1.0 : 0.0) - e.value;
    return e;
  }
  return {-1, 1.0, stencil_at(st, i - (j - 2))};
}

struct LinearSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

struct Solved {
  Eigen::VectorXd particular;
  Eigen::MatrixXd nullspace;
  int rank = 0;
  double residual = 0.0;
};

Solved solve_underdetermined(const LinearSystem& sys) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  svd.setThreshold(1e-10);
  Solved s;
  s.rank = static_cast<int>(svd.rank());
  s.particular = svd.solve(sys.b);
  s.residual = (sys.A * s.particular - sys.b).cwiseAbs().maxCoeff();
  const auto n = sys.A.cols();
  s.nullspace = svd.matrixV().rightCols(n - s.rank);
  return s;
}

LinearSystem difference_system(const CoefficientTable& t) {
  constexpr int nu = kNq + 2 * kB;
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  auto add = [&](const Entry& e, double w, Eigen::VectorXd& v, double& c) {
    if (e.free >= 0) v(e.free) += e.sign * w;
    c += e.value * w;
  };
  for (int i = 0; i < kB; ++i)
    for (int k = 0; k <= 2; ++k) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(nu);
      double c = 0.0;
      for (int j = 0; j < kW; ++j) add(q_entry(i, j, t.interior_d, true), ipow(xc(j), k), v, c);
      if (k > 0) v(kNq + i) -= k * ipow(xn(i), k - 1);
      rows.push_back(v);
      rhs.push_back(-c);
    }
  for (int j = 0; j < kB; ++j)
    for (int k = 0; k <= 2; ++k) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(nu);
      double c = 0.0;
      for (int i = 0; i < kW; ++i) add(qhat_entry(j, i, t.interior_d, true), ipow(xn(i), k), v, c);
      if (k > 0) v(kNq + kB + j) -= k * ipow(xc(j), k - 1);
      rows.push_back(v);
      rhs.push_back(-c);
    }
  // Endpoint corrections of the nodal quadrature up to degree 2.
  const double corr[3] = {-0.5, 1.0 / 12.0, 0.0};
  for (int k = 0; k <= 2; ++k) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(nu);
    double c = corr[k];
    for (int i = 0; i < kB; ++i) {
      v(kNq + i) = ipow(xn(i), k);
      c += ipow(xn(i), k);
    }
    rows.push_back(v);
    rhs.push_back(c);
  }
  LinearSystem s{Eigen::MatrixXd(rows.size(), nu), Eigen::VectorXd(rows.size())};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    s.A.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
    s.b(static_cast<Eigen::Index>(r)) = rhs[r];
  }
  return s;
}

LinearSystem interpolation_system(const CoefficientTable& t, const double* m, const double* mh) {
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  auto add = [&](const Entry& e, double w, Eigen::VectorXd& v, double& c) {
    if (e.free >= 0) v(e.free) += w;
    c += e.value * w;
  };
  for (int i = 0; i < kB; ++i)
    for (int k = 0; k <= 1; ++k) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(kNq);
      double c = 0.0;
      for (int j = 0; j < kW; ++j) add(q_entry(i, j, t.interior_p, false), ipow(xc(j), k), v, c);
      rows.push_back(v);
      rhs.push_back(m[i] * ipow(xn(i), k) - c);
    }
  for (int j = 0; j < kB; ++j)
    for (int k = 0; k <= 1; ++k) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(kNq);
      double c = 0.0;
      for (int i = 0; i < kW; ++i) add(qhat_entry(j, i, t.interior_p, false), ipow(xn(i), k), v, c);
      rows.push_back(v);
      rhs.push_back(mh[j] * ipow(xc(j), k) - c);
    }
  LinearSystem s{Eigen::MatrixXd(rows.size(), kNq), Eigen::VectorXd(rows.size())};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    s.A.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
    s.b(static_cast<Eigen::Index>(r)) = rhs[r];
  }
  return s;
}

void trim(std::vector<double>& row) {
  while (!row.empty() && row.back() == 0.0) row.pop_back();
}

CoefficientTable make_table(const Eigen::VectorXd& xd, const Eigen::VectorXd& xp) {
  CoefficientTable t;
  t.m_weights.assign(xd.data() + kNq, xd.data() + kNq + kB);
  t.mhat_weights.assign(xd.data() + kNq + kB, xd.data() + kNq + 2 * kB);
  auto val = [](const Entry& e, const Eigen::VectorXd& x) { return (e.free >= 0 ? e.sign * x(e.free) : 0.0) + e.value; };
  t.closure_d.assign(kB, std::vector<double>(kW, 0.0));
  t.closure_dhat.assign(kB, std::vector<double>(kW, 0.0));
  t.closure_p.assign(kB, std::vector<double>(kW, 0.0));
  t.closure_phat.assign(kB, std::vector<double>(kW, 0.0));
  for (int r = 0; r < kB; ++r) {
    const auto ur = static_cast<std::size_t>(r);
    for (int c = 0; c < kW; ++c) {
      const auto uc = static_cast<std::size_t>(c);
      t.closure_d[ur][uc] = val(q_entry(r, c, t.interior_d, true), xd) / t.m_weights[ur];
      t.closure_dhat[ur][uc] = val(qhat_entry(r, c, t.interior_d, true), xd) / t.mhat_weights[ur];
      t.closure_p[ur][uc] = val(q_entry(r, c, t.interior_p, false), xp) / t.m_weights[ur];
      t.closure_phat[ur][uc] = val(qhat_entry(r, c, t.interior_p, false), xp) / t.mhat_weights[ur];
    }
    trim(t.closure_d[ur]);
    trim(t.closure_dhat[ur]);
    trim(t.closure_p[ur]);
    trim(t.closure_phat[ur]);
  }
  return t;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())); }

}  // namespace

Objective parse_objective(const std::string& name) {
  if (name == "min_norm") return Objective::MinNorm;
  if (name == "max_norm") return Objective::MaxNorm;
  if (name == "accuracy") return Objective::Accuracy;
  throw ConfigError("unknown construction objective '" + name + "' (expected min_norm, max_norm or accuracy)");
}

std::string to_string(Objective o) {
  switch (o) {
    case Objective::MinNorm: return "min_norm";
    case Objective::MaxNorm: return "max_norm";
    case Objective::Accuracy: return "accuracy";
  }
  return "?";
}

ConstructionResult construct_operator_set(int boundary_order, const ConstructOptions& opts) {
  if (boundary_order != 2) throw ConfigError("construct_operator_set: only boundary order 2 is supported");
  const CoefficientTable base;
  ConstructionResult res;

  const LinearSystem dsys = difference_system(base);
  const Solved dsol = solve_underdetermined(dsys);
  res.equations_d = static_cast<int>(dsys.A.rows());
  res.rank_d = dsol.rank;
  res.free_d = static_cast<int>(dsol.nullspace.cols());
  if (dsol.residual > 1e-10) throw VerificationError("construct_operator_set: difference constraints are inconsistent");

  // The interpolation matrix does not depend on the weights, only its right-hand side does.
  const double ones[kB] = {1, 1, 1, 1};
  const LinearSystem psys0 = interpolation_system(base, ones, ones);
  Eigen::JacobiSVD<Eigen::MatrixXd> psvd(psys0.A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  psvd.setThreshold(1e-10);
  const int prank = static_cast<int>(psvd.rank());
  const Eigen::MatrixXd pnull = psvd.matrixV().rightCols(kNq - prank);
  res.equations_p = static_cast<int>(psys0.A.rows());
  res.rank_p = prank;
  res.free_p = static_cast<int>(pnull.cols());

  // Along directions of the difference nullspace that leave the norm weights
  // fixed the degree-3 residual is affine; the weight-changing directions are
  // searched.
  Eigen::MatrixXd dbasis, dflat;
  {
    const Eigen::MatrixXd w = dsol.nullspace.bottomRows(2 * kB);
    Eigen::JacobiSVD<Eigen::MatrixXd> wsvd(w, Eigen::ComputeFullV);
    wsvd.setThreshold(1e-10);
    dbasis = dsol.nullspace * wsvd.matrixV().leftCols(wsvd.rank());
    dflat = dsol.nullspace * wsvd.matrixV().rightCols(dsol.nullspace.cols() - wsvd.rank());
    res.weight_free_d = static_cast<int>(wsvd.rank());
  }
  // Rows of Q x̂³ - 3 M x² and Q̂ x³ - 3 M̂ x̂².
  LinearSystem d3{Eigen::MatrixXd::Zero(2 * kB, dsys.A.cols()), Eigen::VectorXd::Zero(2 * kB)};
  for (int i = 0; i < kB; ++i) {
    for (int j = 0; j < kW; ++j) {
      const Entry e = q_entry(i, j, base.interior_d, true);
      if (e.free >= 0) d3.A(i, e.free) += e.sign * ipow(xc(j), 3);
      d3.b(i) -= e.value * ipow(xc(j), 3);
      const Entry f = qhat_entry(i, j, base.interior_d, true);
      if (f.free >= 0) d3.A(kB + i, f.free) += f.sign * ipow(xn(j), 3);
      d3.b(kB + i) -= f.value * ipow(xn(j), 3);
    }
    d3.A(i, kNq + i) -= 3.0 * ipow(xn(i), 2);
    d3.A(kB + i, kNq + kB + i) -= 3.0 * ipow(xc(i), 2);
  }
  struct DPoint {
    Eigen::VectorXd x;
    double residual = 0.0;
    bool feasible = true;
  };
  // Degree-3 residual of D and D̂ rows, minimised over the weight-neutral block.
  auto d_point = [&](const std::vector<double>& td) {
    DPoint d;
    d.x = dsol.particular + dbasis * to_eigen(td);
    Eigen::VectorXd scale(2 * kB);
    for (int i = 0; i < 2 * kB; ++i) {
      const double w = d.x(kNq + i);
      if (w < opts.min_weight) d.feasible = false;
      scale(i) = 1.0 / std::max(w, opts.min_weight);
    }
    const Eigen::VectorXd r0 = scale.asDiagonal() * (d3.A * d.x - d3.b);
    if (dflat.cols() > 0) {
      const Eigen::MatrixXd a = scale.asDiagonal() * (d3.A * dflat);
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
      cod.setThreshold(1e-10);
      const Eigen::VectorXd tf = cod.solve(-r0);
      d.x += dflat * tf;
      d.residual = (r0 + a * tf).norm();
    } else {
      d.residual = r0.norm();
    }
    return d;
  };
  const auto nd = static_cast<std::size_t>(dbasis.cols());
  const auto np = static_cast<std::size_t>(res.free_p);

  struct Candidate {
    CoefficientTable table;
    bool feasible = false;
  };
  auto build = [&](const Eigen::VectorXd& xd, const std::vector<double>& tp) {
    Candidate c;
    const LinearSystem psys = interpolation_system(base, xd.data() + kNq, xd.data() + kNq + kB);
    const Eigen::VectorXd xp0 = psvd.solve(psys.b);
    if ((psys.A * xp0 - psys.b).cwiseAbs().maxCoeff() > 1e-10) return c;
    const Eigen::VectorXd xp = xp0 + pnull * to_eigen(tp);
    c.table = make_table(xd, xp);
    c.table.boundary_order = boundary_order;
    c.feasible = true;
    for (int i = 0; i < kB; ++i)
      if (xd(kNq + i) < opts.min_weight || xd(kNq + kB + i) < opts.min_weight) c.feasible = false;
    return c;
  };
  auto norm_of = [&](const CoefficientTable& t) { return interpolation_norm_dense(instantiate(t, opts.eval_N)); };

  // Interpolation parameters minimising the degree-2 residual, which is affine in tp.
  auto accuracy_tp = [&](const Eigen::VectorXd& xd) {
    const std::size_t nr = 2 * kB;
    auto residual_vec = [&](const std::vector<double>& t) {
      const CoefficientTable tab = build(xd, t).table;
      Eigen::VectorXd v(nr);
      for (int i = 0; i < kB; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        double s = -xn(i) * xn(i);
        for (std::size_t j = 0; j < tab.closure_p[ui].size(); ++j) s += tab.closure_p[ui][j] * xc(static_cast<int>(j)) * xc(static_cast<int>(j));
        v(2 * i) = s;
        s = -xc(i) * xc(i);
        for (std::size_t j = 0; j < tab.closure_phat[ui].size(); ++j) s += tab.closure_phat[ui][j] * xn(static_cast<int>(j)) * xn(static_cast<int>(j));
        v(2 * i + 1) = s;
      }
      return v;
    };
    const Eigen::VectorXd r0 = residual_vec(std::vector<double>(np, 0.0));
    Eigen::MatrixXd A(nr, static_cast<Eigen::Index>(np));
    for (std::size_t k = 0; k < np; ++k) {
      std::vector<double> e(np, 0.0);
      e[k] = 1.0;
      A.col(static_cast<Eigen::Index>(k)) = residual_vec(e) - r0;
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    cod.setThreshold(1e-10);
    cod.compute(A);
    const Eigen::VectorXd ta = cod.solve(-r0);
    return std::vector<double>(ta.data(), ta.data() + ta.size());
  };

  // Difference parameters: smallest degree-3 residual whose accuracy-optimal
  // interpolation pair stays within norm_cap.
  std::vector<double> td = opts.params_d;
  if (td.empty()) {
    auto d_objective = [&](const std::vector<double>& t) {
      const DPoint d = d_point(t);
      if (!d.feasible) return 1e6;
      const Candidate c = build(d.x, accuracy_tp(d.x));
      if (!c.feasible) return 1e6;
      const double n = norm_of(c.table);
      return n > opts.norm_cap ? 1e2 * (1.0 + n - opts.norm_cap) : d.residual;
    };
    const NelderMeadResult r = nelder_mead(d_objective, std::vector<double>(nd, 0.0), 0.5, 2000);
    td = r.x;
    res.evaluations += r.evaluations;
  } else if (td.size() != nd) {
    throw ConfigError("construct_operator_set: params_d has the wrong length");
  }
  const DPoint dbest = d_point(td);
  if (!dbest.feasible) throw ConfigError("construct_operator_set: difference parameters give a norm weight below min_weight");
  res.residual_d3 = dbest.residual;
  const Eigen::VectorXd& xd = dbest.x;

  auto min_norm_objective = [&](const std::vector<double>& tp) {
    const Candidate c = build(xd, tp);
    if (!c.table.m_weights.size()) return 1e6;
    if (!c.feasible) return 1e6;
    return norm_of(c.table);
  };

  const std::vector<double> tp_acc = accuracy_tp(xd);
  std::vector<double> tp = tp_acc;
  if (opts.objective != Objective::Accuracy) {
    // Restarts refresh a collapsed simplex.
    NelderMeadResult nm{std::vector<double>(np, 0.0), 0.0, 1};
    nm.f = min_norm_objective(nm.x);
    int evals = 1;
    for (int restart = 0; restart < 8 && evals < opts.max_evaluations; ++restart) {
      const double prev = nm.f;
      NelderMeadResult r = nelder_mead(min_norm_objective, nm.x, restart == 0 ? 0.5 : 0.1, opts.max_evaluations - evals);
      evals += r.evaluations;
      if (r.f <= nm.f) nm = r;
      if (restart > 0 && prev - nm.f < 1e-9) break;
    }
    res.evaluations += evals;
    const std::vector<double> tp_min = nm.x;
    tp = tp_min;
    if (opts.objective == Objective::MaxNorm) {
      auto along = [&](double s) {
        std::vector<double> t(np);
        for (std::size_t k = 0; k < np; ++k) t[k] = (1.0 - s) * tp_min[k] + s * tp_acc[k];
        return t;
      };
      double lo = 0.0, hi = 1.0;
      double fhi = norm_of(build(xd, along(hi)).table);
      while (fhi < opts.max_norm_target && hi < 64.0) {
        lo = hi;
        hi *= 2.0;
        fhi = norm_of(build(xd, along(hi)).table);
      }
      if (fhi < opts.max_norm_target) {
        res.warnings.push_back("max_norm: target norm not reached along the search segment");
        tp = along(hi);
      } else {
        for (int it = 0; it < 80; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (norm_of(build(xd, along(mid)).table) < opts.max_norm_target) lo = mid;
          else hi = mid;
        }
        tp = along(hi);
      }
    }
  }

  res.table = build(xd, tp).table;
  res.table.provenance = "constructed: objective=" + to_string(opts.objective) + ", boundary_order=2, width=4";
  res.norm_PPhat = norm_of(res.table);
  res.params_d = td;
  res.params_p = tp;
  if (opts.objective == Objective::MinNorm && res.norm_PPhat >= 1.5)
    res.warnings.push_back("min_norm: optimizer did not reduce the interpolation norm below 1.5");
  return res;
}

}  // namespace sbp
