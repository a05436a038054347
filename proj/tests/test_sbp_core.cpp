#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "oracles.hpp"
#include "sbp/construct.hpp"
#include "sbp/errors.hpp"
#include "sbp/operators1d.hpp"
#include "sbp/verify.hpp"

using namespace sbp;

TEST_CASE("grids on four cells") {
  const StaggeredGrid1D b = build_grids(4, false, 4);
  const Vec x{0, .25, .5, .75, 1}, xh{0, .125, .375, .625, .875, 1};
  CHECK(b.nodes == x);
  CHECK(b.cells == xh);
  const StaggeredGrid1D p = build_grids(4, true, 4);
  CHECK(p.nodes == Vec{0, .25, .5, .75});
  CHECK(p.cells == Vec{.125, .375, .625, .875});
  CHECK_THROWS_AS(build_grids(7, false, 8), ConfigError);
  CHECK_THROWS_AS(instantiate(default_table(), 7), ConfigError);
}

TEST_CASE("interior stencils match the Taylor oracle") {
  const int N = 32;
  const OperatorSet1D ops = instantiate(default_table(), N);
  const Eigen::VectorXd d = oracle::taylor_stencil({-1.5, -0.5, 0.5, 1.5}, 1);
  const Eigen::VectorXd p = oracle::taylor_stencil({-1.5, -0.5, 0.5, 1.5}, 0);
  const std::size_t i = N / 2;
  for (int k = 0; k < 4; ++k) {
    CHECK(ops.D.at(i, i - 1 + k) * ops.h == doctest::Approx(d(k)).epsilon(1e-14));
    CHECK(ops.P.at(i, i - 1 + k) == doctest::Approx(p(k)).epsilon(1e-14));
  }
  CHECK(d(0) == doctest::Approx(1.0 / 24));
  CHECK(p(1) == doctest::Approx(9.0 / 16));
}

TEST_CASE("bounded identities for every builtin table") {
  for (const char* name : {"accuracy", "min_norm", "max_norm"}) {
    const CoefficientTable t = builtin_table(name);
    for (int N : {8, 16, 32, 64, 128}) {
      CAPTURE(name);
      CAPTURE(N);
      const OperatorSet1D ops = instantiate(t, N);
      const Eigen::MatrixXd M = oracle::diag_vec(ops.M).asDiagonal();
      const Eigen::MatrixXd Mh = oracle::diag_vec(ops.Mhat).asDiagonal();
      Eigen::MatrixXd E = Eigen::MatrixXd::Zero(N + 1, N + 2);
      E(0, 0) = -1.0;
      E(N, N + 1) = 1.0;
      const Eigen::MatrixXd D = oracle::to_eigen(ops.D), Dh = oracle::to_eigen(ops.Dhat);
      const Eigen::MatrixXd P = oracle::to_eigen(ops.P), Ph = oracle::to_eigen(ops.Phat);
      CHECK((M * D + Dh.transpose() * Mh - E).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((M * P - Ph.transpose() * Mh).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(max_abs_diff(boundary_matrix(ops), DenseMatrix(N + 1, N + 2)) == doctest::Approx(1.0));
      CHECK(ops.M.front() > 0.0);
      CHECK(*std::min_element(ops.Mhat.begin(), ops.Mhat.end()) > 0.0);
      const VerificationReport r = verify_operator_set(ops);
      CHECK(r.max_residual() <= 1e-13 * N);
      CHECK(r.first_failure(1e-11).empty());
      CHECK(r.min_sv_p > 0.0);
      CHECK(r.min_sv_phat > 0.0);
    }
  }
}

TEST_CASE("mirrored closures") {
  const int N = 24;
  const OperatorSet1D ops = instantiate(default_table(), N);
  for (int i = 0; i < 4; ++i) {
    CHECK(ops.M[i] == ops.M[N - i]);
    CHECK(ops.Mhat[i] == ops.Mhat[N + 1 - i]);
    for (int j = 0; j < 6; ++j) {
      CHECK(ops.D.at(i, j) == doctest::Approx(-ops.D.at(N - i, N + 1 - j)));
      CHECK(ops.P.at(i, j) == doctest::Approx(ops.P.at(N - i, N + 1 - j)));
    }
  }
}

TEST_CASE("periodic operators are interior stencils with M = h I") {
  const int N = 16;
  const OperatorSet1D ops = instantiate(default_table(), N, true);
  CHECK(ops.n_nodes() == 16);
  CHECK(ops.n_cells() == 16);
  for (double m : ops.M) CHECK(m == doctest::Approx(1.0 / N));
  for (double m : ops.Mhat) CHECK(m == doctest::Approx(1.0 / N));
  CHECK(ops.D.at(0, 14) * ops.h == doctest::Approx(1.0 / 24));
  CHECK(ops.D.at(0, 15) * ops.h == doctest::Approx(-27.0 / 24));
  CHECK(ops.D.at(0, 1) * ops.h == doctest::Approx(-1.0 / 24));
  CHECK(ops.P.at(0, 1) == doctest::Approx(-1.0 / 16));
  const Eigen::MatrixXd M = oracle::diag_vec(ops.M).asDiagonal();
  const Eigen::MatrixXd Mh = oracle::diag_vec(ops.Mhat).asDiagonal();
  const Eigen::MatrixXd D = oracle::to_eigen(ops.D), Dh = oracle::to_eigen(ops.Dhat);
  CHECK((M * D + Dh.transpose() * Mh).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(verify_operator_set(ops).first_failure(1e-11).empty());
}

TEST_CASE("Dhat differentiates squared nodes exactly") {
  const OperatorSet1D ops = instantiate(default_table(), 32);
  Vec xi(ops.n_nodes());
  for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = ops.grid.nodes[i] * ops.grid.nodes[i];
  const Vec d = ops.Dhat * xi;
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i] == doctest::Approx(2.0 * ops.grid.cells[i]).epsilon(1e-12));
}

TEST_CASE("perturbed closure is reported") {
  CoefficientTable t = default_table();
  t.closure_d[0][0] += 1e-3;
  const VerificationReport r = verify_operator_set(instantiate(t, 32));
  CHECK(r.sbp_difference == doctest::Approx(1e-3 * t.m_weights[0]).epsilon(1e-6));
  CHECK(r.first_failure(1e-11) == "sbp_difference");
}

TEST_CASE("non-positive norm weight is rejected") {
  CoefficientTable t = default_table();
  t.m_weights[1] = -0.1;
  CHECK_THROWS_AS(instantiate(t, 16), ConfigError);
}

TEST_CASE("smooth function convergence rates") {
  double prev_int = 0.0, prev_bnd = 0.0;
  std::vector<double> q_int, q_bnd;
  for (int N : {32, 64, 128, 256}) {
    const OperatorSet1D ops = instantiate(default_table(), N);
    Vec u(ops.n_cells());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::sin(3.0 * ops.grid.cells[i]);
    const Vec du = ops.D * u;
    double ei = 0.0, eb = 0.0;
    for (std::size_t i = 0; i < du.size(); ++i) {
      const double e = std::abs(du[i] - 3.0 * std::cos(3.0 * ops.grid.nodes[i]));
      if (i < 4 || i + 4 >= du.size()) eb = std::max(eb, e);
      else ei = std::max(ei, e);
    }
    if (prev_int > 0.0) {
      q_int.push_back(std::log2(prev_int / ei));
      q_bnd.push_back(std::log2(prev_bnd / eb));
    }
    prev_int = ei;
    prev_bnd = eb;
  }
  for (double q : q_int) CHECK(std::abs(q - 4.0) <= 0.5);
  for (double q : q_bnd) CHECK(std::abs(q - 2.0) <= 0.5);
}

TEST_CASE("interpolation norm") {
  for (std::string name : {"accuracy", "min_norm", "max_norm"}) {
    CAPTURE(name);
    const OperatorSet1D ops = instantiate(builtin_table(name), 64);
    const double power = interpolation_norm(ops);
    CHECK(power >= 1.0 - 1e-12);
    CHECK(power == doctest::Approx(interpolation_norm_dense(ops)).epsilon(1e-8));
    const Eigen::MatrixXd PPh = oracle::to_eigen(ops.P) * oracle::to_eigen(ops.Phat);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(PPh.rows());
    CHECK((PPh * ones - ones).cwiseAbs().maxCoeff() <= 1e-13);
    const double lmax = PPh.eigenvalues().real().maxCoeff();
    CHECK(lmax >= 1.0 - 1e-12);
    CHECK(lmax <= power + 1e-12);
  }
  CHECK(interpolation_norm(instantiate(builtin_table("min_norm"), 64)) <= 1.1);
  CHECK(interpolation_norm(instantiate(builtin_table("max_norm"), 64)) >= 8.0);
  CHECK(interpolation_norm(instantiate(builtin_table("accuracy"), 64)) == doctest::Approx(1.04).epsilon(1e-3));
}

TEST_CASE("table JSON round trip") {
  const CoefficientTable t = default_table();
  const CoefficientTable u = table_from_json(table_to_json(t));
  CHECK(u.closure_d == t.closure_d);
  CHECK(u.closure_phat == t.closure_phat);
  CHECK(u.m_weights == t.m_weights);
  CHECK(u.interior_p == t.interior_p);
  const auto path = std::filesystem::temp_directory_path() / "sbp_table_roundtrip.json";
  save_table(t, path.string());
  CHECK(load_table(path.string()).mhat_weights == t.mhat_weights);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(table_from_json("{\"interior_d\": 3}"), ConfigError);
  CHECK_THROWS_AS(table_from_json("not json"), ConfigError);
}

TEST_CASE("Nelder-Mead on the Rosenbrock valley") {
  auto f = [](const std::vector<double>& x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  const NelderMeadResult r = nelder_mead(f, {-1.2, 1.0}, 0.5, 5000, 1e-16);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("constructed accuracy table") {
  ConstructOptions o;
  o.objective = Objective::Accuracy;
  const ConstructionResult r = construct_operator_set(2, o);
  CHECK(r.free_d == 2);
  CHECK(r.weight_free_d == 1);
  CHECK(r.free_p == 4);
  CHECK(r.norm_PPhat <= 1.04 + 1e-6);
  for (int N : {16, 32, 64}) CHECK(verify_operator_set(instantiate(r.table, N)).first_failure(1e-11).empty());
  const OperatorSet1D ops = instantiate(r.table, 32);
  const Vec one(ops.n_cells(), 1.0);
  for (double v : ops.P * one) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  const CoefficientTable& shipped = builtin_table("accuracy");
  for (std::size_t i = 0; i < 4; ++i) CHECK(r.table.m_weights[i] == doctest::Approx(shipped.m_weights[i]).epsilon(1e-8));
}

TEST_CASE("constructed norm extremes") {
  ConstructOptions o;
  o.objective = Objective::MinNorm;
  const ConstructionResult lo = construct_operator_set(2, o);
  CHECK(lo.norm_PPhat <= 1.1);
  CHECK(lo.warnings.empty());
  o.objective = Objective::MaxNorm;
  const ConstructionResult hi = construct_operator_set(2, o);
  CHECK(hi.norm_PPhat >= 8.0);
  for (const ConstructionResult* r : {&lo, &hi})
    CHECK(verify_operator_set(instantiate(r->table, 32)).first_failure(1e-11).empty());
  CHECK_THROWS_AS(construct_operator_set(3), ConfigError);
}
