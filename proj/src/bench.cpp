#include "sbp/bench.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "json.hpp"
#include "sbp/errors.hpp"

namespace sbp {

std::string to_string(RhsImpl impl) { return impl == RhsImpl::MatrixFree ? "matrix-free" : "assembled"; }

RhsImpl parse_rhs_impl(const std::string& name) {
  if (name == "matrix-free" || name == "matrix_free") return RhsImpl::MatrixFree;
  if (name == "assembled") return RhsImpl::Assembled;
  throw ConfigError("unknown implementation '" + name + "' (expected matrix-free or assembled)");
}

std::string BenchReport::to_json() const {
  nlohmann::json j{{"n1", n1}, {"n2", n2}, {"unknowns", unknowns}, {"max_rel_diff", max_rel_diff}};
  j["timings"] = nlohmann::json::array();
  for (const BenchTiming& t : timings)
    j["timings"].push_back({{"impl", to_string(t.impl)},
                            {"reps", t.reps},
                            {"seconds_per_apply", t.seconds_per_apply},
                            {"unknowns_per_second", t.unknowns_per_second},
                            {"operator_nnz", t.operator_nnz}});
  return j.dump(2);
}

namespace {

std::size_t stored_nnz(const Discretization& d) {
  const Operators2D& o = d.ops();
  std::size_t n = 0;
  for (const Operator2D* op : {&o.D1, &o.D2, &o.Dhat1, &o.Dhat2, &o.P1c, &o.Pc1, &o.P2c, &o.Pc2, &o.P12, &o.P21})
    n += op->stored_nnz();
  return n;
}

}  // namespace

BenchReport bench_apply(int n1, int n2, const std::vector<RhsImpl>& impls, int reps, double tol, unsigned seed) {
  if (reps < 1) throw ConfigError("bench_apply: reps must be at least 1");
  SolverConfig cfg;
  cfg.mapping = MappingSpec::gaussian_top();
  cfg.n1 = n1;
  cfg.n2 = n2;
  const Discretization free_d(cfg);
  cfg.assembled_operators = true;
  const Discretization asm_d(cfg);

  State s = free_d.zero_state();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Vec* v : {&s.p, &s.v1, &s.v2})
    for (double& x : *v) x = u(rng);

  BenchReport rep;
  rep.n1 = n1;
  rep.n2 = n2;
  rep.unknowns = s.p.size() + s.v1.size() + s.v2.size();
  State a, b;
  free_d.rhs(s, nullptr, a);
  asm_d.rhs(s, nullptr, b);
  double scale = 0.0, diff = 0.0;
  for (auto [x, y] : {std::pair{&a.p, &b.p}, std::pair{&a.v1, &b.v1}, std::pair{&a.v2, &b.v2}}) {
    scale = std::max(scale, max_abs(*x));
    diff = std::max(diff, max_abs_diff(*x, *y));
  }
  rep.max_rel_diff = scale > 0.0 ? diff / scale : diff;
  if (!(rep.max_rel_diff <= tol))
    throw VerificationError("bench_apply: implementations disagree (relative difference " + std::to_string(rep.max_rel_diff) + ")");

  for (RhsImpl impl : impls) {
    const Discretization& d = impl == RhsImpl::MatrixFree ? free_d : asm_d;
    State out;
    d.rhs(s, nullptr, out);
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) d.rhs(s, nullptr, out);
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
    BenchTiming t;
    t.impl = impl;
    t.reps = reps;
    t.seconds_per_apply = sec;
    t.unknowns_per_second = sec > 0.0 ? static_cast<double>(rep.unknowns) / sec : 0.0;
    t.operator_nnz = stored_nnz(d);
    rep.timings.push_back(t);
  }
  return rep;
}

}  // namespace sbp
