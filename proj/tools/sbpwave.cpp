#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sbp/analysis.hpp"
#include "sbp/bench.hpp"
#include "sbp/construct.hpp"
#include "sbp/errors.hpp"
#include "sbp/io.hpp"
#include "sbp/stability.hpp"
#include "sbp/verify.hpp"

namespace {

using nlohmann::json;
using namespace sbp;

constexpr int kExitVerification = 2;
constexpr int kExitInstability = 3;
constexpr int kExitConfig = 4;

// Machine-readable result: to --out when given, otherwise after the summary on stdout.
void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(out);
  if (!f) throw ConfigError("cannot write '" + out + "'");
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
  std::cout << "wrote " << out << "\n";
}

json load_preset(const std::string& name) {
  std::string path = name;
  if (!std::filesystem::exists(path)) {
    const char* env = std::getenv("SBP_PRESET_DIR");
    path = std::string(env && *env ? env : SBP_PRESET_DIR) + "/" + name + ".json";
  }
  std::ifstream in(path);
  if (!in) throw ConfigError("unknown preset '" + name + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("malformed preset '" + path + "': " + e.what());
  }
}

void check_preset_command(const json& p, const std::string& cmd) {
  if (p.contains("command") && p["command"] != cmd)
    throw ConfigError("preset is for '" + p["command"].get<std::string>() + "', not '" + cmd + "'");
}

// Coefficient source shared by ops-verify and ops-norm.
struct CoeffSource {
  std::string coefficients = "default";
  std::string construct;
  std::string save;

  void add(CLI::App* app) {
    app->add_option("--coefficients", coefficients, "builtin table (default, accuracy, min_norm, max_norm) or JSON path");
    app->add_option("--construct", construct, "construct a table: min_norm, max_norm or accuracy");
    app->add_option("--save", save, "write the table used to this path");
  }

  CoefficientTable table(json& meta) const {
    CoefficientTable t;
    if (!construct.empty()) {
      ConstructOptions o;
      o.objective = parse_objective(construct);
      const ConstructionResult r = construct_operator_set(2, o);
      t = r.table;
      meta["construct"] = {{"objective", construct},
                           {"norm_PPhat", r.norm_PPhat},
                           {"free_d", r.free_d},
                           {"weight_free_d", r.weight_free_d},
                           {"free_p", r.free_p},
                           {"residual_d3", r.residual_d3},
                           {"evaluations", r.evaluations},
                           {"warnings", r.warnings},
                           {"table", json::parse(table_to_json(t))}};
      for (const auto& w : r.warnings) std::cout << "warning: " << w << "\n";
      std::cout << "constructed " << construct << " table, |PPhat|_2 = " << r.norm_PPhat << "\n";
    } else {
      t = load_coefficients(coefficients);
    }
    if (!save.empty()) save_table(t, save);
    return t;
  }
};

// Flags that populate a SolverConfig.
struct ConfigFlags {
  std::string config, mapping, tensor, formulation, method, stage, coefficients;
  int n = 0, n1 = 0, n2 = 0;
  double T = -1.0, cfl = -1.0, dt = -1.0;
  bool periodic1 = false, periodic2 = false, skip_check = false;

  void add(CLI::App* app) {
    app->add_option("--config", config, "SolverConfig JSON (inline or path)");
    app->add_option("--mapping", mapping, "mapping kind, inline JSON or path");
    app->add_option("--N", n, "cells per direction");
    app->add_option("--n1", n1, "cells in r1");
    app->add_option("--n2", n2, "cells in r2");
    app->add_option("--tensor", tensor, "G or Gtilde");
    app->add_option("--formulation", formulation, "covariant or cartesian");
    app->add_option("--metric-method", method, "analytic or sbp");
    app->add_option("--stage-data", stage, "carpenter, taylor or naive");
    app->add_option("--coefficients", coefficients, "coefficient table name or path");
    app->add_option("--T", T, "final time");
    app->add_option("--cfl", cfl, "CFL number for the automatic time step");
    app->add_option("--dt", dt, "time step");
    app->add_flag("--periodic1", periodic1, "periodic in r1");
    app->add_flag("--periodic2", periodic2, "periodic in r2");
    app->add_flag("--skip-stability-check", skip_check, "run the modified tensor without the point-wise precheck");
  }

  void apply(SolverConfig& c) const {
    if (!config.empty()) apply_config_json(c, config.front() == '{' ? config : solver_config_json_file(config));
    if (!mapping.empty()) c.mapping = mapping_from_json(mapping);
    if (n > 0) c.n1 = c.n2 = n;
    if (n1 > 0) c.n1 = n1;
    if (n2 > 0) c.n2 = n2;
    if (!tensor.empty()) c.variant = parse_metric_variant(tensor);
    if (!formulation.empty()) c.formulation = parse_formulation(formulation);
    if (!method.empty()) c.metric_method = parse_metric_method(method);
    if (!stage.empty()) c.stage_data = parse_stage_data(stage);
    if (!coefficients.empty()) c.table = load_coefficients(coefficients);
    if (T >= 0.0) c.T = T;
    if (cfl > 0.0) c.cfl = cfl;
    if (dt > 0.0) c.dt = dt;
    if (periodic1) c.periodic1 = true;
    if (periodic2) c.periodic2 = true;
    if (skip_check) c.skip_stability_check = true;
  }

  static std::string solver_config_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read solver configuration '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
};

std::vector<int> parse_levels(const std::string& s) {
  std::vector<int> out;
  if (const auto dots = s.find(".."); dots != std::string::npos) {
    const int lo = std::stoi(s.substr(0, dots)), hi = std::stoi(s.substr(dots + 2));
    if (lo < 1 || hi < lo) throw ConfigError("bad level range '" + s + "'");
    for (int n = lo; n <= hi; n *= 2) out.push_back(n);
    return out;
  }
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) out.push_back(std::stoi(tok));
  return out;
}

json norms_json(const FieldNorms& e) {
  return {{"l2", {{"p", e.l2[0]}, {"v1", e.l2[1]}, {"v2", e.l2[2]}}},
          {"linf", {{"p", e.linf[0]}, {"v1", e.linf[1]}, {"v2", e.linf[2]}}},
          {"sum_l2", e.sum_l2()},
          {"sum_linf", e.sum_linf()}};
}

json slice_json(const CharacteristicSlice& s) {
  return {{"r2", s.r2},           {"err_v1", s.err_v1},       {"err_v2", s.err_v2},
          {"err_p", s.err_p},     {"err_c_l2", s.err_c_l2},   {"err_c_inf", s.err_c_inf},
          {"err_nc_l2", s.err_nc_l2}, {"err_nc_inf", s.err_nc_inf}};
}

// ---------------------------------------------------------------- subcommands

int cmd_ops_verify(const CoeffSource& src, const std::string& nlist, bool periodic, const std::string& out) {
  json meta;
  const CoefficientTable t = src.table(meta);
  json rep = meta;
  rep["reports"] = json::array();
  bool ok = true;
  for (int N : parse_levels(nlist)) {
    const VerificationReport r = verify_operator_set(instantiate(t, N, periodic));
    const std::string fail = r.first_failure(1e-11);
    std::cout << "N=" << N << " max residual " << r.max_residual() << (fail.empty() ? " ok" : " FAIL: " + fail) << "\n";
    json j = json::parse(r.to_json());
    j["failure"] = fail;
    rep["reports"].push_back(j);
    ok = ok && fail.empty();
  }
  rep["passed"] = ok;
  emit(out, rep.dump(2));
  return ok ? 0 : kExitVerification;
}

int cmd_ops_norm(const CoeffSource& src, const std::string& nlist, const std::string& out) {
  json meta;
  const CoefficientTable t = src.table(meta);
  json rep = meta;
  rep["norms"] = json::array();
  for (int N : parse_levels(nlist)) {
    const OperatorSet1D ops = instantiate(t, N);
    int its = 0;
    const double power = interpolation_norm(ops, 1e-10, 100000, &its);
    json row{{"N", N}, {"power", power}, {"iterations", its}};
    if (N <= 256) row["dense"] = interpolation_norm_dense(ops);
    std::cout << "N=" << N << " |PPhat|_2 = " << power << "\n";
    rep["norms"].push_back(row);
  }
  emit(out, rep.dump(2));
  return 0;
}

int cmd_grid_metrics(const ConfigFlags& flags, const std::string& dump, const std::string& out) {
  SolverConfig c;
  flags.apply(c);
  const CoefficientTable& table = c.table.closure_d.empty() ? default_table() : c.table;
  const StaggeredGrid2D g(table, c.n1, c.n2, c.periodic1, c.periodic2);
  const MetricFields m = build_metric_fields(c.mapping, g, c.metric_method);
  json rep{{"mapping", json::parse(mapping_to_json(m.mapping))}, {"method", to_string(m.method)}, {"n1", c.n1}, {"n2", c.n2}};
  for (Location loc : {Location::Cell, Location::Edge1, Location::Edge2}) {
    const LocationMetrics& lm = m.at(loc);
    double jmin = INFINITY, jmax = 0.0, skew = 0.0;
    for (std::size_t k = 0; k < lm.J.size(); ++k) {
      jmin = std::min(jmin, lm.J[k]);
      jmax = std::max(jmax, lm.J[k]);
      skew = std::max(skew, std::abs(lm.gu12[k]) / std::sqrt(lm.gu11[k] * lm.gu22[k]));
    }
    rep[to_string(loc)] = {{"J_min", jmin}, {"J_max", jmax}, {"max_contravariant_cosine", skew}, {"points", lm.J.size()}};
    std::cout << to_string(loc) << ": J in [" << jmin << ", " << jmax << "], max |g12|/sqrt(g11 g22) = " << skew << "\n";
    if (!dump.empty()) {
      auto write = [&](const char* name, const Vec& v) {
        GridFunction f(g, loc);
        f.values = v;
        write_field_dump(dump + "_" + to_string(loc) + "_" + name, f, 0.0);
      };
      write("x", lm.x);
      write("y", lm.y);
      write("J", lm.J);
      write("g11", lm.g11);
      write("g12", lm.g12);
      write("g22", lm.g22);
      write("gu11", lm.gu11);
      write("gu12", lm.gu12);
      write("gu22", lm.gu22);
    }
  }
  emit(out, rep.dump(2));
  return 0;
}

int cmd_stability_check(const ConfigFlags& flags, bool direct, const std::string& out) {
  SolverConfig c;
  flags.apply(c);
  const CoefficientTable& table = c.table.closure_d.empty() ? default_table() : c.table;
  auto g = std::make_shared<const StaggeredGrid2D>(table, c.n1, c.n2, c.periodic1, c.periodic2);
  auto m = std::make_shared<const MetricFields>(build_metric_fields(c.mapping, *g, c.metric_method));
  StabilityReport rep = stability_check(*m, *g);
  if (direct) {
    auto ops = std::make_shared<const Operators2D>(*g);
    rep.direct_min = direct_min_eigenvalue(MetricTensorOp(g, ops, m, c.variant));
  }
  std::cout << "alpha = " << rep.alpha << ", beta = " << rep.beta << ", min eig C = " << rep.min_eig_C << ", verdict "
            << rep.verdict() << "\n";
  if (rep.direct_min) std::cout << "direct min eig HJG (" << to_string(c.variant) << ") = " << *rep.direct_min << "\n";
  emit(out, rep.to_json());
  return 0;
}

int cmd_stability_sweep(const std::string& preset, std::vector<std::string> tables, std::string gammas, int n,
                        std::string method, bool critical, double gamma_max, const std::string& out) {
  json p = json::object();
  if (!preset.empty()) {
    p = load_preset(preset);
    check_preset_command(p, "stability-sweep");
  }
  if (tables.empty()) tables = p.value("tables", std::vector<std::string>{"accuracy", "max_norm"});
  if (n <= 0) n = p.value("N", 16);
  if (method.empty()) method = p.value("metric_method", std::string("sbp"));
  if (!critical) critical = p.value("critical", false);
  if (gamma_max <= 0.0) gamma_max = p.value("gamma_max", 5.0);
  std::vector<double> gs;
  if (!gammas.empty()) {
    std::stringstream ss(gammas);
    for (std::string tok; std::getline(ss, tok, ',');) gs.push_back(std::stod(tok));
  } else if (p.contains("gammas")) {
    gs = p["gammas"].get<std::vector<double>>();
  }
  const MetricMethod mm = parse_metric_method(method);
  std::vector<CoefficientTable> ts;
  for (const auto& t : tables) ts.push_back(load_coefficients(t));

  if (critical) {
    json rep = json::array();
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const double nrm = interpolation_norm(instantiate(ts[k], n));
      const double gd = critical_gamma_direct(ts[k], n, 0.0, gamma_max, 1e-3, mm);
      const double gb = critical_gamma_bound(ts[k], n, 0.0, gamma_max, 1e-4, mm);
      std::cout << tables[k] << " (|PPhat|_2 = " << nrm << "): critical gamma direct " << gd << ", bound " << gb << "\n";
      rep.push_back({{"table", tables[k]}, {"norm_PPhat", nrm}, {"critical_gamma_direct", gd}, {"critical_gamma_bound", gb}});
    }
    if (gs.empty()) {
      emit(out, rep.dump(2));
      return 0;
    }
    std::cout << rep.dump(2) << "\n";
  }
  if (gs.empty()) throw ConfigError("stability-sweep: no gamma values (use --gammas or --critical)");
  const std::vector<SweepRow> rows = gamma_sweep(gs, ts, n, mm);
  std::size_t indefinite = 0;
  for (const SweepRow& r : rows) indefinite += r.lambda_min_direct <= 0.0;
  std::cout << rows.size() << " sweep points, " << indefinite << " with an indefinite kinetic energy matrix\n";
  emit(out, sweep_csv(rows));
  return 0;
}

int cmd_solve_mms(const std::string& preset, const ConfigFlags& flags, bool slice, const std::string& dump,
                  const std::string& out) {
  SolverConfig c;
  c.mapping = MappingSpec::tfi();
  if (!preset.empty()) {
    const json p = load_preset(preset);
    if (p.contains("config")) apply_config_json(c, p["config"].dump());
    slice = slice || p.value("slice", false);
  }
  flags.apply(c);
  const Discretization d(c);
  const RunResult r = run(d, mms_state(d, 0.0), mms_boundary_data(d));
  const State exact = mms_state(d, r.final_state.t);
  const FieldNorms e = error_norms(d, r.final_state, exact);
  json rep{{"config", json::parse(solver_config_to_json(c))}, {"dt", r.dt}, {"steps", r.steps}, {"errors", norms_json(e)}};
  if (slice) rep["slice"] = slice_json(characteristic_errors(d, r.final_state, exact));
  if (!dump.empty()) write_state_dump(dump, d.grid(), r.final_state);
  std::cout << "n1=" << c.n1 << " n2=" << c.n2 << " steps=" << r.steps << " dt=" << r.dt << " |Err|_h=" << e.sum_l2()
            << " |Err|_inf=" << e.sum_linf() << "\n";
  emit(out, rep.dump(2));
  return 0;
}

int cmd_solve_converge(const std::string& preset, const ConfigFlags& flags, std::string levels_s,
                       std::vector<std::string> tensors, std::vector<std::string> forms, int n2_ratio, double dt_coarse,
                       bool slice, int jobs, const std::string& out) {
  SolverConfig base;
  base.mapping = MappingSpec::tfi();
  json p = json::object();
  if (!preset.empty()) {
    p = load_preset(preset);
    check_preset_command(p, "solve-converge");
    if (p.contains("config")) apply_config_json(base, p["config"].dump());
  }
  flags.apply(base);
  std::vector<int> levels;
  if (!levels_s.empty()) levels = parse_levels(levels_s);
  else levels = p.value("levels", std::vector<int>{16, 32, 64, 128});
  if (tensors.empty()) tensors = p.value("tensors", std::vector<std::string>{to_string(base.variant)});
  if (forms.empty()) forms = p.value("formulations", std::vector<std::string>{to_string(base.formulation)});
  if (n2_ratio <= 0) n2_ratio = p.value("n2_ratio", 1);
  if (dt_coarse <= 0.0) dt_coarse = p.value("dt_coarse", 0.0);
  slice = slice || p.value("slice", false);

  std::ostringstream csv;
  bool header = false;
  for (const auto& f : forms)
    for (const auto& t : tensors) {
      SolverConfig c = base;
      c.formulation = parse_formulation(f);
      c.variant = parse_metric_variant(t);
      const std::string label = to_string(c.formulation) + "_" + to_string(c.variant);
      const ConvergenceStudy st = run_convergence(c, levels, n2_ratio, dt_coarse, slice, jobs);
      if (!header) {
        csv << "label,N,n2,dt,err_l2,err_inf,q_l2,q_inf,p_l2,v1_l2,v2_l2";
        if (slice) csv << ",err_c_l2,err_nc_l2,q_c,q_nc";
        csv << "\n";
        header = true;
      }
      std::cout << label << "\n";
      for (std::size_t k = 0; k < st.table.rows.size(); ++k) {
        const ErrorRow& r = st.table.rows[k];
        const MmsResult& m = st.runs[k];
        char buf[512];
        std::snprintf(buf, sizeof buf, "%s,%d,%d,%.6g,%.6e,%.6e,%.4f,%.4f,%.6e,%.6e,%.6e", label.c_str(), r.n, m.n2, m.dt,
                      r.err.sum_l2(), r.err.sum_linf(), r.q_l2, r.q_inf, r.err.l2[0], r.err.l2[1], r.err.l2[2]);
        csv << buf;
        if (slice) {
          const double qc = k ? rate(st.runs[k - 1].slice.err_c_l2, m.slice.err_c_l2) : NAN;
          const double qn = k ? rate(st.runs[k - 1].slice.err_nc_l2, m.slice.err_nc_l2) : NAN;
          std::snprintf(buf, sizeof buf, ",%.6e,%.6e,%.4f,%.4f", m.slice.err_c_l2, m.slice.err_nc_l2, qc, qn);
          csv << buf;
        }
        csv << "\n";
        std::printf("  N=%-5d |Err|_h=%.3e q_h=%6.2f |Err|_inf=%.3e q_inf=%6.2f\n", r.n, r.err.sum_l2(), r.q_l2,
                    r.err.sum_linf(), r.q_inf);
        if (slice)
          std::printf("           slice: c=%.3e nc=%.3e\n", m.slice.err_c_l2, m.slice.err_nc_l2);
      }
    }
  emit(out, csv.str());
  return 0;
}

int cmd_solve_source(const std::string& preset, const ConfigFlags& flags, std::string levels_s, int ref_level,
                     const std::string& receiver_csv, const std::string& dump, const std::string& out) {
  json p = json::object();
  if (!preset.empty()) {
    p = load_preset(preset);
    check_preset_command(p, "solve-source");
  }
  SolverConfig base = point_source_config(0);
  if (p.contains("config")) apply_config_json(base, p["config"].dump());
  flags.apply(base);
  const double dt0 = p.value("dt_coarse", base.dt > 0.0 ? base.dt : 0.03125);
  std::vector<int> levels;
  if (!levels_s.empty()) {
    std::stringstream ss(levels_s);
    for (std::string tok; std::getline(ss, tok, ',');) levels.push_back(std::stoi(tok));
  } else {
    levels = p.value("levels", std::vector<int>{0});
  }
  if (ref_level < 0) ref_level = p.value("reference_level", -1);
  auto at_level = [&](int l) {
    SolverConfig c = base;
    c.n1 = base.n1 << l;
    c.n2 = base.n2 << l;
    c.dt = dt0 / static_cast<double>(1 << l);
    return c;
  };
  json rep{{"config", json::parse(solver_config_to_json(base))}, {"levels", json::array()}};
  std::vector<RunResult> runs;
  for (int l : levels) {
    const SolverConfig c = at_level(l);
    runs.push_back(run_point_source(c));
    const RunResult& r = runs.back();
    double peak = 0.0;
    for (double v : r.receivers.empty() ? Vec{} : r.receivers[0].p) peak = std::max(peak, std::abs(v));
    json lj{{"level", l}, {"n1", c.n1}, {"n2", c.n2}, {"dt", r.dt}, {"steps", r.steps}, {"peak_p", peak}};
    if (!r.receivers.empty())
      lj["pre_arrival_oscillation_p"] = pre_arrival_oscillation(r.times, r.receivers[0].p, pre_arrival_end(c));
    rep["levels"].push_back(lj);
    std::cout << "level " << l << ": " << c.n1 << "x" << c.n2 << ", " << r.steps << " steps, peak |p| at receiver " << peak << "\n";
    if (!receiver_csv.empty())
      for (std::size_t k = 0; k < r.receivers.size(); ++k)
        write_receiver_csv(receiver_csv + "_L" + std::to_string(l) + "_r" + std::to_string(k) + ".csv", r.times, r.receivers[k]);
    if (!dump.empty()) write_state_dump(dump + "_L" + std::to_string(l), Discretization(c).grid(), r.final_state);
  }
  if (ref_level >= 0) {
    const RunResult ref = run_point_source(at_level(ref_level));
    json errs = json::array();
    TraceError prev{};
    for (std::size_t k = 0; k < levels.size(); ++k) {
      const TraceError e = receiver_error(runs[k], ref);
      json ej{{"level", levels[k]}, {"p", e.p}, {"v1", e.v1}, {"v2", e.v2}};
      if (k) ej["q"] = {{"p", rate(prev.p, e.p)}, {"v1", rate(prev.v1, e.v1)}, {"v2", rate(prev.v2, e.v2)}};
      std::printf("level %d vs level %d: |dp|=%.3e |dv1|=%.3e |dv2|=%.3e\n", levels[k], ref_level, e.p, e.v1, e.v2);
      errs.push_back(ej);
      prev = e;
    }
    rep["reference_level"] = ref_level;
    rep["errors"] = errs;
  }
  emit(out, rep.dump(2));
  return 0;
}

int cmd_bench(int n1, int n2, const std::string& impl, int reps, const std::string& out) {
  std::vector<RhsImpl> impls;
  if (impl == "both") impls = {RhsImpl::MatrixFree, RhsImpl::Assembled};
  else impls = {parse_rhs_impl(impl)};
  const BenchReport r = bench_apply(n1, n2, impls, reps);
  std::cout << n1 << "x" << n2 << " cells, " << r.unknowns << " unknowns, implementations agree to " << r.max_rel_diff << "\n";
  for (const BenchTiming& t : r.timings)
    std::printf("  %-12s %.4e s per RHS, %.3e unknowns/s\n", to_string(t.impl).c_str(), t.seconds_per_apply,
                t.unknowns_per_second);
  emit(out, r.to_json());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Staggered summation-by-parts acoustic wave solver on curvilinear grids"};
  app.require_subcommand(1);
  std::string out;

  CoeffSource vsrc, nsrc;
  std::string vN = "16,32,64", nN = "16,32,64,128";
  bool vperiodic = false;
  auto* verify = app.add_subcommand("ops-verify", "check SBP identities, exactness and quadrature");
  vsrc.add(verify);
  verify->add_option("--N", vN, "comma-separated resolutions or N0..Nk");
  verify->add_flag("--periodic", vperiodic, "check the periodic operators");
  verify->add_option("--out", out, "result file (JSON)");

  auto* norm = app.add_subcommand("ops-norm", "spectral norm of P Phat");
  nsrc.add(norm);
  norm->add_option("--N", nN, "comma-separated resolutions or N0..Nk");
  norm->add_option("--out", out, "result file (JSON)");

  ConfigFlags gflags, sflags, mflags, cflags, pflags;
  std::string gdump;
  auto* gm = app.add_subcommand("grid-metrics", "metric fields of a mapping");
  gflags.add(gm);
  gm->add_option("--dump", gdump, "field dump prefix");
  gm->add_option("--out", out, "result file (JSON)");

  bool sdirect = false;
  auto* sc = app.add_subcommand("stability-check", "line bounds and point-wise definiteness test");
  sflags.add(sc);
  sc->add_flag("--direct", sdirect, "also compute the smallest eigenvalue of HJG densely");
  sc->add_option("--out", out, "result file (JSON)");

  std::string swpreset, swgammas, swmethod;
  std::vector<std::string> swtables;
  int swN = 0;
  bool swcritical = false;
  double swmax = 0.0;
  auto* sw = app.add_subcommand("stability-sweep", "Gaussian hill amplitude sweep");
  sw->add_option("--preset", swpreset, "fig3, fig4 or a preset path");
  sw->add_option("--tables", swtables, "coefficient tables")->delimiter(',');
  sw->add_option("--gammas", swgammas, "comma-separated amplitudes");
  sw->add_option("--N", swN, "cells per direction (default 16)");
  sw->add_option("--metric-method", swmethod, "analytic or sbp");
  sw->add_flag("--critical", swcritical, "bisect for the critical amplitudes");
  sw->add_option("--gamma-max", swmax, "upper end of the bisection interval");
  sw->add_option("--out", out, "result file (CSV or JSON)");

  std::string mpreset, mdump;
  bool mslice = false;
  auto* mms = app.add_subcommand("solve-mms", "one manufactured-solution run");
  mms->add_option("--preset", mpreset, "preset supplying the configuration");
  mflags.add(mms);
  mms->add_flag("--slice", mslice, "characteristic errors at the bottom boundary");
  mms->add_option("--dump", mdump, "field dump prefix for the final state");
  mms->add_option("--out", out, "result file (JSON)");

  std::string cpreset, clevels;
  std::vector<std::string> ctensors, cforms;
  int cratio = 0, cjobs = 1;
  double cdt = 0.0;
  bool cslice = false;
  auto* conv = app.add_subcommand("solve-converge", "manufactured-solution convergence study");
  conv->add_option("--preset", cpreset, "table1, table2, table3 or a preset path");
  cflags.add(conv);
  conv->add_option("--levels", clevels, "N0..Nk or a comma-separated list");
  conv->add_option("--tensors", ctensors, "G, Gtilde")->delimiter(',');
  conv->add_option("--formulations", cforms, "covariant, cartesian")->delimiter(',');
  conv->add_option("--n2-ratio", cratio, "n2 = ratio * n1");
  conv->add_option("--dt-coarse", cdt, "time step on the coarsest level, halved per level");
  conv->add_flag("--slice", cslice, "characteristic slice errors");
  conv->add_option("--jobs", cjobs, "levels run in parallel");
  conv->add_option("--out", out, "result file (CSV)");

  std::string ppreset, plevels, pcsv, pdump;
  int pref = -1;
  auto* src = app.add_subcommand("solve-source", "point source on the curved top boundary");
  src->add_option("--preset", ppreset, "table4 or a preset path");
  pflags.add(src);
  src->add_option("--levels", plevels, "refinement levels, comma-separated");
  src->add_option("--reference-level", pref, "level of the reference solution");
  src->add_option("--receiver-csv", pcsv, "prefix for receiver series CSV files");
  src->add_option("--dump", pdump, "field dump prefix for final states");
  src->add_option("--out", out, "result file (JSON)");

  int bn1 = 1024, bn2 = 512, breps = 10;
  std::string bimpl = "both";
  auto* bench = app.add_subcommand("bench-apply", "matrix-free against assembled RHS throughput");
  bench->add_option("--n1", bn1, "cells in r1");
  bench->add_option("--n2", bn2, "cells in r2");
  bench->add_option("--impl", bimpl, "matrix-free, assembled or both");
  bench->add_option("--reps", breps, "applications timed");
  bench->add_option("--out", out, "result file (JSON)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*verify) return cmd_ops_verify(vsrc, vN, vperiodic, out);
    if (*norm) return cmd_ops_norm(nsrc, nN, out);
    if (*gm) return cmd_grid_metrics(gflags, gdump, out);
    if (*sc) return cmd_stability_check(sflags, sdirect, out);
    if (*sw) return cmd_stability_sweep(swpreset, swtables, swgammas, swN, swmethod, swcritical, swmax, out);
    if (*mms) return cmd_solve_mms(mpreset, mflags, mslice, mdump, out);
    if (*conv) return cmd_solve_converge(cpreset, cflags, clevels, ctensors, cforms, cratio, cdt, cslice, cjobs, out);
    if (*src) return cmd_solve_source(ppreset, pflags, plevels, pref, pcsv, pdump, out);
    if (*bench) return cmd_bench(bn1, bn2, bimpl, breps, out);
  } catch (const InstabilityError& e) {
    std::cerr << "instability: " << e.what() << " (step " << e.step() << ")\n";
    return kExitInstability;
  } catch (const VerificationError& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return kExitVerification;
  } catch (const ConvergenceError& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return kExitVerification;
  } catch (const ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SingularMappingError& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
