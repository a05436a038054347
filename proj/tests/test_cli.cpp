#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "sbp/io.hpp"
#include "sbp/metrics.hpp"
#include "sbp/operators1d.hpp"

using namespace sbp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result cli(const std::string& args) {
  const std::string cmd = std::string(SBP_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch() {
  const fs::path d = fs::temp_directory_path() / "sbpwave_cli_test";
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("usage errors map to exit code 4") {
  CHECK(cli("--help").code == 0);
  CHECK(cli("").code == 4);
  CHECK(cli("no-such-command").code == 4);
  CHECK(cli("ops-verify --N abc").code == 4);
  CHECK(cli("ops-verify --coefficients /nonexistent/table.json").code == 4);
  CHECK(cli("solve-mms --N 7").code == 4);
  CHECK(cli("solve-mms --mapping nowhere").code == 4);
  CHECK(cli("solve-converge --mapping tfi --levels 8,24 --T 0.01").code == 4);
}

TEST_CASE("ops-verify on the default table") {
  const fs::path out = scratch() / "verify.json";
  const Result r = cli("ops-verify --N 16,32 --out " + out.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("N=32") != std::string::npos);
  const json j = json::parse(slurp(out));
  CHECK(j["passed"] == true);
  REQUIRE(j["reports"].size() == 2);
  for (const json& rep : j["reports"]) CHECK(rep["max_residual"].get<double>() <= 1e-12);
  CHECK(cli("ops-verify --N 16 --periodic").code == 0);
}

TEST_CASE("ops-verify names a broken identity") {
  const fs::path dir = scratch();
  const Result saved = cli("ops-verify --construct min_norm --N 16 --save " + (dir / "mn.json").string());
  CHECK(saved.code == 0);
  CHECK(saved.out.find("1.0000") != std::string::npos);
  const CoefficientTable t = load_table((dir / "mn.json").string());
  CHECK(interpolation_norm(instantiate(t, 64)) <= 1.1);
  save_table(t, (dir / "mn2.json").string());
  CHECK(slurp(dir / "mn.json") == slurp(dir / "mn2.json"));
  CHECK(load_table((dir / "mn2.json").string()).closure_d == t.closure_d);

  CoefficientTable bad = t;
  bad.closure_d[0][0] += 1e-3;
  save_table(bad, (dir / "bad.json").string());
  const Result r = cli("ops-verify --coefficients " + (dir / "bad.json").string() + " --N 16");
  CHECK(r.code == 2);
  CHECK(r.out.find("sbp_difference") != std::string::npos);
}

TEST_CASE("ops-norm reports the interpolation norm") {
  const fs::path out = scratch() / "norm.json";
  const Result r = cli("ops-norm --coefficients max_norm --N 32 --out " + out.string());
  CHECK(r.code == 0);
  const json j = json::parse(slurp(out));
  const double nrm = j["norms"][0]["power"].get<double>();
  CHECK(nrm == doctest::Approx(j["norms"][0]["dense"].get<double>()).epsilon(1e-9));
  CHECK(nrm == doctest::Approx(interpolation_norm(instantiate(builtin_table("max_norm"), 32))).epsilon(1e-12));
}

TEST_CASE("grid-metrics dumps the sampled fields") {
  const fs::path base = scratch() / "tfi";
  const Result r = cli("grid-metrics --mapping tfi --N 8 --metric-method sbp --dump " + base.string());
  CHECK(r.code == 0);
  const StaggeredGrid2D g(default_table(), 8);
  const MetricFields m = build_metric_fields(MappingSpec::tfi(), g, MetricMethod::Sbp);
  double t = -1.0;
  const GridFunction J = read_field_dump(base.string() + "_" + to_string(Location::Cell) + "_J", &t);
  CHECK(t == 0.0);
  CHECK(J.values == m.cell.J);
  const GridFunction g12 = read_field_dump(base.string() + "_" + to_string(Location::Edge1) + "_g12");
  CHECK(g12.values == m.edge1.g12);
  CHECK(read_field_dump(base.string() + "_" + to_string(Location::Edge2) + "_gu22").values == m.edge2.gu22);
}

TEST_CASE("stability commands") {
  const Result c = cli("stability-check --mapping '{\"kind\": \"gaussian_hill\", \"params\": {\"gamma\": 0.2}}' --N 12 --direct");
  CHECK(c.code == 0);
  CHECK(c.out.find("definite") != std::string::npos);
  const fs::path csv = scratch() / "sweep.csv";
  const Result s = cli("stability-sweep --N 8 --gammas 0,0.5 --tables accuracy,max_norm --out " + csv.string());
  CHECK(s.code == 0);
  const std::string text = slurp(csv);
  CHECK(text.rfind("gamma,norm_PPhat,lambda_min_direct,lambda_min_bound,verdict\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
  CHECK(text.find("inconclusive") != std::string::npos);
  CHECK(cli("stability-sweep --N 8 --gammas 0,0.5 --tables accuracy").out == cli("stability-sweep --N 8 --gammas 0,0.5 --tables accuracy").out);
}

TEST_CASE("solve-mms exit codes") {
  const Result ok = cli("solve-mms --mapping tfi --N 8 --T 0.05");
  CHECK(ok.code == 0);
  CHECK(ok.out.find("|Err|_h") != std::string::npos);
  const std::string hill = "--mapping '{\"kind\": \"gaussian_hill\", \"params\": {\"gamma\": 1.0}}' --coefficients max_norm --N 12";
  const Result guarded = cli("solve-mms " + hill + " --T 0.05");
  CHECK(guarded.code == 3);
  CHECK(guarded.out.find("skip") != std::string::npos);
  CHECK(cli("solve-mms " + hill + " --T 0.05 --tensor G").code == 0);
}

TEST_CASE("solve-converge writes one row per level") {
  const fs::path csv = scratch() / "conv.csv";
  const Result r = cli("solve-converge --mapping tfi --levels 8..16 --tensors G,Gtilde --T 0.05 --jobs 2 --out " + csv.string());
  CHECK(r.code == 0);
  std::istringstream in(slurp(csv));
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("label,N,n2,dt,err_l2", 0) == 0);
  std::vector<std::string> rows;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(line);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].find(",8,") != std::string::npos);
  CHECK(rows[1].find(",16,") != std::string::npos);
}

TEST_CASE("bench-apply smoke run") {
  const fs::path out = scratch() / "bench.json";
  const Result r = cli("bench-apply --n1 32 --n2 16 --reps 1 --out " + out.string());
  CHECK(r.code == 0);
  const json j = json::parse(slurp(out));
  CHECK(j["max_rel_diff"].get<double>() <= 1e-12);
  CHECK(j["timings"].size() == 2);
}
