#include "sbp/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "sbp/errors.hpp"

namespace sbp {

namespace {

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int b = 0; b < 8; ++b) r |= ((v >> (8 * b)) & 0xffu) << (8 * (7 - b));
  return r;
}

}  // namespace

void write_field_dump(const std::string& base, const GridFunction& f, double time) {
  std::ofstream bin(base + ".bin", std::ios::binary);
  if (!bin) throw ConfigError("cannot write field dump '" + base + ".bin'");
  for (double v : f.values) {
    const std::uint64_t u = to_le(std::bit_cast<std::uint64_t>(v));
    bin.write(reinterpret_cast<const char*>(&u), sizeof u);
  }
  nlohmann::json meta{{"location", to_string(f.location)}, {"n1", f.shape.n1}, {"n2", f.shape.n2}, {"time", time}};
  std::ofstream side(base + ".json");
  if (!side) throw ConfigError("cannot write field dump '" + base + ".json'");
  side << meta.dump(2) << "\n";
}

GridFunction read_field_dump(const std::string& base, double* time) {
  std::ifstream side(base + ".json");
  if (!side) throw ConfigError("cannot read field dump '" + base + ".json'");
  nlohmann::json meta;
  try {
    side >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed field dump sidecar '" + base + ".json': " + e.what());
  }
  GridFunction f(parse_location(meta.at("location").get<std::string>()),
                 Shape{meta.at("n1").get<std::size_t>(), meta.at("n2").get<std::size_t>()});
  if (time) *time = meta.value("time", 0.0);
  std::ifstream bin(base + ".bin", std::ios::binary);
  if (!bin) throw ConfigError("cannot read field dump '" + base + ".bin'");
  for (double& v : f.values) {
    std::uint64_t u = 0;
    if (!bin.read(reinterpret_cast<char*>(&u), sizeof u)) throw ConfigError("field dump '" + base + ".bin' is truncated");
    v = std::bit_cast<double>(to_le(u));
  }
  return f;
}

void write_state_dump(const std::string& base, const StaggeredGrid2D& g, const State& s) {
  auto dump = [&](const char* name, Location loc, const Vec& v) {
    GridFunction f(g, loc);
    f.values = v;
    write_field_dump(base + "_" + name, f, s.t);
  };
  dump("p", Location::Cell, s.p);
  dump("v1", Location::Edge1, s.v1);
  dump("v2", Location::Edge2, s.v2);
}

void write_receiver_csv(const std::string& path, const Vec& times, const ReceiverSeries& r) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write receiver series '" + path + "'");
  out << "t,p,v1,v2\n" << std::setprecision(17);
  for (std::size_t k = 0; k < times.size(); ++k) out << times[k] << ',' << r.p[k] << ',' << r.v1[k] << ',' << r.v2[k] << '\n';
}

CoefficientTable load_coefficients(const std::string& name_or_path) {
  if (name_or_path.empty() || name_or_path == "default") return default_table();
  if (name_or_path == "accuracy" || name_or_path == "min_norm" || name_or_path == "max_norm") return builtin_table(name_or_path);
  return load_table(name_or_path);
}

namespace {

nlohmann::json parse_json_arg(const std::string& text_or_path, const char* what) {
  std::string text = text_or_path;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos || text[first] != '{') {
    std::ifstream in(text_or_path);
    if (!in) throw ConfigError(std::string("cannot read ") + what + " '" + text_or_path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed ") + what + ": " + e.what());
  }
}

void apply_config(SolverConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("solver configuration must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "mapping") c.mapping = mapping_from_json(v.is_string() ? v.get<std::string>() : v.dump());
      else if (key == "coefficients") c.table = v.is_string() ? load_coefficients(v.get<std::string>()) : table_from_json(v.dump());
      else if (key == "n") c.n1 = c.n2 = v.get<int>();
      else if (key == "n1") c.n1 = v.get<int>();
      else if (key == "n2") c.n2 = v.get<int>();
      else if (key == "periodic1") c.periodic1 = v.get<bool>();
      else if (key == "periodic2") c.periodic2 = v.get<bool>();
      else if (key == "variant" || key == "tensor") c.variant = parse_metric_variant(v.get<std::string>());
      else if (key == "metric_method") c.metric_method = parse_metric_method(v.get<std::string>());
      else if (key == "formulation") c.formulation = parse_formulation(v.get<std::string>());
      else if (key == "stage_data") c.stage_data = parse_stage_data(v.get<std::string>());
      else if (key == "dt") c.dt = v.get<double>();
      else if (key == "cfl") c.cfl = v.get<double>();
      else if (key == "T") c.T = v.get<double>();
      else if (key == "source") {
        if (v.is_null()) {
          c.source.reset();
          continue;
        }
        SourceSpec s;
        for (const auto& [sk, sv] : v.items()) {
          if (sk == "r_star") s.r_star = sv.get<double>();
          else if (sk == "t0") s.t0 = sv.get<double>();
          else if (sk == "amplitude") s.amplitude = sv.get<double>();
          else throw ConfigError("unknown source key '" + sk + "'");
        }
        c.source = s;
      } else if (key == "receivers") c.receivers = v.get<std::vector<std::array<double, 2>>>();
      else if (key == "snapshot_times") c.snapshot_times = v.get<std::vector<double>>();
      else if (key == "energy_every") c.energy_every = v.get<int>();
      else if (key == "skip_stability_check") c.skip_stability_check = v.get<bool>();
      else if (key == "assembled_operators") c.assembled_operators = v.get<bool>();
      else throw ConfigError("unknown solver configuration key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid solver configuration: ") + e.what());
  }
}

}  // namespace

SolverConfig solver_config_from_json(const std::string& text_or_path) {
  SolverConfig c;
  apply_config(c, parse_json_arg(text_or_path, "solver configuration"));
  return c;
}

void apply_config_json(SolverConfig& cfg, const std::string& json_object_text) {
  apply_config(cfg, parse_json_arg(json_object_text, "solver configuration"));
}

std::string solver_config_to_json(const SolverConfig& c) {
  nlohmann::json j;
  j["mapping"] = nlohmann::json::parse(mapping_to_json(c.mapping));
  j["coefficients"] = c.table.closure_d.empty() ? nlohmann::json("default") : nlohmann::json::parse(table_to_json(c.table));
  j["n1"] = c.n1;
  j["n2"] = c.n2;
  j["periodic1"] = c.periodic1;
  j["periodic2"] = c.periodic2;
  j["variant"] = to_string(c.variant);
  j["metric_method"] = to_string(c.metric_method);
  j["formulation"] = to_string(c.formulation);
  j["stage_data"] = to_string(c.stage_data);
  j["dt"] = c.dt;
  j["cfl"] = c.cfl;
  j["T"] = c.T;
  if (c.source) j["source"] = {{"r_star", c.source->r_star}, {"t0", c.source->t0}, {"amplitude", c.source->amplitude}};
  j["receivers"] = c.receivers;
  j["snapshot_times"] = c.snapshot_times;
  j["energy_every"] = c.energy_every;
  j["skip_stability_check"] = c.skip_stability_check;
  j["assembled_operators"] = c.assembled_operators;
  return j.dump(2);
}

}  // namespace sbp
