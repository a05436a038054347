#include "sbp/mapping.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "sbp/errors.hpp"

namespace sbp {

using std::numbers::pi;

MappingSpec MappingSpec::identity() { return {}; }

MappingSpec MappingSpec::rotation(double theta, const MappingSpec& base) {
  MappingSpec s;
  s.kind = MapKind::Rotation;
  s.theta = theta;
  s.base = std::make_shared<const MappingSpec>(base);
  return s;
}

MappingSpec MappingSpec::tfi() {
  MappingSpec s;
  s.kind = MapKind::Tfi;
  return s;
}

MappingSpec MappingSpec::gaussian_hill(double gamma) {
  MappingSpec s;
  s.kind = MapKind::GaussianHill;
  s.gamma = gamma;
  return s;
}

MappingSpec MappingSpec::gaussian_top(double sigma) {
  MappingSpec s;
  s.kind = MapKind::GaussianTop;
  s.sigma = sigma;
  return s;
}

MappingSpec MappingSpec::annulus(std::optional<double> stretch) {
  MappingSpec s;
  s.kind = MapKind::Annulus;
  s.stretch = stretch;
  return s;
}

std::string to_string(MapKind kind) {
  switch (kind) {
    case MapKind::Identity: return "identity";
    case MapKind::Rotation: return "rotation";
    case MapKind::Tfi: return "tfi";
    case MapKind::GaussianHill: return "gaussian_hill";
    case MapKind::GaussianTop: return "gaussian_top";
    case MapKind::Annulus: return "annulus";
  }
  return "?";
}

MappingSpec resolve(const MappingSpec& spec, int n1, int n2) {
  MappingSpec s = spec;
  if (s.kind == MapKind::Annulus && !s.stretch) s.stretch = 4.0 * pi / n2;
  if (s.base) s.base = std::make_shared<const MappingSpec>(resolve(*s.base, n1, n2));
  return s;
}

namespace {

double annulus_stretch(const MappingSpec& s) {
  if (!s.stretch) throw ConfigError("annulus mapping: stretching is unresolved; call resolve() with the grid size");
  return *s.stretch;
}

// TFI boundary curves (left, right, bottom, top) and their derivatives.
struct Curve {
  double x, y, dx, dy;
};

Curve tfi_left(const MappingSpec& s, double r2) {
  return {s.tfi_x0 - s.tfi_a * std::sin(s.tfi_k * r2), s.tfi_y0 + r2, -s.tfi_a * s.tfi_k * std::cos(s.tfi_k * r2), 1.0};
}
Curve tfi_right(const MappingSpec& s, double r2) {
  return {s.tfi_x0 + 1.0 + s.tfi_a * std::sin(s.tfi_k * r2), s.tfi_y0 + r2, s.tfi_a * s.tfi_k * std::cos(s.tfi_k * r2), 1.0};
}
Curve tfi_bottom(const MappingSpec& s, double r1) {
  return {s.tfi_x0 + r1, s.tfi_y0 - s.tfi_a * std::sin(s.tfi_k * r1), 1.0, -s.tfi_a * s.tfi_k * std::cos(s.tfi_k * r1)};
}
Curve tfi_top(const MappingSpec& s, double r1) {
  return {s.tfi_x0 + r1, s.tfi_y0 + 1.0 + s.tfi_a * std::sin(s.tfi_k * r1), 1.0, s.tfi_a * s.tfi_k * std::cos(s.tfi_k * r1)};
}

}  // namespace

MapPoint evaluate_mapping(const MappingSpec& s, double r1, double r2) {
  switch (s.kind) {
    case MapKind::Identity: return {r1, r2};
    case MapKind::Rotation: {
      const MapPoint p = s.base ? evaluate_mapping(*s.base, r1, r2) : MapPoint{r1, r2};
      const double c = std::cos(s.theta), sn = std::sin(s.theta);
      return {c * p.x - sn * p.y, sn * p.x + c * p.y};
    }
    case MapKind::Tfi: {
      const Curve L = tfi_left(s, r2), R = tfi_right(s, r2), B = tfi_bottom(s, r1), T = tfi_top(s, r1);
      const Curve c00 = tfi_left(s, 0.0), c01 = tfi_left(s, 1.0), c10 = tfi_right(s, 0.0), c11 = tfi_right(s, 1.0);
      auto blend = [&](double l, double r, double b, double t, double k00, double k10, double k01, double k11) {
        return (1 - r1) * l + r1 * r + (1 - r2) * b + r2 * t -
               ((1 - r1) * (1 - r2) * k00 + r1 * (1 - r2) * k10 + (1 - r1) * r2 * k01 + r1 * r2 * k11);
      };
      return {blend(L.x, R.x, B.x, T.x, c00.x, c10.x, c01.x, c11.x), blend(L.y, R.y, B.y, T.y, c00.y, c10.y, c01.y, c11.y)};
    }
    case MapKind::GaussianHill: return {r1, r2 * (1.0 + s.gamma * std::exp(-50.0 * (r1 - 0.5) * (r1 - 0.5)))};
    case MapKind::GaussianTop: {
      const double d = r1 - 0.5;
      return {s.top_width * r1, r2 * (s.top_height + s.top_amplitude * std::exp(-d * d / (s.sigma * s.sigma)))};
    }
    case MapKind::Annulus: {
      const double a = annulus_stretch(s);
      const double xi = (s.R1 - s.R0) * r1 * (a * r1 + 1.0 - a) + s.R0;
      const double ang = s.phi + s.span * r2;
      return {xi * std::cos(ang), xi * std::sin(ang)};
    }
  }
  return {r1, r2};
}

bool has_analytic_derivatives(const MappingSpec&) { return true; }

MapJacobian mapping_derivatives(const MappingSpec& s, double r1, double r2) {
  switch (s.kind) {
    case MapKind::Identity: return {1.0, 0.0, 0.0, 1.0};
    case MapKind::Rotation: {
      const MapJacobian b = s.base ? mapping_derivatives(*s.base, r1, r2) : MapJacobian{1.0, 0.0, 0.0, 1.0};
      const double c = std::cos(s.theta), sn = std::sin(s.theta);
      return {c * b.xr1 - sn * b.yr1, sn * b.xr1 + c * b.yr1, c * b.xr2 - sn * b.yr2, sn * b.xr2 + c * b.yr2};
    }
    case MapKind::Tfi: {
      const Curve L = tfi_left(s, r2), R = tfi_right(s, r2), B = tfi_bottom(s, r1), T = tfi_top(s, r1);
      const Curve c00 = tfi_left(s, 0.0), c01 = tfi_left(s, 1.0), c10 = tfi_right(s, 0.0), c11 = tfi_right(s, 1.0);
      auto d1 = [&](double l, double r, double db, double dt, double k00, double k10, double k01, double k11) {
        return -l + r + (1 - r2) * db + r2 * dt - (-(1 - r2) * k00 + (1 - r2) * k10 - r2 * k01 + r2 * k11);
      };
      auto d2 = [&](double dl, double dr, double b, double t, double k00, double k10, double k01, double k11) {
        return (1 - r1) * dl + r1 * dr - b + t - (-(1 - r1) * k00 - r1 * k10 + (1 - r1) * k01 + r1 * k11);
      };
      return {d1(L.x, R.x, B.dx, T.dx, c00.x, c10.x, c01.x, c11.x), d1(L.y, R.y, B.dy, T.dy, c00.y, c10.y, c01.y, c11.y),
              d2(L.dx, R.dx, B.x, T.x, c00.x, c10.x, c01.x, c11.x), d2(L.dy, R.dy, B.y, T.y, c00.y, c10.y, c01.y, c11.y)};
    }
    case MapKind::GaussianHill: {
      const double d = r1 - 0.5;
      const double e = std::exp(-50.0 * d * d);
      return {1.0, r2 * s.gamma * e * (-100.0 * d), 0.0, 1.0 + s.gamma * e};
    }
    case MapKind::GaussianTop: {
      const double d = r1 - 0.5;
      const double s2 = s.sigma * s.sigma;
      const double e = s.top_amplitude * std::exp(-d * d / s2);
      return {s.top_width, r2 * e * (-2.0 * d / s2), 0.0, s.top_height + e};
    }
    case MapKind::Annulus: {
      const double a = annulus_stretch(s);
      const double xi = (s.R1 - s.R0) * r1 * (a * r1 + 1.0 - a) + s.R0;
      const double dxi = (s.R1 - s.R0) * (2.0 * a * r1 + 1.0 - a);
      const double ang = s.phi + s.span * r2;
      const double c = std::cos(ang), sn = std::sin(ang);
      return {dxi * c, dxi * sn, -xi * s.span * sn, xi * s.span * c};
    }
  }
  return {1.0, 0.0, 0.0, 1.0};
}

CovariantBasis covariant_basis(const MappingSpec& spec, double r1, double r2) {
  const MapJacobian d = mapping_derivatives(spec, r1, r2);
  CovariantBasis b{d.xr1, d.yr1, d.xr2, d.yr2, d.xr1 * d.yr2 - d.yr1 * d.xr2};
  if (!(b.J > 0.0)) {
    std::ostringstream os;
    os << "singular mapping: J = " << b.J << " at (r1, r2) = (" << r1 << ", " << r2 << ")";
    throw SingularMappingError(os.str());
  }
  return b;
}

std::string mapping_to_json(const MappingSpec& s) {
  nlohmann::json j;
  j["kind"] = to_string(s.kind);
  nlohmann::json p = nlohmann::json::object();
  switch (s.kind) {
    case MapKind::Identity: break;
    case MapKind::Rotation:
      p["theta"] = s.theta;
      if (s.base) p["base"] = nlohmann::json::parse(mapping_to_json(*s.base));
      break;
    case MapKind::Tfi:
      p = {{"a", s.tfi_a}, {"k", s.tfi_k}, {"x0", s.tfi_x0}, {"y0", s.tfi_y0}};
      break;
    case MapKind::GaussianHill: p["gamma"] = s.gamma; break;
    case MapKind::GaussianTop:
      p = {{"sigma", s.sigma}, {"width", s.top_width}, {"height", s.top_height}, {"amplitude", s.top_amplitude}};
      break;
    case MapKind::Annulus:
      p = {{"R0", s.R0}, {"R1", s.R1}, {"phi", s.phi}, {"span", s.span}};
      if (s.stretch) p["a"] = *s.stretch;
      else p["a"] = "4pi/n2";
      break;
  }
  j["params"] = p;
  return j.dump();
}

namespace {

MappingSpec from_json(const nlohmann::json& j) {
  if (j.is_string()) return from_json(nlohmann::json{{"kind", j.get<std::string>()}});
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("mapping spec: expected an object with a 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  const nlohmann::json p = j.value("params", nlohmann::json::object());
  auto num = [&](const char* key, double def) {
    if (!p.contains(key)) return def;
    if (!p.at(key).is_number()) throw ConfigError(std::string("mapping spec: parameter '") + key + "' must be a number");
    return p.at(key).get<double>();
  };
  MappingSpec s;
  if (kind == "identity") return s;
  if (kind == "rotation") {
    const MappingSpec base = p.contains("base") ? from_json(p.at("base")) : MappingSpec::identity();
    return MappingSpec::rotation(num("theta", 0.0), base);
  }
  if (kind == "tfi") {
    s = MappingSpec::tfi();
    s.tfi_a = num("a", s.tfi_a);
    s.tfi_k = num("k", s.tfi_k);
    s.tfi_x0 = num("x0", s.tfi_x0);
    s.tfi_y0 = num("y0", s.tfi_y0);
    return s;
  }
  if (kind == "gaussian_hill") return MappingSpec::gaussian_hill(num("gamma", 0.0));
  if (kind == "gaussian_top") {
    s = MappingSpec::gaussian_top(num("sigma", 0.105));
    s.top_width = num("width", s.top_width);
    s.top_height = num("height", s.top_height);
    s.top_amplitude = num("amplitude", s.top_amplitude);
    return s;
  }
  if (kind == "annulus") {
    s = MappingSpec::annulus();
    s.R0 = num("R0", s.R0);
    s.R1 = num("R1", s.R1);
    s.phi = num("phi", s.phi);
    s.span = num("span", s.span);
    if (p.contains("a") && p.at("a").is_number()) s.stretch = p.at("a").get<double>();
    if (!(s.R0 > 0.0 && s.R1 > s.R0)) throw ConfigError("annulus mapping: require 0 < R0 < R1");
    return s;
  }
  throw ConfigError("unknown mapping kind '" + kind + "'");
}

}  // namespace

MappingSpec mapping_from_json(const std::string& text) {
  std::string src = text;
  const auto first = src.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw ConfigError("mapping spec: empty input");
  if (src[first] != '{' && src[first] != '"') {
    std::ifstream in(src);
    if (in) {
      std::stringstream ss;
      ss << in.rdbuf();
      src = ss.str();
    } else {
      return from_json(nlohmann::json(src));
    }
  }
  try {
    return from_json(nlohmann::json::parse(src));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("mapping spec: ") + e.what());
  }
}

}  // namespace sbp
