#ifndef SBP_MAPPING_HPP
#define SBP_MAPPING_HPP

#include <memory>
#include <optional>
#include <string>

namespace sbp {

enum class MapKind { Identity, Rotation, Tfi, GaussianHill, GaussianTop, Annulus };

/// Curvilinear mapping (r¹, r²) ∈ [0,1]² → (x, y).
struct MappingSpec {
  MapKind kind = MapKind::Identity;

  // rotation: counter-clockwise by theta about the origin, applied after base
  double theta = 0.0;
  std::shared_ptr<const MappingSpec> base;

  // tfi: sinusoidal boundary curves
  double tfi_a = 0.05;
  double tfi_k = 6.283185307179586;
  double tfi_x0 = 0.2;
  double tfi_y0 = 0.2;

  // gaussian_hill: y = r²(1 + γ exp(-50 (r¹ - 1/2)²))
  double gamma = 0.0;

  // gaussian_top: x = width r¹, y = r² (height + amp exp(-(r¹ - 1/2)²/σ²))
  double sigma = 0.105;
  double top_width = 10.0;
  double top_height = 5.0;
  double top_amplitude = 1.0;

  // annulus: ξ(r¹) = (R₁ - R₀) r¹ (a r¹ + 1 - a) + R₀, angle φ + span r².
  // Without an explicit stretching the grid resolution fixes it as a = 4π/n₂.
  double R0 = 0.3;
  double R1 = 1.0;
  std::optional<double> stretch;
  double phi = 0.6283185307179586;
  double span = 6.283185307179586;

  static MappingSpec identity();
  static MappingSpec rotation(double theta, const MappingSpec& base = identity());
  static MappingSpec tfi();
  static MappingSpec gaussian_hill(double gamma);
  static MappingSpec gaussian_top(double sigma = 0.105);
  static MappingSpec annulus(std::optional<double> stretch = std::nullopt);
};

std::string to_string(MapKind kind);

struct MapPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Partial derivatives (∂x/∂r¹, ∂y/∂r¹, ∂x/∂r², ∂y/∂r²).
struct MapJacobian {
  double xr1 = 0.0;
  double yr1 = 0.0;
  double xr2 = 0.0;
  double yr2 = 0.0;
};

/// Covariant basis a₁ = ∂(x,y)/∂r¹, a₂ = ∂(x,y)/∂r², J = a₁ × a₂.
struct CovariantBasis {
  double a1x = 0.0, a1y = 0.0;
  double a2x = 0.0, a2y = 0.0;
  double J = 0.0;
};

/// Fix resolution-dependent parameters (annulus stretching a = 4π/n₂).
MappingSpec resolve(const MappingSpec& spec, int n1, int n2);

MapPoint evaluate_mapping(const MappingSpec& spec, double r1, double r2);
bool has_analytic_derivatives(const MappingSpec& spec);
MapJacobian mapping_derivatives(const MappingSpec& spec, double r1, double r2);

/// Analytic covariant basis. Throws SingularMappingError when J <= 0.
CovariantBasis covariant_basis(const MappingSpec& spec, double r1, double r2);

/// { "kind": "...", "params": {...} }
std::string mapping_to_json(const MappingSpec& spec);
/// Accepts inline JSON, a bare kind name, or a path to a JSON file.
MappingSpec mapping_from_json(const std::string& text_or_path);

}  // namespace sbp

#endif  // SBP_MAPPING_HPP
