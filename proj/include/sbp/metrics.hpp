#ifndef SBP_METRICS_HPP
#define SBP_METRICS_HPP

#include <string>

#include "sbp/grid2d.hpp"
#include "sbp/mapping.hpp"

namespace sbp {

enum class MetricMethod { Analytic, Sbp };

std::string to_string(MetricMethod m);
MetricMethod parse_metric_method(const std::string& name);

/// Geometric quantities sampled at one staggered location.
/// aᵢ are covariant basis vectors, aⁱ contravariant, gᵢⱼ = aᵢ·aⱼ and gⁱʲ = aⁱ·aʲ.
/// Cartesian transform entries Aₖᵢ = e_k · aⁱ, so (e_x·a¹ = A11, e_x·a² = A12, e_y·a¹ = A21, e_y·a² = A22).
struct LocationMetrics {
  Location location = Location::Cell;
  Shape shape;
  Vec x, y;
  Vec a1x, a1y, a2x, a2y;
  Vec J;
  Vec g11, g12, g22;
  Vec gu11, gu12, gu22;
  Vec A11, A12, A21, A22;
};

struct MetricFields {
  MappingSpec mapping;
  MetricMethod method = MetricMethod::Analytic;
  LocationMetrics cell;
  LocationMetrics edge1;
  LocationMetrics edge2;

  const LocationMetrics& at(Location loc) const;
};

/// Sample X at every location of the grid and derive metrics.
/// Throws SingularMappingError on J <= 0 and on a non-SPD contravariant tensor.
MetricFields build_metric_fields(const MappingSpec& spec, const StaggeredGrid2D& g,
                                 MetricMethod method = MetricMethod::Analytic);

/// Physical coordinates of a location.
void map_coordinates(const MappingSpec& spec, const StaggeredGrid2D& g, Location loc, Vec& x, Vec& y);

}  // namespace sbp

#endif  // SBP_METRICS_HPP
