#ifndef SBP_IO_HPP
#define SBP_IO_HPP

#include <string>

#include "sbp/solver.hpp"

namespace sbp {

/// Field dump: `<base>.bin` holds raw little-endian doubles in storage order,
/// `<base>.json` holds {"location", "n1", "n2", "time"} with n1, n2 the array shape.
void write_field_dump(const std::string& base, const GridFunction& f, double time);
GridFunction read_field_dump(const std::string& base, double* time = nullptr);

/// Writes `<base>_p`, `<base>_v1` and `<base>_v2` dumps.
void write_state_dump(const std::string& base, const StaggeredGrid2D& g, const State& s);

/// Builtin table name ("default", "accuracy", "min_norm", "max_norm") or a JSON file path.
CoefficientTable load_coefficients(const std::string& name_or_path);

/// JSON mirror of SolverConfig. Unknown keys are rejected with ConfigError.
/// "mapping" takes anything mapping_from_json accepts; "coefficients" a name or path.
SolverConfig solver_config_from_json(const std::string& text_or_path);
/// Merge the keys of a JSON object into an existing configuration.
void apply_config_json(SolverConfig& cfg, const std::string& json_object_text);
std::string solver_config_to_json(const SolverConfig& cfg);

/// CSV with columns t,p,v1,v2.
void write_receiver_csv(const std::string& path, const Vec& times, const ReceiverSeries& r);

}  // namespace sbp

#endif  // SBP_IO_HPP
