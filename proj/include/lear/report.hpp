#pragma once

#include "lear/core.hpp"
#include "lear/estimation.hpp"
#include "lear/reparam.hpp"
#include "lear/sim.hpp"

#include <json.hpp>

namespace lear {

using Json = nlohmann::ordered_json;

/// Version stamped into every JSON document this library writes.
inline constexpr int kSchemaVersion = 1;

Json to_json(const LearParams& params);
Json to_json(const Arma11Params& params);
Json to_json(const Matrix& m);
Json to_json(const SpecialCaseReport& report, const MeasurementGrid& grid);
Json to_json(const FitResult& result);
Json to_json(const ComparisonReport& report, const RepeatedMeasuresData& data);

/// Simulation spec document:
///   {"schema_version": 1, "n_subjects": N, "seed": u64,
///    "times": [...] | "time_templates": [[...], ...],
///    "beta": [...], "design": "intercept" | "linear" | "user",
///    "design_matrices": [[[...]]]            (user design only)
///    "covariance": {"model": "lear", "sigma2", "rho_l", "delta"}
///                | {"model": "arma11", "sigma2", "tau", "rho_a"}}
/// Throws InvalidSpec on missing or mistyped fields.
SimSpec sim_spec_from_json(const Json& doc);
Json to_json(const SimSpec& spec);

}  // namespace lear
