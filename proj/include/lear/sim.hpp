#pragma once

#include "lear/core.hpp"
#include "lear/data.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace lear {

/// Data-generating specification. Subject i is measured at
/// time_templates[i % time_templates.size()]; with a user-supplied design,
/// user_design[k] is the X for template k.
struct SimSpec {
    std::size_t n_subjects = 1;
    std::vector<std::vector<double>> time_templates;
    Vector beta;
    DesignRule design = DesignRule::Intercept;
    std::vector<Matrix> user_design;
    std::variant<LearParams, Arma11Params> covariance;
    std::uint64_t seed = 0;
};

/// Throws InvalidSpec describing the first problem found.
void validate(const SimSpec& spec);

/// y_i = X_i beta + L_i z_i with L_i the Cholesky factor of the subject's
/// covariance. Subject i draws z_i from its own stream: xoshiro256** seeded
/// from `seed` and jumped i times, transformed by Box-Muller. Identical
/// specs give bit-identical data.
RepeatedMeasuresData simulate(const SimSpec& spec);

}  // namespace lear
