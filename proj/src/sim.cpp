#include "lear/sim.hpp"

#include "lear/error.hpp"
#include "lear/random.hpp"
#include "lear/reparam.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace lear {

void validate(const SimSpec& spec) {
    if (spec.n_subjects < 1) {
        throw Error(ErrorCode::InvalidSpec, "n_subjects must be >= 1");
    }
    if (spec.time_templates.empty()) {
        throw Error(ErrorCode::InvalidSpec, "at least one time template is required");
    }
    for (std::size_t k = 0; k < spec.time_templates.size(); ++k) {
        const auto& t = spec.time_templates[k];
        const bool finite = std::all_of(t.begin(), t.end(), [](double v) { return std::isfinite(v); });
        if (t.empty() || !finite || std::adjacent_find(t.begin(), t.end(), std::greater_equal<>()) != t.end()) {
            throw Error(ErrorCode::InvalidSpec,
                        "time template " + std::to_string(k) + " must be non-empty, finite and strictly increasing");
        }
    }
    const Eigen::Index q = spec.beta.size();
    if (q < 1 || !spec.beta.allFinite()) {
        throw Error(ErrorCode::InvalidSpec, "beta must be a non-empty finite vector");
    }
    if (spec.design == DesignRule::Intercept && q != 1) {
        throw Error(ErrorCode::InvalidSpec, "intercept design needs beta of length 1");
    }
    if (spec.design == DesignRule::InterceptLinearTime && q != 2) {
        throw Error(ErrorCode::InvalidSpec, "intercept+linear-time design needs beta of length 2");
    }
    if (spec.design == DesignRule::UserSupplied) {
        if (spec.user_design.size() != spec.time_templates.size()) {
            throw Error(ErrorCode::InvalidSpec, "user design needs one matrix per time template");
        }
        for (std::size_t k = 0; k < spec.user_design.size(); ++k) {
            const auto& x = spec.user_design[k];
            if (x.rows() != static_cast<Eigen::Index>(spec.time_templates[k].size()) || x.cols() != q) {
                throw Error(ErrorCode::InvalidSpec, "user design matrix " + std::to_string(k) +
                                                        " must be p x q for its template");
            }
        }
    }
    try {
        std::visit([](const auto& params) { require_valid(params); }, spec.covariance);
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidSpec, e.what());
    }
}

RepeatedMeasuresData simulate(const SimSpec& spec) {
    validate(spec);

    std::vector<std::vector<double>> times(spec.n_subjects);
    for (std::size_t i = 0; i < spec.n_subjects; ++i) {
        times[i] = spec.time_templates[i % spec.time_templates.size()];
    }
    const MeasurementGrid grid = MeasurementGrid::build(times);

    // One factor per template.
    std::vector<Matrix> factors;
    std::vector<Matrix> designs;
    for (std::size_t k = 0; k < spec.time_templates.size() && k < spec.n_subjects; ++k) {
        Matrix cov;
        if (const auto* lear = std::get_if<LearParams>(&spec.covariance)) {
            cov = lear_covariance(*lear, grid, k);
        } else {
            const double spacing = grid_scale(grid).spacing;
            cov = arma11_covariance(std::get<Arma11Params>(spec.covariance), lag_positions(grid, k, spacing));
        }
        factors.push_back(cholesky(cov).matrixL());
        designs.push_back(spec.design == DesignRule::UserSupplied ? spec.user_design[k]
                                                                  : design_matrix(spec.design, times[k]));
    }

    std::vector<SubjectData> subjects;
    subjects.reserve(spec.n_subjects);
    Xoshiro256StarStar stream(spec.seed);
    for (std::size_t i = 0; i < spec.n_subjects; ++i) {
        const std::size_t k = i % spec.time_templates.size();
        NormalStream normal(stream);
        stream.jump();

        const auto p = static_cast<Eigen::Index>(times[i].size());
        Vector z(p);
        for (Eigen::Index j = 0; j < p; ++j) {
            z(j) = normal.next();
        }
        SubjectData s;
        s.id = "s" + std::to_string(i + 1);
        s.times = times[i];
        s.x = designs[k];
        s.y = s.x * spec.beta + factors[k] * z;
        subjects.push_back(std::move(s));
    }
    return RepeatedMeasuresData(std::move(subjects));
}

}  // namespace lear
