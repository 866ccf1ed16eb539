#include "lear/reparam.hpp"

#include "lear/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lear {

namespace {

bool close_relative(double a, double b, double scale) {
    return std::abs(a - b) <= kSpacingTolerance * scale;
}

bool is_integer_valued(double x) {
    return close_relative(x, std::round(x), std::max(1.0, std::abs(x)));
}

// Smallest consecutive spacing, and whether every consecutive spacing of
// every subject matches it.
std::pair<double, bool> common_spacing(const MeasurementGrid& grid) {
    double h = std::numeric_limits<double>::infinity();
    for (const auto& t : grid.all_times()) {
        for (std::size_t j = 1; j < t.size(); ++j) {
            h = std::min(h, t[j] - t[j - 1]);
        }
    }
    for (const auto& t : grid.all_times()) {
        for (std::size_t j = 1; j < t.size(); ++j) {
            if (!close_relative(t[j] - t[j - 1], h, h)) {
                return {h, false};
            }
        }
    }
    return {h, true};
}

}  // namespace

SpecialCaseReport check_special_case(const MeasurementGrid& grid) {
    SpecialCaseReport report;
    const auto [h, equal] = common_spacing(grid);
    report.equally_spaced = equal;
    const double unit = equal ? h : 1.0;
    if (equal) {
        report.spacing = h;
    }

    report.integer_distances = true;
    for (const auto& t : grid.all_times()) {
        for (std::size_t j = 0; j < t.size() && report.integer_distances; ++j) {
            for (std::size_t k = j + 1; k < t.size(); ++k) {
                if (!is_integer_valued((t[k] - t[j]) / unit)) {
                    report.integer_distances = false;
                    break;
                }
            }
        }
    }
    report.dmin_is_one = close_relative(grid.d_min() / unit, 1.0, 1.0);
    report.eligible = report.equally_spaced && report.integer_distances && report.dmin_is_one;
    return report;
}

NormalizedGrid normalize_grid(const MeasurementGrid& grid) {
    const auto [h, equal] = common_spacing(grid);
    if (!equal) {
        throw Error(ErrorCode::NotSpecialCase, "grid has no common spacing; cannot normalize");
    }
    std::vector<std::vector<double>> scaled;
    scaled.reserve(grid.subject_count());
    for (std::size_t i = 0; i < grid.subject_count(); ++i) {
        const auto t = grid.times(i);
        std::vector<double> s(t.size());
        if (!t.empty()) {
            double base = t.front() / h;
            if (is_integer_valued(base)) {
                base = std::round(base);
            }
            for (std::size_t j = 0; j < t.size(); ++j) {
                s[j] = base + std::round((t[j] - t.front()) / h);
            }
        }
        scaled.push_back(std::move(s));
    }
    return {MeasurementGrid::build(std::move(scaled)), h};
}

std::vector<int> lag_positions(const MeasurementGrid& grid, std::size_t subject, double spacing) {
    const auto t = grid.times(subject);
    std::vector<int> pos(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) {
        const double lag = (t[j] - t.front()) / spacing;
        if (!is_integer_valued(lag)) {
            throw Error(ErrorCode::NotSpecialCase,
                        "subject " + std::to_string(subject) + " is not on an integer lag grid");
        }
        pos[j] = static_cast<int>(std::lround(lag));
    }
    return pos;
}

DeltaD normalized_delta(double delta, double d_min, double d_max) {
    if (!(d_max > d_min)) {
        throw Error(ErrorCode::DegenerateRange, "d_max == d_min: delta_d is undefined");
    }
    return {delta / (d_max - d_min)};
}

GridScale grid_scale(const MeasurementGrid& grid) {
    const auto report = check_special_case(grid);
    if (!report.eligible) {
        throw Error(ErrorCode::NotSpecialCase,
                    "grid is not equally spaced with integer lags (equally_spaced=" +
                        std::string(report.equally_spaced ? "true" : "false") + ")");
    }
    return {grid.d_min(), grid.d_max(), *report.spacing};
}

ArmaImage lear_to_arma(const LearParams& params, const GridScale& scale) {
    require_valid(params);
    const double dd = normalized_delta(params.delta, scale.d_min, scale.d_max).value;
    ArmaImage image;
    image.params.sigma2 = params.sigma2;
    if (params.rho_l == 0.0) {
        image.params.tau = 0.0;
        image.params.rho_a = 0.0;
        image.rho_a_identifiable = false;
        return image;
    }
    image.params.tau = std::pow(params.rho_l, scale.d_min + dd * (scale.spacing - scale.d_min));
    image.params.rho_a = std::pow(params.rho_l, dd * scale.spacing);
    return image;
}

ArmaImage lear_to_arma(const LearParams& params, const MeasurementGrid& grid) {
    return lear_to_arma(params, grid_scale(grid));
}

LearParams arma_to_lear(const Arma11Params& params, const GridScale& scale) {
    if (!std::isfinite(params.sigma2) || !(params.sigma2 > 0.0)) {
        throw Error(ErrorCode::InvalidParams, "sigma2 must be > 0");
    }
    if (!std::isfinite(params.tau) || params.tau < 0.0 || params.tau >= 1.0) {
        throw Error(ErrorCode::OutsideLearImage, "tau must lie in [0, 1) to have a LEAR preimage");
    }
    if (!std::isfinite(params.rho_a) || params.rho_a <= 0.0 || params.rho_a > 1.0) {
        throw Error(ErrorCode::OutsideLearImage, "rho_a must lie in (0, 1] to have a LEAR preimage");
    }
    if (params.tau == 0.0) {
        throw Error(ErrorCode::Unidentifiable, "tau == 0 gives the identity correlation; delta is arbitrary");
    }
    const double range = scale.d_max - scale.d_min;
    if (!(range > 0.0)) {
        throw Error(ErrorCode::DegenerateRange, "d_max == d_min: delta cannot be recovered");
    }
    const double log_tau = std::log(params.tau);
    const double log_rho_a = std::log(params.rho_a);
    // log(tau) = d_min * log(rho_l) + (h - d_min) / h * log(rho_a)
    const double log_rho_l = (log_tau - (scale.spacing - scale.d_min) / scale.spacing * log_rho_a) / scale.d_min;
    if (!(log_rho_l < 0.0)) {
        throw Error(ErrorCode::OutsideLearImage, "implied rho_l is not below 1");
    }
    LearParams out;
    out.sigma2 = params.sigma2;
    out.rho_l = std::exp(log_rho_l);
    out.delta = range * log_rho_a / (scale.spacing * log_rho_l) + 0.0;  // no -0 when rho_a == 1
    if (out.delta < 0.0) {
        throw Error(ErrorCode::OutsideLearImage, "implied delta is negative");
    }
    return out;
}

LearParams arma_to_lear(const Arma11Params& params, const MeasurementGrid& grid) {
    return arma_to_lear(params, grid_scale(grid));
}

double max_reparam_difference(const LearParams& params, const MeasurementGrid& grid) {
    const GridScale scale = grid_scale(grid);
    const Arma11Params arma = lear_to_arma(params, scale).params;
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.subject_count(); ++i) {
        const Matrix lear = lear_covariance(params, grid, i);
        const Matrix arma_cov = arma11_covariance(arma, lag_positions(grid, i, scale.spacing));
        worst = std::max(worst, (lear - arma_cov).cwiseAbs().maxCoeff());
    }
    return worst;
}

}  // namespace lear
