#include "lear/core.hpp"

#include "lear/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lear {

namespace {

std::string describe_value(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

MeasurementGrid MeasurementGrid::build(std::vector<std::vector<double>> times) {
    double d_min = std::numeric_limits<double>::infinity();
    double d_max = -std::numeric_limits<double>::infinity();
    bool any_pair = false;

    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto& t = times[i];
        for (std::size_t j = 0; j < t.size(); ++j) {
            if (!std::isfinite(t[j])) {
                throw Error(ErrorCode::InvalidGrid,
                            "subject " + std::to_string(i) + ": non-finite time at position " + std::to_string(j));
            }
            if (j > 0 && !(t[j] > t[j - 1])) {
                throw Error(ErrorCode::InvalidGrid,
                            "subject " + std::to_string(i) + ": times not strictly increasing at position " +
                                std::to_string(j) + " (" + describe_value(t[j - 1]) + " then " +
                                describe_value(t[j]) + ")");
            }
        }
        if (t.size() >= 2) {
            any_pair = true;
            // Sorted times: the smallest gap is between neighbours, the largest spans the ends.
            for (std::size_t j = 1; j < t.size(); ++j) {
                d_min = std::min(d_min, t[j] - t[j - 1]);
            }
            d_max = std::max(d_max, t.back() - t.front());
        }
    }
    if (!any_pair) {
        throw Error(ErrorCode::DegenerateGrid, "no subject has two or more measurements; no distances exist");
    }

    MeasurementGrid grid;
    grid.times_ = std::move(times);
    grid.d_min_ = d_min;
    grid.d_max_ = d_max;
    return grid;
}

MeasurementGrid MeasurementGrid::with_extremes(double d_min, double d_max) const {
    if (!std::isfinite(d_min) || !std::isfinite(d_max) || !(d_min > 0.0) || d_max < d_min) {
        throw Error(ErrorCode::InvalidGrid, "distance extremes must satisfy 0 < d_min <= d_max (got d_min=" +
                                                describe_value(d_min) + ", d_max=" + describe_value(d_max) + ")");
    }
    MeasurementGrid grid = *this;
    grid.d_min_ = d_min;
    grid.d_max_ = d_max;
    grid.overridden_ = true;
    return grid;
}

std::span<const double> MeasurementGrid::times(std::size_t subject) const {
    if (subject >= times_.size()) {
        throw std::out_of_range("subject index " + std::to_string(subject) + " out of range");
    }
    return times_[subject];
}

Matrix MeasurementGrid::distances(std::size_t subject) const {
    const auto t = times(subject);
    const auto p = static_cast<Eigen::Index>(t.size());
    Matrix d = Matrix::Zero(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index k = j + 1; k < p; ++k) {
            d(j, k) = t[k] - t[j];
            d(k, j) = d(j, k);
        }
    }
    return d;
}

std::vector<ParamViolation> validate_params(const LearParams& params) {
    std::vector<ParamViolation> out;
    if (!std::isfinite(params.sigma2) || !(params.sigma2 > 0.0)) {
        out.push_back({"sigma2", "sigma2 must be > 0"});
    }
    if (!std::isfinite(params.rho_l) || params.rho_l < 0.0) {
        out.push_back({"rho_l", "rho_l must be >= 0"});
    } else if (!(params.rho_l < 1.0)) {
        out.push_back({"rho_l", "rho_l must be < 1"});
    }
    if (std::isnan(params.delta) || params.delta < 0.0) {
        out.push_back({"delta", "delta must be >= 0"});
    } else if (!std::isfinite(params.delta)) {
        out.push_back({"delta", "delta must be finite"});
    }
    return out;
}

void require_valid(const LearParams& params) {
    const auto violations = validate_params(params);
    if (violations.empty()) {
        return;
    }
    std::string msg = "LEAR parameters outside the parameter space:";
    for (const auto& v : violations) {
        msg += " " + v.message + ";";
    }
    throw Error(ErrorCode::InvalidParams, msg);
}

double lear_correlation_entry(double rho_l, double delta, double distance, double d_min, double d_max) {
    const double span = d_max - d_min;
    const double offset = span > 0.0 ? (distance - d_min) / span : 0.0;
    return std::pow(rho_l, d_min + delta * offset);
}

Matrix lear_correlation(const LearParams& params, std::span<const double> times, double d_min, double d_max) {
    require_valid(params);
    const auto p = static_cast<Eigen::Index>(times.size());
    Matrix corr = Matrix::Identity(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index k = j + 1; k < p; ++k) {
            const double d = times[k] - times[j];
            corr(j, k) = lear_correlation_entry(params.rho_l, params.delta, d, d_min, d_max);
            corr(k, j) = corr(j, k);
        }
    }
    return corr;
}

Matrix lear_correlation(const LearParams& params, const MeasurementGrid& grid, std::size_t subject) {
    return lear_correlation(params, grid.times(subject), grid.d_min(), grid.d_max());
}

Matrix lear_covariance(const LearParams& params, const MeasurementGrid& grid, std::size_t subject) {
    Matrix cov = lear_correlation(params, grid, subject);
    cov *= params.sigma2;
    cov.diagonal().setConstant(params.sigma2);
    return cov;
}

void require_valid(const Arma11Params& params) {
    std::string msg;
    if (!std::isfinite(params.sigma2) || !(params.sigma2 > 0.0)) {
        msg += " sigma2 must be > 0;";
    }
    if (!std::isfinite(params.tau) || !(std::abs(params.tau) < 1.0)) {
        msg += " tau must lie in (-1, 1);";
    }
    if (!std::isfinite(params.rho_a) || std::abs(params.rho_a) > 1.0) {
        msg += " rho_a must lie in [-1, 1];";
    }
    if (!msg.empty()) {
        throw Error(ErrorCode::InvalidParams, "ARMA(1,1) parameters invalid:" + msg);
    }
}

Matrix arma11_covariance(const Arma11Params& params, std::span<const int> positions) {
    require_valid(params);
    if (positions.empty()) {
        throw Error(ErrorCode::InvalidSize, "ARMA(1,1) covariance needs at least one position");
    }
    const auto p = static_cast<Eigen::Index>(positions.size());
    Matrix cov(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        cov(j, j) = params.sigma2;
        for (Eigen::Index k = j + 1; k < p; ++k) {
            const int lag = positions[k] - positions[j];
            if (lag <= 0) {
                throw Error(ErrorCode::InvalidSize, "ARMA(1,1) positions must be strictly increasing");
            }
            cov(j, k) = params.sigma2 * params.tau * std::pow(params.rho_a, lag - 1);
            cov(k, j) = cov(j, k);
        }
    }
    return cov;
}

Matrix arma11_covariance(const Arma11Params& params, int p) {
    if (p < 1) {
        throw Error(ErrorCode::InvalidSize, "ARMA(1,1) covariance size must be >= 1 (got " + std::to_string(p) + ")");
    }
    std::vector<int> positions(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) {
        positions[static_cast<std::size_t>(j)] = j;
    }
    return arma11_covariance(params, positions);
}

Eigen::LLT<Matrix> cholesky(const Matrix& m) {
    Eigen::LLT<Matrix> llt(m);
    // LLT compares pivots with <= 0, which lets NaN through.
    if (llt.info() != Eigen::Success || !m.allFinite()) {
        throw Error(ErrorCode::NotPositiveDefinite,
                    "matrix of size " + std::to_string(m.rows()) + " is not positive definite");
    }
    return llt;
}

bool is_positive_definite(const Matrix& m) {
    Eigen::LLT<Matrix> llt(m);
    return llt.info() == Eigen::Success && m.allFinite();
}

}  // namespace lear
