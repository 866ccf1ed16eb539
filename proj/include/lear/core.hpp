#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lear {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Equal-variance LEAR covariance parameters.
struct LearParams {
    double sigma2 = 1.0;
    double rho_l = 0.0;
    double delta = 0.0;
};

/// ARMA(1,1) covariance parameters: off-diagonal entries sigma2 * tau * rho_a^(lag - 1).
struct Arma11Params {
    double sigma2 = 1.0;
    double tau = 0.0;
    double rho_a = 0.0;
};

/// Per-subject measurement times (or locations) with the pooled distance
/// extremes d_min and d_max over every within-subject pair.
class MeasurementGrid {
public:
    /// Validates strictly increasing times and computes the pooled extremes.
    /// Throws InvalidGrid on non-increasing or non-finite times, DegenerateGrid
    /// when no subject has two or more measurements.
    static MeasurementGrid build(std::vector<std::vector<double>> times);

    /// Same times, with d_min / d_max fixed to design constants instead of
    /// the data-derived values. Requires 0 < d_min <= d_max.
    [[nodiscard]] MeasurementGrid with_extremes(double d_min, double d_max) const;

    [[nodiscard]] std::size_t subject_count() const noexcept { return times_.size(); }
    [[nodiscard]] std::span<const double> times(std::size_t subject) const;
    [[nodiscard]] std::size_t size(std::size_t subject) const { return times(subject).size(); }
    [[nodiscard]] const std::vector<std::vector<double>>& all_times() const noexcept { return times_; }

    [[nodiscard]] double d_min() const noexcept { return d_min_; }
    [[nodiscard]] double d_max() const noexcept { return d_max_; }
    [[nodiscard]] double range() const noexcept { return d_max_ - d_min_; }
    [[nodiscard]] bool extremes_overridden() const noexcept { return overridden_; }

    /// Symmetric matrix of |t_j - t_k| for one subject.
    [[nodiscard]] Matrix distances(std::size_t subject) const;

private:
    MeasurementGrid() = default;

    std::vector<std::vector<double>> times_;
    double d_min_ = 0.0;
    double d_max_ = 0.0;
    bool overridden_ = false;
};

inline MeasurementGrid build_grid(std::vector<std::vector<double>> times) {
    return MeasurementGrid::build(std::move(times));
}

struct ParamViolation {
    std::string field;
    std::string message;
};

/// Every violated LEAR parameter-space constraint; empty means valid.
std::vector<ParamViolation> validate_params(const LearParams& params);

/// Throws InvalidParams listing all violations.
void require_valid(const LearParams& params);

/// Single LEAR correlation at separation d. When d_max == d_min the
/// normalized offset (d - d_min) / (d_max - d_min) is taken to be 0.
double lear_correlation_entry(double rho_l, double delta, double distance, double d_min, double d_max);

/// LEAR correlation for an arbitrary time vector using the given extremes.
Matrix lear_correlation(const LearParams& params, std::span<const double> times, double d_min, double d_max);

Matrix lear_correlation(const LearParams& params, const MeasurementGrid& grid, std::size_t subject);
Matrix lear_covariance(const LearParams& params, const MeasurementGrid& grid, std::size_t subject);

/// ARMA(1,1) covariance on p consecutive unit-spaced positions.
Matrix arma11_covariance(const Arma11Params& params, int p);

/// ARMA(1,1) covariance on integer lag positions (strictly increasing), for
/// subjects observed on a subset of a unit-spaced design.
Matrix arma11_covariance(const Arma11Params& params, std::span<const int> positions);

/// Throws InvalidParams for non-finite values, sigma2 <= 0, |tau| >= 1 or
/// |rho_a| > 1. The wider ARMA space is accepted here; positive definiteness
/// is checked separately.
void require_valid(const Arma11Params& params);

/// Cholesky factor with zero tolerance on pivot positivity. Throws
/// NotPositiveDefinite instead of regularizing.
Eigen::LLT<Matrix> cholesky(const Matrix& m);

[[nodiscard]] bool is_positive_definite(const Matrix& m);

}  // namespace lear
