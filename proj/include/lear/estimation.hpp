#pragma once

#include "lear/core.hpp"
#include "lear/data.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lear {

enum class Parameterization { Lear, Arma11 };
enum class Criterion { Ml, Reml };

std::string_view parameterization_name(Parameterization p) noexcept;
std::string_view criterion_name(Criterion c) noexcept;
Parameterization parse_parameterization(std::string_view name);
Criterion parse_criterion(std::string_view name);

/// Correlation parameters of the LEAR family (unit variance).
struct LearCorrelation {
    double rho_l;
    double delta;
};

/// Correlation parameters of the ARMA(1,1) family (unit variance).
struct ArmaCorrelation {
    double tau;
    double rho_a;
};

using CorrelationParams = std::variant<LearCorrelation, ArmaCorrelation>;

/// Everything the profiled likelihood produces at one correlation point.
struct ProfileResult {
    double loglik = 0.0;
    double sigma2 = 0.0;
    Vector beta;
    /// sum_i r_i' Gamma_i^{-1} r_i
    double quadratic_form = 0.0;
    /// sum_i log det Gamma_i
    double log_det_gamma = 0.0;
};

/// Profiled Gaussian (RE)ML with beta and sigma2 at their closed-form optima.
/// Per-subject contributions are accumulated in a canonical, content-derived
/// subject order, so the value is bit-identical under subject permutation and
/// across thread counts.
class ProfileLikelihood {
public:
    ProfileLikelihood(const RepeatedMeasuresData& data, Parameterization parameterization, int threads = 1);

    [[nodiscard]] ProfileResult evaluate(const CorrelationParams& params, Criterion criterion) const;

    [[nodiscard]] Parameterization parameterization() const noexcept { return parameterization_; }
    [[nodiscard]] const RepeatedMeasuresData& data() const noexcept { return data_; }

    /// Unit-variance correlation matrix of one subject.
    [[nodiscard]] Matrix correlation(const CorrelationParams& params, std::size_t subject) const;

private:
    struct TimeGroup {
        std::vector<double> times;
        std::vector<int> positions;
    };

    [[nodiscard]] Matrix group_correlation(const CorrelationParams& params, const TimeGroup& group) const;

    const RepeatedMeasuresData& data_;
    Parameterization parameterization_;
    int threads_;
    double d_min_ = 1.0;
    double d_max_ = 1.0;
    std::vector<TimeGroup> groups_;
    std::vector<std::size_t> subject_group_;
    std::vector<std::size_t> summation_order_;
};

/// Convenience wrappers around ProfileLikelihood.
ProfileResult profile(const RepeatedMeasuresData& data, const CorrelationParams& params, Criterion criterion);
double profile_loglik(const RepeatedMeasuresData& data, const CorrelationParams& params, Criterion criterion);

struct FitOptions {
    /// Points per axis of the coarse scan.
    int grid_points = 21;
    /// Upper cap for rho_l, tau and rho_a.
    double rho_cap = 0.99;
    /// delta is searched on [0, delta_cap_multiplier * (d_max - d_min)].
    double delta_cap_multiplier = 5.0;
    int max_iterations = 2000;
    /// Relative objective tolerance of the simplex refinement.
    double tolerance = 1e-12;
    /// Simplex vertex tolerance on the unconstrained scale.
    double x_tolerance = 1e-7;
    /// Widen the ARMA(1,1) box to (-rho_cap, rho_cap)^2.
    bool allow_negative_arma = false;
    int threads = 1;
};

/// Distance of an estimate from a box edge below which it is flagged.
inline constexpr double kBoundaryTolerance = 1e-6;

struct FitResult {
    Parameterization parameterization = Parameterization::Lear;
    Criterion criterion = Criterion::Ml;
    std::variant<LearParams, Arma11Params> estimates;
    Vector beta;
    double max_loglik = 0.0;
    bool converged = false;
    int iterations = 0;
    int evaluations = 0;
    /// Best value of the coarse scan; never above max_loglik.
    double grid_best_loglik = 0.0;
    /// Subset of rho_at_lower, rho_at_upper_cap, delta_at_lower,
    /// delta_at_upper_cap (LEAR) or tau_at_lower, tau_at_upper_cap,
    /// rho_a_at_lower, rho_a_at_upper_cap (ARMA(1,1)).
    std::vector<std::string> boundary_flags;
    /// False when every within-subject distance is the same (d_max == d_min):
    /// delta (or rho_a) does not enter the likelihood and is held at its
    /// compound-symmetry value instead of being estimated.
    bool second_parameter_identified = true;
    /// ARMA(1,1) estimate with a negative tau or rho_a.
    bool outside_lear_image = false;
    /// Upper end of the search box for the second parameter.
    double second_parameter_cap = 0.0;
};

/// Coarse grid scan followed by simplex refinement on a logit/log scale.
/// ARMA11 requires an equally spaced grid; its lags are measured in units
/// of the common spacing. Throws FitFailed when no scan point is evaluable.
FitResult fit(const RepeatedMeasuresData& data, Parameterization parameterization, Criterion criterion,
              const FitOptions& options = {});

/// sigma2 * Gamma_i at the fitted estimates.
Matrix implied_covariance(const RepeatedMeasuresData& data, const FitResult& result, std::size_t subject);

/// Thresholds used to call the two fits in agreement.
inline constexpr double kLoglikAgreement = 1e-4;
inline constexpr double kCovarianceAgreement = 1e-3;

struct ComparisonReport {
    Criterion criterion = Criterion::Ml;
    FitResult lear;
    FitResult arma;
    /// Subject with the most measurements (first on ties).
    std::size_t reference_subject = 0;
    Matrix lear_covariance;
    Matrix arma_covariance;
    double max_covariance_difference = 0.0;
    /// max_loglik(LEAR) - max_loglik(ARMA11)
    double loglik_difference = 0.0;
    /// LEAR estimate pushed through the forward map; absent when undefined.
    std::optional<Arma11Params> lear_as_arma;
    /// ARMA(1,1) estimate pulled back to LEAR; absent when it has no preimage.
    std::optional<LearParams> arma_as_lear;
    bool agree = false;
    std::vector<std::string> discrepancies;
};

/// Fits both parameterizations to the same data and reports how far the
/// results are apart. Disagreements are listed, never suppressed.
ComparisonReport compare_parameterizations(const RepeatedMeasuresData& data, Criterion criterion,
                                           const FitOptions& options = {});

}  // namespace lear
