#include "lear/estimation.hpp"

#include "lear/error.hpp"
#include "lear/nelder_mead.hpp"
#include "lear/reparam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <thread>

namespace lear {

std::string_view parameterization_name(Parameterization p) noexcept {
    return p == Parameterization::Lear ? "lear" : "arma11";
}

std::string_view criterion_name(Criterion c) noexcept {
    return c == Criterion::Ml ? "ml" : "reml";
}

Parameterization parse_parameterization(std::string_view name) {
    if (name == "lear" || name == "LEAR") return Parameterization::Lear;
    if (name == "arma11" || name == "ARMA11" || name == "arma") return Parameterization::Arma11;
    throw Error(ErrorCode::InvalidSpec, "unknown parameterization '" + std::string(name) + "'");
}

Criterion parse_criterion(std::string_view name) {
    if (name == "ml" || name == "ML") return Criterion::Ml;
    if (name == "reml" || name == "REML") return Criterion::Reml;
    throw Error(ErrorCode::InvalidSpec, "unknown criterion '" + std::string(name) + "'");
}

namespace {

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || count < 2 * workers) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) {
            break;
        }
        pool.emplace_back([begin, end, &fn] {
            for (std::size_t i = begin; i < end; ++i) {
                fn(i);
            }
        });
    }
}

bool lexicographic_less(const double* a, Eigen::Index na, const double* b, Eigen::Index nb) {
    return std::lexicographical_compare(a, a + na, b, b + nb);
}

void validate_correlation(const CorrelationParams& params) {
    if (const auto* lear = std::get_if<LearCorrelation>(&params)) {
        require_valid(LearParams{1.0, lear->rho_l, lear->delta});
    } else {
        const auto& arma = std::get<ArmaCorrelation>(params);
        require_valid(Arma11Params{1.0, arma.tau, arma.rho_a});
    }
}

}  // namespace

ProfileLikelihood::ProfileLikelihood(const RepeatedMeasuresData& data, Parameterization parameterization, int threads)
    : data_(data), parameterization_(parameterization), threads_(std::max(1, threads)) {
    double spacing = 1.0;
    if (const auto& grid = data.grid()) {
        d_min_ = grid->d_min();
        d_max_ = grid->d_max();
        if (parameterization == Parameterization::Arma11) {
            spacing = grid_scale(*grid).spacing;
        }
    }

    std::map<std::vector<double>, std::size_t> index;
    subject_group_.resize(data.subject_count());
    for (std::size_t i = 0; i < data.subject_count(); ++i) {
        const auto& times = data.subject(i).times;
        auto [it, inserted] = index.try_emplace(times, groups_.size());
        if (inserted) {
            TimeGroup group{times, std::vector<int>(times.size(), 0)};
            if (parameterization == Parameterization::Arma11 && times.size() > 1) {
                for (std::size_t j = 0; j < times.size(); ++j) {
                    group.positions[j] = static_cast<int>(std::lround((times[j] - times.front()) / spacing));
                }
            }
            groups_.push_back(std::move(group));
        }
        subject_group_[i] = it->second;
    }

    summation_order_.resize(data.subject_count());
    for (std::size_t i = 0; i < summation_order_.size(); ++i) {
        summation_order_[i] = i;
    }
    std::stable_sort(summation_order_.begin(), summation_order_.end(), [&](std::size_t a, std::size_t b) {
        const auto& sa = data.subject(a);
        const auto& sb = data.subject(b);
        if (sa.times != sb.times) {
            return sa.times < sb.times;
        }
        if (sa.y != sb.y) {
            return lexicographic_less(sa.y.data(), sa.y.size(), sb.y.data(), sb.y.size());
        }
        return lexicographic_less(sa.x.data(), sa.x.size(), sb.x.data(), sb.x.size());
    });
}

Matrix ProfileLikelihood::group_correlation(const CorrelationParams& params, const TimeGroup& group) const {
    if (group.times.size() == 1) {
        return Matrix::Identity(1, 1);
    }
    if (const auto* lear = std::get_if<LearCorrelation>(&params)) {
        return lear_correlation(LearParams{1.0, lear->rho_l, lear->delta}, group.times, d_min_, d_max_);
    }
    const auto& arma = std::get<ArmaCorrelation>(params);
    return arma11_covariance(Arma11Params{1.0, arma.tau, arma.rho_a}, group.positions);
}

Matrix ProfileLikelihood::correlation(const CorrelationParams& params, std::size_t subject) const {
    validate_correlation(params);
    return group_correlation(params, groups_.at(subject_group_.at(subject)));
}

ProfileResult ProfileLikelihood::evaluate(const CorrelationParams& params, Criterion criterion) const {
    if (std::holds_alternative<LearCorrelation>(params) != (parameterization_ == Parameterization::Lear)) {
        throw Error(ErrorCode::InvalidParams, "correlation parameters do not match the likelihood's parameterization");
    }
    validate_correlation(params);

    struct GroupFactor {
        Eigen::LLT<Matrix> llt;
        double log_det = 0.0;
    };
    std::vector<GroupFactor> factors(groups_.size());
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        factors[g].llt = cholesky(group_correlation(params, groups_[g]));
        factors[g].log_det = 2.0 * factors[g].llt.matrixLLT().diagonal().array().log().sum();
    }

    struct Whitened {
        Matrix x;
        Vector y;
    };
    std::vector<Whitened> white(data_.subject_count());
    parallel_for(white.size(), threads_, [&](std::size_t i) {
        const auto& s = data_.subject(i);
        const auto lower = factors[subject_group_[i]].llt.matrixL();
        white[i].x = lower.solve(s.x);
        white[i].y = lower.solve(s.y);
    });

    const Eigen::Index q = data_.q();
    Matrix xtx = Matrix::Zero(q, q);
    Vector xty = Vector::Zero(q);
    double yty = 0.0;
    double log_det = 0.0;
    for (std::size_t i : summation_order_) {
        xtx.noalias() += white[i].x.transpose() * white[i].x;
        xty.noalias() += white[i].x.transpose() * white[i].y;
        yty += white[i].y.squaredNorm();
        log_det += factors[subject_group_[i]].log_det;
    }

    Eigen::LLT<Matrix> normal(xtx);
    if (normal.info() != Eigen::Success || !(normal.matrixLLT().diagonal().minCoeff() > 0.0)) {
        throw Error(ErrorCode::RankDeficient, "X' Gamma^{-1} X is singular");
    }

    ProfileResult out;
    out.beta = normal.solve(xty);
    out.log_det_gamma = log_det;

    std::vector<double> residual(white.size());
    parallel_for(white.size(), threads_,
                 [&](std::size_t i) { residual[i] = (white[i].y - white[i].x * out.beta).squaredNorm(); });
    double quad = 0.0;
    for (std::size_t i : summation_order_) {
        quad += residual[i];
    }
    out.quadratic_form = quad;

    const auto n = static_cast<double>(data_.total_observations());
    const double m = criterion == Criterion::Ml ? n : n - static_cast<double>(q);
    if (!(m > 0.0)) {
        throw Error(ErrorCode::SingularFit, "no residual degrees of freedom for REML");
    }
    if (!(quad > 64.0 * std::numeric_limits<double>::epsilon() * yty)) {
        throw Error(ErrorCode::SingularFit, "zero residual variance; the Gaussian likelihood is unbounded");
    }
    out.sigma2 = quad / m;

    const double log_two_pi_sigma2 = std::log(2.0 * std::numbers::pi * out.sigma2);
    if (criterion == Criterion::Ml) {
        out.loglik = -0.5 * (n * (log_two_pi_sigma2 + 1.0) + log_det);
    } else {
        // log det(X' (sigma2 Gamma)^{-1} X) = log det(X' Gamma^{-1} X) - q log sigma2
        const double log_det_info =
            2.0 * normal.matrixLLT().diagonal().array().log().sum() - static_cast<double>(q) * std::log(out.sigma2);
        out.loglik = -0.5 * (m * log_two_pi_sigma2 + static_cast<double>(q) * std::log(out.sigma2) + log_det + m) -
                     0.5 * log_det_info;
    }
    return out;
}

ProfileResult profile(const RepeatedMeasuresData& data, const CorrelationParams& params, Criterion criterion) {
    const auto kind = std::holds_alternative<LearCorrelation>(params) ? Parameterization::Lear : Parameterization::Arma11;
    return ProfileLikelihood(data, kind).evaluate(params, criterion);
}

double profile_loglik(const RepeatedMeasuresData& data, const CorrelationParams& params, Criterion criterion) {
    return profile(data, params, criterion).loglik;
}

namespace {

enum class AxisScale { Logit, Log };

struct Axis {
    std::string name;
    double lower;
    double upper;
    AxisScale scale;
};

constexpr double kUnboundedSpan = 40.0;

double logistic(double u) {
    return 1.0 / (1.0 + std::exp(-u));
}

double to_natural(const Axis& axis, double u) {
    if (axis.scale == AxisScale::Logit) {
        return axis.lower + (axis.upper - axis.lower) * logistic(u);
    }
    return std::min(std::exp(u), axis.upper);
}

double to_unconstrained(const Axis& axis, double x) {
    const double width = axis.upper - axis.lower;
    if (axis.scale == AxisScale::Logit) {
        const double frac = std::clamp((x - axis.lower) / width, 1e-3, 1.0 - 1e-3);
        return std::log(frac / (1.0 - frac));
    }
    return std::log(std::clamp(x, 1e-3 * axis.upper, (1.0 - 1e-3) * axis.upper));
}

std::pair<double, double> unconstrained_bounds(const Axis& axis) {
    if (axis.scale == AxisScale::Logit) {
        return {-kUnboundedSpan, kUnboundedSpan};
    }
    const double top = std::log(axis.upper);
    return {top - kUnboundedSpan, top + 2.0};
}

}  // namespace

FitResult fit(const RepeatedMeasuresData& data, Parameterization parameterization, Criterion criterion,
              const FitOptions& options) {
    if (options.grid_points < 2) {
        throw Error(ErrorCode::InvalidSpec, "grid_points must be >= 2");
    }
    if (!(options.rho_cap > 0.0 && options.rho_cap < 1.0)) {
        throw Error(ErrorCode::InvalidSpec, "rho_cap must lie in (0, 1)");
    }
    if (!(options.delta_cap_multiplier > 0.0)) {
        throw Error(ErrorCode::InvalidSpec, "delta_cap_multiplier must be > 0");
    }
    const MeasurementGrid& grid = data.require_grid();
    const ProfileLikelihood likelihood(data, parameterization, options.threads);
    const bool lear = parameterization == Parameterization::Lear;
    const bool identified = grid.range() > 0.0;

    std::vector<Axis> axes;
    double fixed_second = 0.0;
    if (lear) {
        axes.push_back({"rho", 0.0, options.rho_cap, AxisScale::Logit});
        axes.push_back({"delta", 0.0, options.delta_cap_multiplier * grid.range(), AxisScale::Log});
        fixed_second = 0.0;
    } else {
        const double lo = options.allow_negative_arma ? -options.rho_cap : 0.0;
        axes.push_back({"tau", lo, options.rho_cap, AxisScale::Logit});
        axes.push_back({"rho_a", lo, options.rho_cap, AxisScale::Logit});
        fixed_second = 1.0;
    }

    auto make_params = [&](double first, double second) -> CorrelationParams {
        if (lear) {
            return LearCorrelation{first, second};
        }
        return ArmaCorrelation{first, second};
    };
    int evaluations = 0;
    auto loglik_at = [&](double first, double second) {
        ++evaluations;
        try {
            return likelihood.evaluate(make_params(first, second), criterion).loglik;
        } catch (const Error& e) {
            if (e.code() == ErrorCode::NotPositiveDefinite) {
                return -std::numeric_limits<double>::infinity();
            }
            throw;
        }
    };

    // Coarse scan; second parameter outer so ties resolve to its smallest value.
    const int g = options.grid_points;
    auto grid_value = [&](const Axis& axis, int k) {
        return k == g - 1 ? axis.upper : axis.lower + (axis.upper - axis.lower) * k / (g - 1);
    };
    double best_ll = -std::numeric_limits<double>::infinity();
    double best_first = 0.0;
    double best_second = fixed_second;
    const int second_points = identified ? g : 1;
    for (int k2 = 0; k2 < second_points; ++k2) {
        const double second = identified ? grid_value(axes[1], k2) : fixed_second;
        for (int k1 = 0; k1 < g; ++k1) {
            const double first = grid_value(axes[0], k1);
            const double ll = loglik_at(first, second);
            if (ll > best_ll) {
                best_ll = ll;
                best_first = first;
                best_second = second;
            }
        }
    }
    if (!std::isfinite(best_ll)) {
        throw Error(ErrorCode::FitFailed, "no grid point gave a positive definite correlation matrix");
    }

    const std::size_t dims = identified ? 2 : 1;
    NelderMeadOptions nm;
    nm.max_iterations = options.max_iterations;
    nm.f_tolerance = options.tolerance;
    nm.x_tolerance = options.x_tolerance;
    nm.initial_step.assign(dims, 0.25);
    std::vector<double> start;
    for (std::size_t d = 0; d < dims; ++d) {
        const auto [lo, hi] = unconstrained_bounds(axes[d]);
        nm.lower.push_back(lo);
        nm.upper.push_back(hi);
        start.push_back(to_unconstrained(axes[d], d == 0 ? best_first : best_second));
    }
    auto natural = [&](const std::vector<double>& u) {
        return std::pair{to_natural(axes[0], u[0]), dims == 2 ? to_natural(axes[1], u[1]) : fixed_second};
    };
    const auto refined = nelder_mead(
        [&](const std::vector<double>& u) {
            const auto [first, second] = natural(u);
            return -loglik_at(first, second);
        },
        start, nm);

    auto [first, second] = natural(refined.x);
    if (!(-refined.value >= best_ll)) {
        first = best_first;
        second = best_second;
    }
    const ProfileResult at_optimum = likelihood.evaluate(make_params(first, second), criterion);

    FitResult result;
    result.parameterization = parameterization;
    result.criterion = criterion;
    if (lear) {
        result.estimates = LearParams{at_optimum.sigma2, first, second};
    } else {
        result.estimates = Arma11Params{at_optimum.sigma2, first, second};
        result.outside_lear_image = first < 0.0 || second < 0.0;
    }
    result.beta = at_optimum.beta;
    result.max_loglik = at_optimum.loglik;
    result.converged = refined.converged && std::isfinite(at_optimum.loglik);
    result.iterations = refined.iterations;
    result.evaluations = evaluations;
    result.grid_best_loglik = best_ll;
    result.second_parameter_identified = identified;
    result.second_parameter_cap = axes[1].upper;

    const double values[2] = {first, second};
    for (std::size_t d = 0; d < dims; ++d) {
        if (std::abs(values[d] - axes[d].lower) <= kBoundaryTolerance) {
            result.boundary_flags.push_back(axes[d].name + "_at_lower");
        }
        if (std::abs(values[d] - axes[d].upper) <= kBoundaryTolerance) {
            result.boundary_flags.push_back(axes[d].name + "_at_upper_cap");
        }
    }
    return result;
}

Matrix implied_covariance(const RepeatedMeasuresData& data, const FitResult& result, std::size_t subject) {
    const ProfileLikelihood likelihood(data, result.parameterization);
    if (const auto* lear = std::get_if<LearParams>(&result.estimates)) {
        return lear->sigma2 * likelihood.correlation(LearCorrelation{lear->rho_l, lear->delta}, subject);
    }
    const auto& arma = std::get<Arma11Params>(result.estimates);
    return arma.sigma2 * likelihood.correlation(ArmaCorrelation{arma.tau, arma.rho_a}, subject);
}

ComparisonReport compare_parameterizations(const RepeatedMeasuresData& data, Criterion criterion,
                                           const FitOptions& options) {
    const GridScale scale = grid_scale(data.require_grid());

    ComparisonReport report;
    report.criterion = criterion;
    report.lear = fit(data, Parameterization::Lear, criterion, options);
    report.arma = fit(data, Parameterization::Arma11, criterion, options);

    for (std::size_t i = 1; i < data.subject_count(); ++i) {
        if (data.subject(i).times.size() > data.subject(report.reference_subject).times.size()) {
            report.reference_subject = i;
        }
    }
    report.lear_covariance = implied_covariance(data, report.lear, report.reference_subject);
    report.arma_covariance = implied_covariance(data, report.arma, report.reference_subject);
    report.max_covariance_difference = (report.lear_covariance - report.arma_covariance).cwiseAbs().maxCoeff();
    report.loglik_difference = report.lear.max_loglik - report.arma.max_loglik;

    const auto& lear_est = std::get<LearParams>(report.lear.estimates);
    const auto& arma_est = std::get<Arma11Params>(report.arma.estimates);
    if (scale.d_max > scale.d_min) {
        const ArmaImage image = lear_to_arma(lear_est, scale);
        report.lear_as_arma = image.params;
        if (!image.rho_a_identifiable) {
            report.discrepancies.push_back("LEAR estimate has rho_l = 0; its ARMA(1,1) rho_a is unidentifiable");
        }
        try {
            report.arma_as_lear = arma_to_lear(arma_est, scale);
        } catch (const Error& e) {
            report.discrepancies.push_back("ARMA(1,1) estimate has no LEAR preimage: " + std::string(e.what()));
        }
    }

    const bool loglik_ok = std::abs(report.loglik_difference) < kLoglikAgreement;
    const bool cov_ok = report.max_covariance_difference < kCovarianceAgreement;
    report.agree = loglik_ok && cov_ok;
    if (!loglik_ok) {
        report.discrepancies.push_back("maximized log-likelihoods differ by " +
                                       std::to_string(report.loglik_difference));
    }
    if (!cov_ok) {
        report.discrepancies.push_back("implied covariance matrices differ by up to " +
                                       std::to_string(report.max_covariance_difference));
    }
    if (!report.lear.converged) {
        report.discrepancies.push_back("LEAR refinement did not converge");
    }
    if (!report.arma.converged) {
        report.discrepancies.push_back("ARMA(1,1) refinement did not converge");
    }
    return report;
}

}  // namespace lear
