#include "lear/error.hpp"
#include "lear/estimation.hpp"
#include "lear/reparam.hpp"
#include "lear/sim.hpp"

#include <doctest.h>

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>

using namespace lear;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected lear::Error");
    return ErrorCode::IoError;
}

RepeatedMeasuresData simulated(std::size_t n, std::vector<double> times, LearParams truth, std::uint64_t seed,
                               DesignRule design = DesignRule::Intercept) {
    SimSpec spec;
    spec.n_subjects = n;
    spec.time_templates = {std::move(times)};
    spec.design = design;
    spec.beta = design == DesignRule::Intercept ? Vector::Constant(1, 2.0) : Vector{{2.0, -0.5}};
    spec.covariance = truth;
    spec.seed = seed;
    return simulate(spec);
}

RepeatedMeasuresData unbalanced(std::uint64_t seed) {
    SimSpec spec;
    spec.n_subjects = 40;
    spec.time_templates = {{1, 2, 3, 4, 5}, {2, 3, 4}, {1, 2}, {3, 4, 5, 6}};
    spec.design = DesignRule::InterceptLinearTime;
    spec.beta = Vector{{1.0, 0.3}};
    spec.covariance = LearParams{1.5, 0.6, 3.0};
    spec.seed = seed;
    return simulate(spec);
}

// Empty when the correlation matrices leave the positive definite cone.
std::optional<double> try_loglik(const RepeatedMeasuresData& data, const CorrelationParams& params,
                                 Criterion criterion) {
    try {
        return profile_loglik(data, params, criterion);
    } catch (const Error& e) {
        REQUIRE(e.code() == ErrorCode::NotPositiveDefinite);
        return std::nullopt;
    }
}

// Dense whole-sample likelihood: block-diagonal V, LU determinants and
// explicit inverse. Shares nothing with the per-subject Cholesky path.
double dense_loglik(const RepeatedMeasuresData& data, const std::vector<Matrix>& gammas, Criterion criterion) {
    const Eigen::Index n = data.total_observations();
    const Eigen::Index q = data.q();
    Matrix gamma = Matrix::Zero(n, n);
    Matrix x(n, q);
    Vector y(n);
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < data.subject_count(); ++i) {
        const auto& s = data.subject(i);
        const auto p = s.y.size();
        gamma.block(row, row, p, p) = gammas[i];
        x.middleRows(row, p) = s.x;
        y.segment(row, p) = s.y;
        row += p;
    }
    const Matrix gi = gamma.inverse();
    const Matrix info = x.transpose() * gi * x;
    const Vector beta = info.inverse() * (x.transpose() * gi * y);
    const Vector r = y - x * beta;
    const double quad = r.dot(gi * r);
    const double m = criterion == Criterion::Ml ? double(n) : double(n - q);
    const double s2 = quad / m;
    const Matrix v = s2 * gamma;
    const double log_det_v = std::log(v.determinant());
    const double two_pi = 2.0 * std::numbers::pi;
    if (criterion == Criterion::Ml) {
        return -0.5 * (double(n) * std::log(two_pi) + log_det_v + r.dot(v.inverse() * r));
    }
    const Matrix info_v = x.transpose() * v.inverse() * x;
    return -0.5 * (m * std::log(two_pi) + log_det_v + std::log(info_v.determinant()) + r.dot(v.inverse() * r));
}

}  // namespace

TEST_CASE("single observation with exact fit is a singular fit") {
    SubjectData s{"a", {1.0}, Vector::Constant(1, 3.5), Matrix::Ones(1, 1)};
    const RepeatedMeasuresData data({s});
    CHECK(code_of([&] { profile_loglik(data, LearCorrelation{0.5, 1.0}, Criterion::Ml); }) == ErrorCode::SingularFit);
}

TEST_CASE("one observation per subject matches the iid normal closed form") {
    const std::vector<double> ys{1.2, -0.3, 0.8, 2.5, 1.9, 0.1, -1.4};
    std::vector<SubjectData> subjects;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        subjects.push_back({std::to_string(i), {0.0}, Vector::Constant(1, ys[i]), Matrix::Ones(1, 1)});
    }
    const RepeatedMeasuresData data(subjects);
    double mean = 0.0;
    for (double y : ys) mean += y;
    mean /= double(ys.size());
    double ss = 0.0;
    for (double y : ys) ss += (y - mean) * (y - mean);
    const double m = double(ys.size());
    const double s2 = ss / m;
    const double closed = -(m / 2.0) * (std::log(2.0 * std::numbers::pi * s2) + 1.0);

    const auto pr = profile(data, LearCorrelation{0.7, 2.0}, Criterion::Ml);
    CHECK(pr.loglik == doctest::Approx(closed).epsilon(1e-13));
    CHECK(pr.sigma2 == doctest::Approx(s2).epsilon(1e-13));
    CHECK(pr.beta(0) == doctest::Approx(mean).epsilon(1e-13));
}

TEST_CASE("profile likelihood agrees with a dense whole-sample computation") {
    const auto data = unbalanced(11);
    const auto& grid = data.require_grid();
    for (auto criterion : {Criterion::Ml, Criterion::Reml}) {
        for (double rho : {0.2, 0.6, 0.9}) {
            for (double delta : {0.0, 1.3, 4.0, 6.0}) {
                std::vector<Matrix> gammas;
                for (std::size_t i = 0; i < data.subject_count(); ++i) {
                    gammas.push_back(lear_correlation({1, rho, delta}, grid, i));
                }
                const double dense = dense_loglik(data, gammas, criterion);
                const double fast = profile_loglik(data, LearCorrelation{rho, delta}, criterion);
                CHECK(fast == doctest::Approx(dense).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("likelihood is identical under the two parameterizations") {
    const auto data = simulated(50, {1, 2, 3, 4, 5}, {1.0, 0.5, 4.0}, 99);
    const auto scale = grid_scale(data.require_grid());
    const double r = scale.d_max - scale.d_min;
    for (auto criterion : {Criterion::Ml, Criterion::Reml}) {
        for (double rho : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            for (double mult : {0.0, 0.5, 1.0, 2.0, 5.0}) {
                const auto arma = lear_to_arma({1, rho, mult * r}, scale).params;
                const auto a = try_loglik(data, LearCorrelation{rho, mult * r}, criterion);
                const auto b = try_loglik(data, ArmaCorrelation{arma.tau, arma.rho_a}, criterion);
                REQUIRE(a.has_value() == b.has_value());
                if (a) {
                    CHECK(std::abs(*a - *b) < 1e-10);
                }
            }
        }
    }
}

TEST_CASE("REML and ML variance estimates differ by n / (n - q)") {
    const auto data = unbalanced(5);
    const auto ml = profile(data, LearCorrelation{0.4, 2.0}, Criterion::Ml);
    const auto reml = profile(data, LearCorrelation{0.4, 2.0}, Criterion::Reml);
    const double n = double(data.total_observations());
    const double q = double(data.q());
    CHECK(ml.quadratic_form == reml.quadratic_form);
    CHECK(reml.sigma2 / ml.sigma2 == doctest::Approx(n / (n - q)).epsilon(1e-14));
    CHECK((ml.beta - reml.beta).norm() == 0.0);
}

TEST_CASE("subject order and thread count do not change results") {
    const auto data = unbalanced(21);
    auto shuffled = data.subjects();
    std::mt19937 rng(3);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const RepeatedMeasuresData permuted(shuffled);

    for (auto criterion : {Criterion::Ml, Criterion::Reml}) {
        const auto a = profile(data, LearCorrelation{0.55, 2.2}, criterion);
        const auto b = profile(permuted, LearCorrelation{0.55, 2.2}, criterion);
        CHECK(a.loglik == b.loglik);
        CHECK(a.sigma2 == b.sigma2);
        const auto threaded = ProfileLikelihood(data, Parameterization::Lear, 4).evaluate(LearCorrelation{0.55, 2.2}, criterion);
        CHECK(threaded.loglik == a.loglik);
    }

    FitOptions opt;
    const auto fa = fit(data, Parameterization::Lear, Criterion::Reml, opt);
    const auto fb = fit(permuted, Parameterization::Lear, Criterion::Reml, opt);
    opt.threads = 3;
    const auto fc = fit(data, Parameterization::Lear, Criterion::Reml, opt);
    const auto& ea = std::get<LearParams>(fa.estimates);
    const auto& eb = std::get<LearParams>(fb.estimates);
    const auto& ec = std::get<LearParams>(fc.estimates);
    CHECK(std::abs(ea.rho_l - eb.rho_l) <= 1e-12);
    CHECK(std::abs(ea.delta - eb.delta) <= 1e-12);
    CHECK(std::abs(ea.sigma2 - eb.sigma2) <= 1e-12);
    CHECK(ea.rho_l == ec.rho_l);
    CHECK(ea.delta == ec.delta);
    CHECK(fa.max_loglik == fc.max_loglik);
}

TEST_CASE("finite-difference slopes are smooth across the interior") {
    const auto data = simulated(60, {1, 2, 3, 4, 5, 6}, {1.0, 0.5, 4.0}, 8);
    const double r = data.require_grid().range();
    auto ll = [&](double rho, double delta) { return profile_loglik(data, LearCorrelation{rho, delta}, Criterion::Ml); };
    auto slopes_agree = [](double fine, double coarse) {
        return std::isfinite(fine) && std::abs(fine - coarse) <= 1e-3 * std::max(1.0, std::abs(coarse));
    };
    for (double rho = 0.1; rho < 0.95; rho += 0.1) {
        for (double delta = 0.25 * r; delta < 2 * r; delta += 0.25 * r) {
            const double g_fine = (ll(rho + 1e-5, delta) - ll(rho - 1e-5, delta)) / 2e-5;
            const double g_coarse = (ll(rho + 1e-4, delta) - ll(rho - 1e-4, delta)) / 2e-4;
            CHECK(slopes_agree(g_fine, g_coarse));
            const double h_fine = (ll(rho, delta + 1e-5) - ll(rho, delta - 1e-5)) / 2e-5;
            const double h_coarse = (ll(rho, delta + 1e-4) - ll(rho, delta - 1e-4)) / 2e-4;
            CHECK(slopes_agree(h_fine, h_coarse));
        }
    }
}

TEST_CASE("data validation") {
    SubjectData a{"a", {1, 2}, Vector{{1.0, 2.0}}, Matrix::Ones(2, 2)};
    CHECK(code_of([&] { RepeatedMeasuresData({a}); }) == ErrorCode::RankDeficient);
    SubjectData b{"b", {1, 2}, Vector{{1.0, 2.0}}, Matrix::Ones(3, 1)};
    CHECK(code_of([&] { RepeatedMeasuresData({b}); }) == ErrorCode::InvalidData);
    SubjectData c{"c", {2, 1}, Vector{{1.0, 2.0}}, Matrix::Ones(2, 1)};
    CHECK(code_of([&] { RepeatedMeasuresData({c}); }) == ErrorCode::InvalidGrid);
    CHECK(code_of([&] { RepeatedMeasuresData(std::vector<SubjectData>{}); }) == ErrorCode::InvalidData);
}

TEST_CASE("non positive definite ARMA(1,1) points are reported") {
    const auto data = simulated(10, {1, 2, 3, 4, 5, 6, 7, 8}, {1.0, 0.5, 7.0}, 4);
    CHECK(code_of([&] { profile_loglik(data, ArmaCorrelation{-0.9, 0.9}, Criterion::Ml); }) ==
          ErrorCode::NotPositiveDefinite);
}

TEST_CASE("ARMA11 fit needs an equally spaced grid") {
    SimSpec spec;
    spec.n_subjects = 20;
    spec.time_templates = {{1, 2, 4, 7}};
    spec.beta = Vector::Constant(1, 0.0);
    spec.covariance = LearParams{1, 0.5, 2};
    const auto data = simulate(spec);
    CHECK(code_of([&] { fit(data, Parameterization::Arma11, Criterion::Ml); }) == ErrorCode::NotSpecialCase);
    const auto lear = fit(data, Parameterization::Lear, Criterion::Ml);
    CHECK(lear.converged);
}

TEST_CASE("fit recovers AR(1) truth and never loses to the scan") {
    const auto data = simulated(500, {1, 2, 3, 4, 5}, {1.0, 0.5, 3.0}, 1234);
    const auto res = fit(data, Parameterization::Lear, Criterion::Ml);
    const auto& est = std::get<LearParams>(res.estimates);
    CHECK(res.converged);
    CHECK(res.max_loglik >= res.grid_best_loglik);
    CHECK(std::abs(est.rho_l - 0.5) < 0.05);
    CHECK(std::abs(est.delta / 3.0 - 1.0) < 0.25);
    CHECK(std::abs(est.sigma2 - 1.0) < 0.1);
    CHECK(res.boundary_flags.empty());
    CHECK(res.beta.size() == 1);
}

TEST_CASE("compound-symmetry truth lands on the delta = 0 boundary") {
    const auto data = simulated(400, {1, 2, 3, 4, 5}, {1.0, 0.5, 0.0}, 77);
    const auto lear = fit(data, Parameterization::Lear, Criterion::Ml);
    const auto& est = std::get<LearParams>(lear.estimates);
    CHECK(est.delta < 0.2);
    CHECK(lear.max_loglik >= lear.grid_best_loglik);
    const auto arma = fit(data, Parameterization::Arma11, Criterion::Ml);
    CHECK(std::get<Arma11Params>(arma.estimates).rho_a > 0.9);
}

TEST_CASE("boundary flags mark an estimate on the box edge") {
    // Strong compound symmetry: the MLE sits at delta = 0 or within the flag tolerance.
    const auto data = simulated(2000, {1, 2, 3, 4}, {1.0, 0.8, 0.0}, 5);
    FitOptions opt;
    opt.rho_cap = 0.3;  // truth lies above the cap
    const auto res = fit(data, Parameterization::Lear, Criterion::Ml, opt);
    const auto& flags = res.boundary_flags;
    CHECK(std::find(flags.begin(), flags.end(), "rho_at_upper_cap") != flags.end());
    CHECK(std::get<LearParams>(res.estimates).rho_l == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("equal distances leave the second parameter unestimated") {
    const auto data = simulated(200, {1, 2}, {1.0, 0.4, 1.0}, 3);
    const auto lear = fit(data, Parameterization::Lear, Criterion::Reml);
    CHECK_FALSE(lear.second_parameter_identified);
    CHECK(std::get<LearParams>(lear.estimates).delta == 0.0);
    const auto arma = fit(data, Parameterization::Arma11, Criterion::Reml);
    CHECK_FALSE(arma.second_parameter_identified);
    CHECK(lear.max_loglik == doctest::Approx(arma.max_loglik).epsilon(1e-10));
}

TEST_CASE("widened ARMA(1,1) box reaches negative tau") {
    SimSpec spec;
    spec.n_subjects = 800;
    spec.time_templates = {{1, 2, 3, 4, 5}};
    spec.beta = Vector::Constant(1, 0.0);
    spec.covariance = Arma11Params{1.0, -0.2, 0.5};
    spec.seed = 17;
    const auto data = simulate(spec);

    FitOptions opt;
    opt.allow_negative_arma = true;
    const auto res = fit(data, Parameterization::Arma11, Criterion::Ml, opt);
    const auto& est = std::get<Arma11Params>(res.estimates);
    CHECK(est.tau < -0.1);
    CHECK(res.outside_lear_image);

    const auto narrow = fit(data, Parameterization::Arma11, Criterion::Ml);
    CHECK_FALSE(narrow.outside_lear_image);
    CHECK(narrow.max_loglik < res.max_loglik);
}

TEST_CASE("comparison report on well-conditioned data") {
    const auto data = simulated(300, {1, 2, 3, 4, 5}, {1.0, 0.5, 4.0}, 2024);
    const auto report = compare_parameterizations(data, Criterion::Reml);
    CHECK(report.agree);
    CHECK(report.discrepancies.empty());
    CHECK(std::abs(report.loglik_difference) < 1e-4);
    CHECK(report.max_covariance_difference < 1e-3);
    REQUIRE(report.arma_as_lear);
    const auto& lear = std::get<LearParams>(report.lear.estimates);
    CHECK(report.arma_as_lear->rho_l == doctest::Approx(lear.rho_l).epsilon(1e-4));
    CHECK(report.arma_as_lear->delta == doctest::Approx(lear.delta).epsilon(1e-3));
    CHECK(report.lear_covariance.rows() == 5);
}

TEST_CASE("comparison report is produced for near-unidentifiable data") {
    const auto data = simulated(3, {1, 2, 3, 4}, {1.0, 0.3, 1.0}, 6);
    const auto report = compare_parameterizations(data, Criterion::Ml);
    CHECK(std::isfinite(report.loglik_difference));
    CHECK(report.agree == (std::abs(report.loglik_difference) < kLoglikAgreement &&
                           report.max_covariance_difference < kCovarianceAgreement));
    if (!report.lear.converged) {
        CHECK(std::find(report.discrepancies.begin(), report.discrepancies.end(), "LEAR refinement did not converge") !=
              report.discrepancies.end());
    }
    if (!report.agree) {
        CHECK_FALSE(report.discrepancies.empty());
    }
}

TEST_CASE("reference subject is the longest one") {
    const auto data = unbalanced(2);
    const auto report = compare_parameterizations(data, Criterion::Ml);
    CHECK(data.subject(report.reference_subject).times.size() == 5);
}

TEST_CASE("fit option validation") {
    const auto data = simulated(20, {1, 2, 3}, {1.0, 0.5, 2.0}, 1);
    FitOptions opt;
    opt.grid_points = 1;
    CHECK(code_of([&] { fit(data, Parameterization::Lear, Criterion::Ml, opt); }) == ErrorCode::InvalidSpec);
    opt = {};
    opt.rho_cap = 1.0;
    CHECK(code_of([&] { fit(data, Parameterization::Lear, Criterion::Ml, opt); }) == ErrorCode::InvalidSpec);
}
