#include "lear/nelder_mead.hpp"

#include <doctest.h>

#include <cmath>

using lear::nelder_mead;
using lear::NelderMeadOptions;

TEST_CASE("quadratic bowl") {
    NelderMeadOptions opt;
    opt.initial_step = {0.5, 0.5};
    const auto r = nelder_mead(
        [](const std::vector<double>& x) { return (x[0] - 1.0) * (x[0] - 1.0) + 3.0 * (x[1] + 2.0) * (x[1] + 2.0); },
        {5.0, 5.0}, opt);
    CHECK(r.converged);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.x[1] == doctest::Approx(-2.0).epsilon(1e-6));
    CHECK(r.value < 1e-12);
}

TEST_CASE("rosenbrock") {
    NelderMeadOptions opt;
    opt.max_iterations = 5000;
    opt.initial_step = {0.5, 0.5};
    const auto r = nelder_mead(
        [](const std::vector<double>& x) {
            return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
        },
        {-1.2, 1.0}, opt);
    CHECK(r.converged);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("bounds are respected and the boundary optimum is found") {
    NelderMeadOptions opt;
    opt.lower = {0.0, 0.0};
    opt.upper = {1.0, 1.0};
    opt.initial_step = {0.2, 0.2};
    const auto r = nelder_mead([](const std::vector<double>& x) { return x[0] + (x[1] - 0.5) * (x[1] - 0.5); },
                               {0.5, 0.9}, opt);
    CHECK(r.converged);
    CHECK(r.x[0] == 0.0);
    CHECK(r.x[1] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("non-finite values are treated as infeasible") {
    NelderMeadOptions opt;
    opt.initial_step = {0.5};
    const auto r = nelder_mead(
        [](const std::vector<double>& x) { return x[0] < 0.0 ? NAN : (x[0] - 0.3) * (x[0] - 0.3); }, {2.0}, opt);
    CHECK(r.x[0] == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("iteration limit reports non-convergence") {
    NelderMeadOptions opt;
    opt.max_iterations = 3;
    const auto r = nelder_mead([](const std::vector<double>& x) { return x[0] * x[0] + x[1] * x[1]; }, {10.0, 10.0}, opt);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 3);
}
