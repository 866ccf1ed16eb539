#include "lear/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace lear {

namespace {

using Point = std::vector<double>;

struct Vertex {
    Point x;
    double f;
};

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective, Point start,
                             const NelderMeadOptions& options) {
    const std::size_t n = start.size();
    if (n == 0) {
        throw std::invalid_argument("nelder_mead: empty start point");
    }
    const bool bounded = !options.lower.empty();
    if (bounded && (options.lower.size() != n || options.upper.size() != n)) {
        throw std::invalid_argument("nelder_mead: bounds dimension mismatch");
    }

    NelderMeadResult result;
    auto project = [&](Point& x) {
        if (bounded) {
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = std::clamp(x[i], options.lower[i], options.upper[i]);
            }
        }
    };
    auto eval = [&](const Point& x) {
        ++result.evaluations;
        const double f = objective(x);
        return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
    };

    project(start);
    std::vector<Vertex> simplex;
    simplex.reserve(n + 1);
    simplex.push_back({start, eval(start)});
    for (std::size_t i = 0; i < n; ++i) {
        Point x = start;
        double step = options.initial_step.size() == n ? options.initial_step[i] : 0.1 * std::max(1.0, std::abs(x[i]));
        x[i] += step;
        project(x);
        if (x[i] == start[i]) {
            // Start sits on the upper bound; step inward instead.
            x[i] = start[i] - step;
            project(x);
        }
        simplex.push_back({x, eval(x)});
    }

    auto order = [&] {
        // Stable: among ties, older vertices keep priority.
        std::stable_sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    };
    auto converged = [&] {
        const double spread = simplex.back().f - simplex.front().f;
        if (!(spread <= options.f_tolerance * (1.0 + std::abs(simplex.front().f)))) {
            return false;
        }
        for (std::size_t v = 1; v <= n; ++v) {
            for (std::size_t i = 0; i < n; ++i) {
                if (std::abs(simplex[v].x[i] - simplex[0].x[i]) > options.x_tolerance) {
                    return false;
                }
            }
        }
        return true;
    };
    auto along = [&](const Point& centroid, const Point& worst, double coef) {
        Point x(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = centroid[i] + coef * (centroid[i] - worst[i]);
        }
        project(x);
        return x;
    };

    order();
    while (result.iterations < options.max_iterations) {
        if (converged()) {
            result.converged = true;
            break;
        }
        ++result.iterations;

        Point centroid(n, 0.0);
        for (std::size_t v = 0; v < n; ++v) {
            for (std::size_t i = 0; i < n; ++i) {
                centroid[i] += simplex[v].x[i];
            }
        }
        for (double& c : centroid) {
            c /= static_cast<double>(n);
        }
        const Vertex& worst = simplex.back();
        const double f_best = simplex.front().f;
        const double f_second_worst = simplex[n - 1].f;

        Point xr = along(centroid, worst.x, 1.0);
        const double fr = eval(xr);
        if (fr < f_best) {
            Point xe = along(centroid, worst.x, 2.0);
            const double fe = eval(xe);
            simplex.back() = fe < fr ? Vertex{std::move(xe), fe} : Vertex{std::move(xr), fr};
        } else if (fr < f_second_worst) {
            simplex.back() = {std::move(xr), fr};
        } else {
            bool shrink = false;
            if (fr < worst.f) {
                Point xc = along(centroid, worst.x, 0.5);
                const double fc = eval(xc);
                if (fc <= fr) {
                    simplex.back() = {std::move(xc), fc};
                } else {
                    shrink = true;
                }
            } else {
                Point xcc = along(centroid, worst.x, -0.5);
                const double fcc = eval(xcc);
                if (fcc < worst.f) {
                    simplex.back() = {std::move(xcc), fcc};
                } else {
                    shrink = true;
                }
            }
            if (shrink) {
                const Point best = simplex.front().x;
                for (std::size_t v = 1; v <= n; ++v) {
                    for (std::size_t i = 0; i < n; ++i) {
                        simplex[v].x[i] = best[i] + 0.5 * (simplex[v].x[i] - best[i]);
                    }
                    project(simplex[v].x);
                    simplex[v].f = eval(simplex[v].x);
                }
            }
        }
        order();
    }
    if (!result.converged && converged()) {
        result.converged = true;
    }

    result.x = simplex.front().x;
    result.value = simplex.front().f;
    return result;
}

}  // namespace lear
