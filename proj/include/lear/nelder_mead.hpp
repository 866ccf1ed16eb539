#pragma once

#include <functional>
#include <vector>

namespace lear {

struct NelderMeadOptions {
    int max_iterations = 1000;
    /// Stop once the spread of objective values is below
    /// f_tolerance * (1 + |f_best|) and every vertex lies within x_tolerance
    /// of the best one (max-norm).
    double f_tolerance = 1e-12;
    double x_tolerance = 1e-7;
    /// Initial simplex edge along each coordinate.
    std::vector<double> initial_step;
    /// Vertices are projected onto [lower, upper] coordinatewise when set.
    std::vector<double> lower;
    std::vector<double> upper;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

/// Minimizes `objective` with the Lagarias et al. variant of the
/// Nelder-Mead simplex (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). Non-finite objective values are treated as +inf.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                             std::vector<double> start, const NelderMeadOptions& options);

}  // namespace lear
