#pragma once

#include "lear/core.hpp"

#include <optional>
#include <vector>

namespace lear {

/// Relative tolerance used when judging equal spacing and integer lags.
inline constexpr double kSpacingTolerance = 1e-9;

/// Whether a grid admits the exact ARMA(1,1) form. The integer and d_min
/// flags are evaluated on distances measured in units of the common
/// spacing when one exists, and on raw distances otherwise.
struct SpecialCaseReport {
    bool equally_spaced = false;
    bool integer_distances = false;
    bool dmin_is_one = false;
    std::optional<double> spacing;
    bool eligible = false;
};

SpecialCaseReport check_special_case(const MeasurementGrid& grid);

/// A grid re-expressed in units of its common spacing (d_min = 1, integer
/// distances). Correlation parameters fitted on the normalized grid describe
/// correlation at integer lags; `spacing` converts a lag back to original units.
struct NormalizedGrid {
    MeasurementGrid grid;
    double spacing;
};

/// Throws NotSpecialCase unless the grid has one common spacing.
NormalizedGrid normalize_grid(const MeasurementGrid& grid);

/// Integer lag positions of one subject on an equally spaced grid, relative
/// to that subject's first measurement.
std::vector<int> lag_positions(const MeasurementGrid& grid, std::size_t subject, double spacing);

/// delta normalized by the distance range.
struct DeltaD {
    double value;
};

/// Throws DegenerateRange when d_max == d_min.
DeltaD normalized_delta(double delta, double d_min, double d_max);

/// Distance constants the LEAR <-> ARMA(1,1) maps depend on. For a
/// normalized grid spacing == d_min == 1.
struct GridScale {
    double d_min;
    double d_max;
    double spacing;
};

/// Scale of an eligible grid. Throws NotSpecialCase otherwise.
GridScale grid_scale(const MeasurementGrid& grid);

struct ArmaImage {
    Arma11Params params;
    /// False when rho_l == 0: every rho_a gives the identity correlation,
    /// and rho_a is reported as 0 by convention.
    bool rho_a_identifiable = true;
};

/// tau = rho_l^(d_min + delta_d (h - d_min)), rho_a = rho_l^(delta_d h) with
/// h the spacing; with h = d_min = 1 this is tau = rho_l, rho_a = rho_l^delta_d.
/// Every ARMA(1,1) entry then equals the LEAR entry at the same lag.
ArmaImage lear_to_arma(const LearParams& params, const GridScale& scale);
ArmaImage lear_to_arma(const LearParams& params, const MeasurementGrid& grid);

/// Inverse map. Throws Unidentifiable when tau == 0 and OutsideLearImage
/// when (tau, rho_a) has no LEAR preimage (negative or >= 1 tau, rho_a
/// outside (0, 1]).
LearParams arma_to_lear(const Arma11Params& params, const GridScale& scale);
LearParams arma_to_lear(const Arma11Params& params, const MeasurementGrid& grid);

/// Largest |lear_covariance - arma11_covariance(lear_to_arma)| over all
/// subjects of an eligible grid.
double max_reparam_difference(const LearParams& params, const MeasurementGrid& grid);

}  // namespace lear
