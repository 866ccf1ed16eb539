#pragma once

#include "lear/core.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lear {

/// How the fixed-effect design X_i is formed from a subject's times.
enum class DesignRule {
    Intercept,            ///< single column of ones
    InterceptLinearTime,  ///< [1, t]
    UserSupplied,         ///< caller provides X_i
};

std::string_view design_rule_name(DesignRule rule) noexcept;
DesignRule parse_design_rule(std::string_view name);

/// X_i for the built-in rules. Throws InvalidData for UserSupplied.
Matrix design_matrix(DesignRule rule, std::span<const double> times);

struct SubjectData {
    std::string id;
    std::vector<double> times;
    Vector y;
    Matrix x;
};

/// N independent subjects with their own response vector, design matrix and
/// times. Subjects may have different p_i; every X_i has the same q columns
/// and the stacked design has full column rank.
class RepeatedMeasuresData {
public:
    explicit RepeatedMeasuresData(std::vector<SubjectData> subjects);

    [[nodiscard]] const std::vector<SubjectData>& subjects() const noexcept { return subjects_; }
    [[nodiscard]] const SubjectData& subject(std::size_t i) const { return subjects_.at(i); }
    [[nodiscard]] std::size_t subject_count() const noexcept { return subjects_.size(); }
    [[nodiscard]] Eigen::Index q() const noexcept { return q_; }
    [[nodiscard]] Eigen::Index total_observations() const noexcept { return n_; }

    /// Pooled measurement grid; absent when no subject has two measurements.
    [[nodiscard]] const std::optional<MeasurementGrid>& grid() const noexcept { return grid_; }

    /// Grid or DegenerateGrid.
    [[nodiscard]] const MeasurementGrid& require_grid() const;

private:
    std::vector<SubjectData> subjects_;
    Eigen::Index q_ = 0;
    Eigen::Index n_ = 0;
    std::optional<MeasurementGrid> grid_;
};

}  // namespace lear
