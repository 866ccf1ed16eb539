#include "lear/data.hpp"

#include "lear/error.hpp"

#include <Eigen/QR>

#include <cmath>

namespace lear {

std::string_view design_rule_name(DesignRule rule) noexcept {
    switch (rule) {
        case DesignRule::Intercept: return "intercept";
        case DesignRule::InterceptLinearTime: return "linear";
        case DesignRule::UserSupplied: return "user";
    }
    return "intercept";
}

DesignRule parse_design_rule(std::string_view name) {
    if (name == "intercept") return DesignRule::Intercept;
    if (name == "linear" || name == "intercept+linear-time") return DesignRule::InterceptLinearTime;
    if (name == "user" || name == "columns") return DesignRule::UserSupplied;
    throw Error(ErrorCode::InvalidSpec, "unknown design rule '" + std::string(name) + "'");
}

Matrix design_matrix(DesignRule rule, std::span<const double> times) {
    const auto p = static_cast<Eigen::Index>(times.size());
    switch (rule) {
        case DesignRule::Intercept:
            return Matrix::Ones(p, 1);
        case DesignRule::InterceptLinearTime: {
            Matrix x(p, 2);
            for (Eigen::Index j = 0; j < p; ++j) {
                x(j, 0) = 1.0;
                x(j, 1) = times[static_cast<std::size_t>(j)];
            }
            return x;
        }
        case DesignRule::UserSupplied:
            break;
    }
    throw Error(ErrorCode::InvalidData, "user-supplied design has no built-in construction");
}

RepeatedMeasuresData::RepeatedMeasuresData(std::vector<SubjectData> subjects) : subjects_(std::move(subjects)) {
    if (subjects_.empty()) {
        throw Error(ErrorCode::InvalidData, "no subjects");
    }
    q_ = subjects_.front().x.cols();
    if (q_ < 1) {
        throw Error(ErrorCode::InvalidData, "design matrix has no columns");
    }
    std::vector<std::vector<double>> times;
    times.reserve(subjects_.size());
    bool any_pair = false;
    for (std::size_t i = 0; i < subjects_.size(); ++i) {
        const auto& s = subjects_[i];
        const auto p = static_cast<Eigen::Index>(s.times.size());
        if (p < 1) {
            throw Error(ErrorCode::InvalidData, "subject '" + s.id + "' has no observations");
        }
        if (s.y.size() != p || s.x.rows() != p) {
            throw Error(ErrorCode::InvalidData, "subject '" + s.id + "': lengths of y, times and rows of X disagree");
        }
        if (s.x.cols() != q_) {
            throw Error(ErrorCode::InvalidData, "subject '" + s.id + "': design has " + std::to_string(s.x.cols()) +
                                                    " columns, expected " + std::to_string(q_));
        }
        if (!s.y.allFinite() || !s.x.allFinite()) {
            throw Error(ErrorCode::InvalidData, "subject '" + s.id + "': non-finite response or covariate");
        }
        n_ += p;
        any_pair = any_pair || p >= 2;
        times.push_back(s.times);
    }

    Matrix stacked(n_, q_);
    Eigen::Index row = 0;
    for (const auto& s : subjects_) {
        stacked.middleRows(row, s.x.rows()) = s.x;
        row += s.x.rows();
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(stacked);
    if (qr.rank() < q_) {
        throw Error(ErrorCode::RankDeficient, "stacked design has rank " + std::to_string(qr.rank()) + " < q = " +
                                                  std::to_string(q_));
    }

    if (any_pair) {
        grid_ = MeasurementGrid::build(std::move(times));
    } else {
        // Still validate per-subject times (finite).
        for (const auto& s : subjects_) {
            if (!std::isfinite(s.times.front())) {
                throw Error(ErrorCode::InvalidGrid, "subject '" + s.id + "': non-finite time");
            }
        }
    }
}

const MeasurementGrid& RepeatedMeasuresData::require_grid() const {
    if (!grid_) {
        throw Error(ErrorCode::DegenerateGrid, "no subject has two or more measurements");
    }
    return *grid_;
}

}  // namespace lear
