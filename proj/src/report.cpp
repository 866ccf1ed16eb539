#include "lear/report.hpp"

#include "lear/error.hpp"

namespace lear {

Json to_json(const LearParams& params) {
    return Json{{"sigma2", params.sigma2}, {"rho_l", params.rho_l}, {"delta", params.delta}};
}

Json to_json(const Arma11Params& params) {
    return Json{{"sigma2", params.sigma2}, {"tau", params.tau}, {"rho_a", params.rho_a}};
}

Json to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Json to_json(const SpecialCaseReport& report, const MeasurementGrid& grid) {
    Json doc{{"schema_version", kSchemaVersion},
             {"kind", "special_case_report"},
             {"equally_spaced", report.equally_spaced},
             {"integer_distances", report.integer_distances},
             {"dmin_is_one", report.dmin_is_one},
             {"spacing", nullptr},
             {"eligible", report.eligible},
             {"d_min", grid.d_min()},
             {"d_max", grid.d_max()}};
    if (report.spacing) {
        doc["spacing"] = *report.spacing;
    }
    return doc;
}

Json to_json(const FitResult& result) {
    Json beta = Json::array();
    for (Eigen::Index i = 0; i < result.beta.size(); ++i) {
        beta.push_back(result.beta(i));
    }
    Json estimates = std::visit([](const auto& p) { return to_json(p); }, result.estimates);
    return Json{{"schema_version", kSchemaVersion},
                {"kind", "fit_result"},
                {"parameterization", parameterization_name(result.parameterization)},
                {"criterion", criterion_name(result.criterion)},
                {"estimates", std::move(estimates)},
                {"beta", std::move(beta)},
                {"max_loglik", result.max_loglik},
                {"converged", result.converged},
                {"iterations", result.iterations},
                {"evaluations", result.evaluations},
                {"grid_best_loglik", result.grid_best_loglik},
                {"boundary_flags", result.boundary_flags},
                {"second_parameter_identified", result.second_parameter_identified},
                {"second_parameter_cap", result.second_parameter_cap},
                {"outside_lear_image", result.outside_lear_image}};
}

Json to_json(const ComparisonReport& report, const RepeatedMeasuresData& data) {
    Json doc{{"schema_version", kSchemaVersion},
             {"kind", "comparison_report"},
             {"criterion", criterion_name(report.criterion)},
             {"lear", to_json(report.lear)},
             {"arma11", to_json(report.arma)},
             {"reference_subject", data.subject(report.reference_subject).id},
             {"reference_subject_index", report.reference_subject},
             {"lear_covariance", to_json(report.lear_covariance)},
             {"arma11_covariance", to_json(report.arma_covariance)},
             {"max_covariance_difference", report.max_covariance_difference},
             {"loglik_difference", report.loglik_difference},
             {"lear_as_arma11", nullptr},
             {"arma11_as_lear", nullptr},
             {"thresholds", Json{{"loglik", kLoglikAgreement}, {"covariance", kCovarianceAgreement}}},
             {"agree", report.agree},
             {"discrepancies", report.discrepancies}};
    if (report.lear_as_arma) {
        doc["lear_as_arma11"] = to_json(*report.lear_as_arma);
    }
    if (report.arma_as_lear) {
        doc["arma11_as_lear"] = to_json(*report.arma_as_lear);
    }
    return doc;
}

namespace {

const Json& require(const Json& doc, const char* key) {
    if (!doc.is_object() || !doc.contains(key)) {
        throw Error(ErrorCode::InvalidSpec, std::string("missing field '") + key + "'");
    }
    return doc.at(key);
}

double number(const Json& doc, const char* key) {
    const Json& v = require(doc, key);
    if (!v.is_number()) {
        throw Error(ErrorCode::InvalidSpec, std::string("field '") + key + "' must be a number");
    }
    return v.get<double>();
}

std::vector<double> number_list(const Json& v, const std::string& what) {
    if (!v.is_array()) {
        throw Error(ErrorCode::InvalidSpec, what + " must be an array of numbers");
    }
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) {
            throw Error(ErrorCode::InvalidSpec, what + " must be an array of numbers");
        }
        out.push_back(x.get<double>());
    }
    return out;
}

Matrix matrix_from(const Json& v, const std::string& what) {
    if (!v.is_array() || v.empty()) {
        throw Error(ErrorCode::InvalidSpec, what + " must be a non-empty array of rows");
    }
    const auto rows = static_cast<Eigen::Index>(v.size());
    const auto first = number_list(v.front(), what);
    Matrix m(rows, static_cast<Eigen::Index>(first.size()));
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto row = number_list(v[static_cast<std::size_t>(i)], what);
        if (static_cast<Eigen::Index>(row.size()) != m.cols()) {
            throw Error(ErrorCode::InvalidSpec, what + " rows differ in length");
        }
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            m(i, j) = row[static_cast<std::size_t>(j)];
        }
    }
    return m;
}

}  // namespace

namespace {

SimSpec parse_sim_spec(const Json& doc) {
    if (!doc.is_object()) {
        throw Error(ErrorCode::InvalidSpec, "simulation spec must be a JSON object");
    }
    if (doc.contains("schema_version") && doc.at("schema_version") != kSchemaVersion) {
        throw Error(ErrorCode::InvalidSpec, "unsupported schema_version");
    }
    SimSpec spec;
    const Json& n = require(doc, "n_subjects");
    if (!n.is_number_integer() || n.get<long long>() < 1) {
        throw Error(ErrorCode::InvalidSpec, "n_subjects must be a positive integer");
    }
    spec.n_subjects = n.get<std::size_t>();

    if (doc.contains("time_templates")) {
        for (const auto& t : doc.at("time_templates")) {
            spec.time_templates.push_back(number_list(t, "time_templates"));
        }
    } else {
        // A flat list is one template shared by every subject.
        const Json& times = require(doc, "times");
        if (times.is_array() && !times.empty() && times.front().is_array()) {
            for (const auto& t : times) {
                spec.time_templates.push_back(number_list(t, "times"));
            }
        } else {
            spec.time_templates.push_back(number_list(times, "times"));
        }
    }

    const auto beta = number_list(require(doc, "beta"), "beta");
    spec.beta = Eigen::Map<const Vector>(beta.data(), static_cast<Eigen::Index>(beta.size()));
    spec.design = doc.contains("design") ? parse_design_rule(doc.at("design").get<std::string>())
                                         : DesignRule::Intercept;
    if (spec.design == DesignRule::UserSupplied) {
        for (const auto& m : require(doc, "design_matrices")) {
            spec.user_design.push_back(matrix_from(m, "design_matrices"));
        }
    }

    const Json& cov = require(doc, "covariance");
    const std::string model = require(cov, "model").get<std::string>();
    if (model == "lear") {
        spec.covariance = LearParams{number(cov, "sigma2"), number(cov, "rho_l"), number(cov, "delta")};
    } else if (model == "arma11") {
        spec.covariance = Arma11Params{number(cov, "sigma2"), number(cov, "tau"), number(cov, "rho_a")};
    } else {
        throw Error(ErrorCode::InvalidSpec, "covariance.model must be 'lear' or 'arma11'");
    }

    const Json& seed = require(doc, "seed");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
        throw Error(ErrorCode::InvalidSpec, "seed must be a non-negative 64-bit integer");
    }
    spec.seed = seed.get<std::uint64_t>();
    validate(spec);
    return spec;
}

}  // namespace

SimSpec sim_spec_from_json(const Json& doc) {
    try {
        return parse_sim_spec(doc);
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, std::string("malformed simulation spec: ") + e.what());
    }
}

Json to_json(const SimSpec& spec) {
    Json templates = Json::array();
    for (const auto& t : spec.time_templates) {
        templates.push_back(t);
    }
    Json beta = Json::array();
    for (Eigen::Index i = 0; i < spec.beta.size(); ++i) {
        beta.push_back(spec.beta(i));
    }
    Json doc{{"schema_version", kSchemaVersion},
             {"n_subjects", spec.n_subjects},
             {"seed", spec.seed},
             {"time_templates", std::move(templates)},
             {"beta", std::move(beta)},
             {"design", design_rule_name(spec.design)}};
    if (spec.design == DesignRule::UserSupplied) {
        Json mats = Json::array();
        for (const auto& m : spec.user_design) {
            mats.push_back(to_json(m));
        }
        doc["design_matrices"] = std::move(mats);
    }
    if (const auto* lear = std::get_if<LearParams>(&spec.covariance)) {
        Json c = to_json(*lear);
        c["model"] = "lear";
        doc["covariance"] = std::move(c);
    } else {
        Json c = to_json(std::get<Arma11Params>(spec.covariance));
        c["model"] = "arma11";
        doc["covariance"] = std::move(c);
    }
    return doc;
}

}  // namespace lear
