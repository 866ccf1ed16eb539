#include "lear/core.hpp"
#include "lear/error.hpp"
#include "lear/estimation.hpp"
#include "lear/io.hpp"
#include "lear/reparam.hpp"
#include "lear/report.hpp"
#include "lear/sim.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace lear;

namespace {

using Times = std::vector<std::vector<double>>;

MeasurementGrid grid_from(const Times& times, std::optional<double> d_min, std::optional<double> d_max) {
    MeasurementGrid grid = build_grid(times);
    if (d_min || d_max) {
        grid = grid.with_extremes(d_min.value_or(grid.d_min()), d_max.value_or(grid.d_max()));
    }
    return grid;
}

RepeatedMeasuresData data_from(const std::vector<std::string>& subject, const std::vector<double>& time,
                               const std::vector<double>& y, const std::string& design,
                               const std::vector<std::vector<double>>& covariates) {
    if (time.size() != subject.size() || y.size() != subject.size()) {
        throw Error(ErrorCode::InvalidData, "subject, time and y must have the same length");
    }
    if (!covariates.empty() && covariates.size() != subject.size()) {
        throw Error(ErrorCode::InvalidData, "covariates need one row per measurement");
    }
    std::vector<LongRecord> records(subject.size());
    for (std::size_t i = 0; i < subject.size(); ++i) {
        records[i] = {subject[i], time[i], y[i], covariates.empty() ? std::vector<double>{} : covariates[i], i + 1};
    }
    return assemble_long(records, parse_design_rule(design));
}

FitOptions options_from(int grid_points, double rho_cap, double delta_cap, int max_iter, double tol,
                        bool allow_negative, int threads) {
    FitOptions o;
    o.grid_points = grid_points;
    o.rho_cap = rho_cap;
    o.delta_cap_multiplier = delta_cap;
    o.max_iterations = max_iter;
    o.tolerance = tol;
    o.allow_negative_arma = allow_negative;
    o.threads = threads;
    return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "LEAR correlation model: matrices, ARMA(1,1) reparameterization, simulation and fitting";

    static py::handle error_type = py::exception<Error>(m, "LearError").release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const Error& e) {
            py::object err = py::reinterpret_borrow<py::object>(error_type)(e.what());
            err.attr("code") = std::string(error_name(e.code()));
            err.attr("exit_code") = exit_code(e.code());
            PyErr_SetObject(error_type.ptr(), err.ptr());
        }
    });

    m.attr("SCHEMA_VERSION") = kSchemaVersion;

    m.def(
        "_lear_correlation",
        [](double rho_l, double delta, const Times& times, std::size_t subject, std::optional<double> d_min,
           std::optional<double> d_max) {
            return lear_correlation({1.0, rho_l, delta}, grid_from(times, d_min, d_max), subject);
        },
        py::arg("rho_l"), py::arg("delta"), py::arg("times"), py::arg("subject") = 0, py::arg("d_min") = py::none(),
        py::arg("d_max") = py::none());

    m.def(
        "_lear_covariance",
        [](double sigma2, double rho_l, double delta, const Times& times, std::size_t subject,
           std::optional<double> d_min, std::optional<double> d_max) {
            return lear_covariance({sigma2, rho_l, delta}, grid_from(times, d_min, d_max), subject);
        },
        py::arg("sigma2"), py::arg("rho_l"), py::arg("delta"), py::arg("times"), py::arg("subject") = 0,
        py::arg("d_min") = py::none(), py::arg("d_max") = py::none());

    m.def(
        "arma11_covariance",
        [](double sigma2, double tau, double rho_a, int p) { return arma11_covariance({sigma2, tau, rho_a}, p); },
        py::arg("sigma2"), py::arg("tau"), py::arg("rho_a"), py::arg("p"));

    m.def(
        "_check_special_case",
        [](const Times& times) {
            const auto grid = build_grid(times);
            return to_json(check_special_case(grid), grid).dump();
        },
        py::arg("times"));

    m.def(
        "_lear_to_arma",
        [](double sigma2, double rho_l, double delta, const Times& times) {
            const ArmaImage image = lear_to_arma({sigma2, rho_l, delta}, build_grid(times));
            Json doc = to_json(image.params);
            doc["rho_a_identifiable"] = image.rho_a_identifiable;
            return doc.dump();
        },
        py::arg("sigma2"), py::arg("rho_l"), py::arg("delta"), py::arg("times"));

    m.def(
        "_arma_to_lear",
        [](double sigma2, double tau, double rho_a, const Times& times) {
            return to_json(arma_to_lear({sigma2, tau, rho_a}, build_grid(times))).dump();
        },
        py::arg("sigma2"), py::arg("tau"), py::arg("rho_a"), py::arg("times"));

    m.def(
        "_simulate",
        [](const std::string& spec_json) {
            Json doc;
            try {
                doc = Json::parse(spec_json);
            } catch (const Json::exception& e) {
                throw Error(ErrorCode::ParseError, e.what());
            }
            const RepeatedMeasuresData data = simulate(sim_spec_from_json(doc));
            std::vector<std::string> subject;
            std::vector<double> time;
            std::vector<double> y;
            std::vector<std::vector<double>> x;
            for (const auto& s : data.subjects()) {
                for (std::size_t j = 0; j < s.times.size(); ++j) {
                    const auto row = static_cast<Eigen::Index>(j);
                    subject.push_back(s.id);
                    time.push_back(s.times[j]);
                    y.push_back(s.y(row));
                    x.emplace_back(s.x.row(row).begin(), s.x.row(row).end());
                }
            }
            return py::make_tuple(subject, time, y, x);
        },
        py::arg("spec_json"));

    m.def(
        "profile_loglik",
        [](const std::vector<std::string>& subject, const std::vector<double>& time, const std::vector<double>& y,
           const std::string& param, double first, double second, const std::string& criterion,
           const std::string& design, const std::vector<std::vector<double>>& covariates) {
            const auto data = data_from(subject, time, y, design, covariates);
            const CorrelationParams params = parse_parameterization(param) == Parameterization::Lear
                                                 ? CorrelationParams{LearCorrelation{first, second}}
                                                 : CorrelationParams{ArmaCorrelation{first, second}};
            py::gil_scoped_release release;
            return profile_loglik(data, params, parse_criterion(criterion));
        },
        py::arg("subject"), py::arg("time"), py::arg("y"), py::arg("param"), py::arg("first"), py::arg("second"),
        py::arg("criterion") = "ml", py::arg("design") = "intercept",
        py::arg("covariates") = std::vector<std::vector<double>>{});

    m.def(
        "_fit",
        [](const std::vector<std::string>& subject, const std::vector<double>& time, const std::vector<double>& y,
           const std::string& param, const std::string& criterion, const std::string& design,
           const std::vector<std::vector<double>>& covariates, int grid_points, double rho_cap, double delta_cap,
           int max_iter, double tol, bool allow_negative, int threads) {
            const auto data = data_from(subject, time, y, design, covariates);
            const auto opt = options_from(grid_points, rho_cap, delta_cap, max_iter, tol, allow_negative, threads);
            FitResult result;
            {
                py::gil_scoped_release release;
                result = fit(data, parse_parameterization(param), parse_criterion(criterion), opt);
            }
            return to_json(result).dump();
        },
        py::arg("subject"), py::arg("time"), py::arg("y"), py::arg("param"), py::arg("criterion"), py::arg("design"),
        py::arg("covariates"), py::arg("grid_points"), py::arg("rho_cap"), py::arg("delta_cap"), py::arg("max_iter"),
        py::arg("tol"), py::arg("allow_negative"), py::arg("threads"));

    m.def(
        "_compare",
        [](const std::vector<std::string>& subject, const std::vector<double>& time, const std::vector<double>& y,
           const std::string& criterion, const std::string& design, const std::vector<std::vector<double>>& covariates,
           int grid_points, double rho_cap, double delta_cap, int max_iter, double tol, bool allow_negative,
           int threads) {
            const auto data = data_from(subject, time, y, design, covariates);
            const auto opt = options_from(grid_points, rho_cap, delta_cap, max_iter, tol, allow_negative, threads);
            std::optional<ComparisonReport> report;
            {
                py::gil_scoped_release release;
                report = compare_parameterizations(data, parse_criterion(criterion), opt);
            }
            return to_json(*report, data).dump();
        },
        py::arg("subject"), py::arg("time"), py::arg("y"), py::arg("criterion"), py::arg("design"),
        py::arg("covariates"), py::arg("grid_points"), py::arg("rho_cap"), py::arg("delta_cap"), py::arg("max_iter"),
        py::arg("tol"), py::arg("allow_negative"), py::arg("threads"));
}
