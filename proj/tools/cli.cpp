#include "cli.hpp"

#include "lear/error.hpp"
#include "lear/estimation.hpp"
#include "lear/io.hpp"
#include "lear/reparam.hpp"
#include "lear/report.hpp"
#include "lear/sim.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

namespace lear::cli {

namespace {

// Subjects separated by ';', times by ','.
std::vector<std::vector<double>> parse_times(const std::string& text) {
    std::vector<std::vector<double>> subjects;
    std::stringstream all(text);
    std::string subject;
    while (std::getline(all, subject, ';')) {
        std::vector<double> times;
        std::stringstream one(subject);
        std::string item;
        while (std::getline(one, item, ',')) {
            const auto first = item.find_first_not_of(" \t");
            if (first == std::string::npos) {
                continue;
            }
            try {
                std::size_t used = 0;
                times.push_back(std::stod(item, &used));
                if (item.find_first_not_of(" \t", first + used) != std::string::npos) {
                    throw std::invalid_argument(item);
                }
            } catch (const std::exception&) {
                throw Error(ErrorCode::ParseError, "--times: cannot parse '" + item + "' as a number");
            }
        }
        subjects.push_back(std::move(times));
    }
    if (subjects.empty()) {
        throw Error(ErrorCode::ParseError, "--times: no values");
    }
    return subjects;
}

void print_json(std::ostream& out, const Json& doc) {
    out << doc.dump(2) << '\n';
}

void print_matrix_text(std::ostream& out, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out << (j ? " " : "") << format_double(m(i, j));
        }
        out << '\n';
    }
}

/// key=value lines, '#' comments, optional [section] headers (ignored).
std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open config file '" + path + "'");
    }
    std::map<std::string, std::string> values;
    std::string line;
    std::size_t number = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++number;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty() || line.front() == '[') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::ParseError,
                        "config line " + std::to_string(number) + ": expected key=value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        if (key.rfind("--", 0) == 0) {
            key.erase(0, 2);
        }
        std::replace(key.begin(), key.end(), '_', '-');
        values[key] = value;
    }
    return values;
}

// Flags given on the command line win over config values, which win over
// built-in defaults: config entries are injected only for flags not already
// present.
std::vector<std::string> apply_config(const std::vector<std::string>& args) {
    std::optional<std::string> path;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (!path) {
        return rest;
    }
    std::set<std::string> given;
    for (const auto& a : rest) {
        if (a.rfind("--", 0) == 0) {
            given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
        }
    }
    std::vector<std::string> injected;
    for (const auto& [key, value] : read_config(*path)) {
        if (given.count(key)) {
            continue;
        }
        if (value == "true" || value == "false") {
            if (value == "true") {
                injected.push_back("--" + key);
            }
            continue;
        }
        injected.push_back("--" + key + "=" + value);
    }
    // Subcommand name stays first.
    if (rest.empty() || rest.front().rfind("-", 0) == 0) {
        injected.insert(injected.end(), rest.begin(), rest.end());
        return injected;
    }
    std::vector<std::string> out{rest.front()};
    out.insert(out.end(), injected.begin(), injected.end());
    out.insert(out.end(), rest.begin() + 1, rest.end());
    return out;
}

struct IngestFlags {
    std::string subject = "subject";
    std::string time = "time";
    std::string y = "y";
    std::string design = "intercept";
    std::vector<std::string> covariates;

    void add(CLI::App* cmd) {
        cmd->add_option("--subject-col", subject, "Subject id column")->capture_default_str();
        cmd->add_option("--time-col", time, "Time column")->capture_default_str();
        cmd->add_option("--y-col", y, "Response column")->capture_default_str();
        cmd->add_option("--design", design, "intercept | linear | columns")->capture_default_str();
        cmd->add_option("--covariates", covariates, "Extra design columns")->delimiter(',');
    }

    [[nodiscard]] IngestOptions options() const {
        IngestOptions o;
        o.subject_column = subject;
        o.time_column = time;
        o.y_column = y;
        o.design = parse_design_rule(design);
        o.covariates = covariates;
        return o;
    }
};

struct FitFlags {
    FitOptions options;
    std::string criterion = "ml";

    void add(CLI::App* cmd) {
        cmd->add_option("--criterion", criterion, "ml | reml")->capture_default_str();
        cmd->add_option("--grid-points", options.grid_points, "Scan points per axis")->capture_default_str();
        cmd->add_option("--rho-cap", options.rho_cap, "Upper cap for rho-type parameters")->capture_default_str();
        cmd->add_option("--delta-cap", options.delta_cap_multiplier, "delta cap as a multiple of d_max - d_min")
            ->capture_default_str();
        cmd->add_option("--max-iter", options.max_iterations, "Simplex iteration limit")->capture_default_str();
        cmd->add_option("--tol", options.tolerance, "Relative objective tolerance")->capture_default_str();
        cmd->add_flag("--allow-negative", options.allow_negative_arma, "Widen the ARMA(1,1) box to negative values");
        cmd->add_option("--threads", options.threads, "Worker threads for likelihood terms")
            ->envname("LEAR_THREADS")
            ->capture_default_str();
    }
};

int fail(std::ostream& out, std::ostream& err, std::string_view name, int code, std::string_view message) {
    out << Json{{"schema_version", kSchemaVersion}, {"error", name}, {"exit_code", code}}.dump() << '\n';
    err << "lear: " << message << '\n';
    return code;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"LEAR correlation model: matrices, ARMA(1,1) reparameterization, simulation and fitting", "lear"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "key=value file; command-line flags take precedence");

    // build-matrix
    auto* build = app.add_subcommand("build-matrix", "Print a LEAR or ARMA(1,1) covariance matrix");
    std::string build_model = "lear";
    LearParams build_lear;
    Arma11Params build_arma;
    std::string build_times;
    int build_p = 0;
    std::size_t build_subject = 0;
    std::optional<double> build_dmin;
    std::optional<double> build_dmax;
    std::string build_format = "text";
    build->add_option("--model", build_model, "lear | arma11")->capture_default_str();
    build->add_option("--sigma2", build_lear.sigma2, "Variance")->capture_default_str();
    build->add_option("--rho-l", build_lear.rho_l, "LEAR base correlation");
    build->add_option("--delta", build_lear.delta, "LEAR decay modulation");
    build->add_option("--tau", build_arma.tau, "ARMA(1,1) lag-1 factor");
    build->add_option("--rho-a", build_arma.rho_a, "ARMA(1,1) decay");
    build->add_option("--times", build_times, "Times, e.g. 1,2,3 (subjects separated by ';')");
    build->add_option("--p", build_p, "ARMA(1,1) size when --times is absent");
    build->add_option("--subject", build_subject, "Subject index within --times")->capture_default_str();
    build->add_option("--dmin", build_dmin, "Override pooled d_min");
    build->add_option("--dmax", build_dmax, "Override pooled d_max");
    build->add_option("--format", build_format, "text | json")->capture_default_str();

    // reparam
    auto* rep = app.add_subcommand("reparam", "Map parameters between LEAR and ARMA(1,1)");
    std::string rep_direction;
    LearParams rep_lear;
    Arma11Params rep_arma;
    std::string rep_times;
    std::string rep_input;
    std::optional<double> rep_range;
    double rep_dmin = 1.0;
    std::optional<double> rep_spacing;
    bool rep_verify = false;
    IngestFlags rep_ingest;
    rep->add_option("--direction", rep_direction, "lear2arma | arma2lear")->required();
    rep->add_option("--sigma2", rep_lear.sigma2, "Variance")->capture_default_str();
    rep->add_option("--rho-l", rep_lear.rho_l, "LEAR base correlation");
    rep->add_option("--delta", rep_lear.delta, "LEAR decay modulation");
    rep->add_option("--tau", rep_arma.tau, "ARMA(1,1) lag-1 factor");
    rep->add_option("--rho-a", rep_arma.rho_a, "ARMA(1,1) decay");
    rep->add_option("--times", rep_times, "Grid times (subjects separated by ';')");
    rep->add_option("--input", rep_input, "Long-format CSV supplying the grid");
    rep->add_option("--range", rep_range, "d_max - d_min when no grid is given");
    rep->add_option("--dmin", rep_dmin, "d_min when no grid is given")->capture_default_str();
    rep->add_option("--spacing", rep_spacing, "Common spacing when no grid is given (default d_min)");
    rep->add_flag("--verify", rep_verify, "Report the max elementwise matrix difference");
    rep_ingest.add(rep);

    // check-special-case
    auto* check = app.add_subcommand("check-special-case", "Report whether the grid admits the ARMA(1,1) form");
    std::string check_input;
    std::string check_times;
    IngestFlags check_ingest;
    check->add_option("--input", check_input, "Long-format CSV");
    check->add_option("--times", check_times, "Grid times (subjects separated by ';')");
    check_ingest.add(check);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Simulate Gaussian repeated measures to long-format CSV");
    std::string sim_spec_path;
    std::string sim_out;
    std::optional<std::uint64_t> sim_seed;
    sim->add_option("--spec", sim_spec_path, "Simulation spec (JSON)")->required();
    sim->add_option("--out", sim_out, "Output CSV (default stdout)");
    sim->add_option("--seed", sim_seed, "Override the spec seed");

    // fit
    auto* fitcmd = app.add_subcommand("fit", "Fit LEAR or ARMA(1,1) by profile ML/REML");
    std::string fit_input;
    std::string fit_param = "lear";
    IngestFlags fit_ingest;
    FitFlags fit_flags;
    fitcmd->add_option("--input", fit_input, "Long-format CSV")->required();
    fitcmd->add_option("--param", fit_param, "lear | arma11")->capture_default_str();
    fit_ingest.add(fitcmd);
    fit_flags.add(fitcmd);

    // compare
    auto* cmp = app.add_subcommand("compare", "Fit both parameterizations and compare the results");
    std::string cmp_input;
    IngestFlags cmp_ingest;
    FitFlags cmp_flags;
    cmp->add_option("--input", cmp_input, "Long-format CSV")->required();
    cmp_ingest.add(cmp);
    cmp_flags.add(cmp);

    try {
        std::vector<std::string> args = apply_config(raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << (dynamic_cast<const CLI::CallForAllHelp*>(&e) ? app.help("", CLI::AppFormatMode::All)
                                                                  : app.help());
            return 0;
        }
        return fail(out, err, "UsageError", kExitUsage, e.what());
    } catch (const Error& e) {
        return fail(out, err, error_name(e.code()), exit_code(e.code()), e.what());
    }

    try {
        if (build->parsed()) {
            if (build_model == "lear") {
                if (build_times.empty()) {
                    throw CLI::RequiredError("--times");
                }
                MeasurementGrid grid = build_grid(parse_times(build_times));
                if (build_dmin || build_dmax) {
                    grid = grid.with_extremes(build_dmin.value_or(grid.d_min()), build_dmax.value_or(grid.d_max()));
                }
                if (build_subject >= grid.subject_count()) {
                    throw Error(ErrorCode::InvalidSize, "--subject out of range");
                }
                const Matrix cov = lear_covariance(build_lear, grid, build_subject);
                if (build_format == "json") {
                    print_json(out, Json{{"schema_version", kSchemaVersion},
                                         {"kind", "matrix"},
                                         {"model", "lear"},
                                         {"params", to_json(build_lear)},
                                         {"d_min", grid.d_min()},
                                         {"d_max", grid.d_max()},
                                         {"times", grid.all_times()[build_subject]},
                                         {"matrix", to_json(cov)}});
                } else {
                    print_matrix_text(out, cov);
                }
            } else if (build_model == "arma11") {
                build_arma.sigma2 = build_lear.sigma2;
                Matrix cov;
                Json times = nullptr;
                if (!build_times.empty()) {
                    const MeasurementGrid grid = build_grid(parse_times(build_times));
                    if (build_subject >= grid.subject_count()) {
                        throw Error(ErrorCode::InvalidSize, "--subject out of range");
                    }
                    const GridScale scale = grid_scale(grid);
                    cov = arma11_covariance(build_arma, lag_positions(grid, build_subject, scale.spacing));
                    times = grid.all_times()[build_subject];
                } else {
                    cov = arma11_covariance(build_arma, build_p);
                }
                if (build_format == "json") {
                    print_json(out, Json{{"schema_version", kSchemaVersion},
                                         {"kind", "matrix"},
                                         {"model", "arma11"},
                                         {"params", to_json(build_arma)},
                                         {"times", times},
                                         {"matrix", to_json(cov)}});
                } else {
                    print_matrix_text(out, cov);
                }
            } else {
                throw Error(ErrorCode::InvalidSpec, "--model must be lear or arma11");
            }
            return 0;
        }

        if (rep->parsed()) {
            std::optional<MeasurementGrid> grid;
            if (!rep_input.empty()) {
                grid = ingest_file(rep_input, rep_ingest.options()).require_grid();
            } else if (!rep_times.empty()) {
                grid = build_grid(parse_times(rep_times));
            }
            GridScale scale{};
            if (grid) {
                scale = grid_scale(*grid);
            } else if (rep_range) {
                scale = {rep_dmin, rep_dmin + *rep_range, rep_spacing.value_or(rep_dmin)};
                if (!(scale.d_min > 0.0) || !(scale.spacing > 0.0) || *rep_range < 0.0) {
                    throw Error(ErrorCode::InvalidGrid, "--dmin and --spacing must be > 0, --range >= 0");
                }
            } else {
                throw Error(ErrorCode::InvalidGrid, "reparam needs --times, --input or --range");
            }

            LearParams lear_params = rep_lear;
            Arma11Params arma_params = rep_arma;
            bool rho_a_identifiable = true;
            if (rep_direction == "lear2arma") {
                const ArmaImage image = lear_to_arma(rep_lear, scale);
                arma_params = image.params;
                rho_a_identifiable = image.rho_a_identifiable;
            } else if (rep_direction == "arma2lear") {
                arma_params.sigma2 = rep_lear.sigma2;
                lear_params = arma_to_lear(arma_params, scale);
            } else {
                throw Error(ErrorCode::InvalidSpec, "--direction must be lear2arma or arma2lear");
            }

            Json doc{{"schema_version", kSchemaVersion},
                     {"kind", "reparam"},
                     {"direction", rep_direction},
                     {"lear", to_json(lear_params)},
                     {"arma11", to_json(arma_params)},
                     {"rho_a_identifiable", rho_a_identifiable},
                     {"grid", Json{{"d_min", scale.d_min}, {"d_max", scale.d_max}, {"spacing", scale.spacing}}}};
            if (rep_verify) {
                if (!grid) {
                    // Single subject spanning the range on the common spacing.
                    const double steps = scale.d_max / scale.spacing;
                    if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps) || steps < 1.0) {
                        throw Error(ErrorCode::NotSpecialCase, "--verify needs d_max to be a multiple of the spacing");
                    }
                    std::vector<double> times;
                    for (long k = 0; k <= std::lround(steps); ++k) {
                        times.push_back(static_cast<double>(k) * scale.spacing);
                    }
                    grid = build_grid({times});
                }
                doc["max_matrix_difference"] = max_reparam_difference(lear_params, *grid);
            }
            print_json(out, doc);
            return 0;
        }

        if (check->parsed()) {
            std::optional<MeasurementGrid> grid;
            if (!check_input.empty()) {
                grid = ingest_file(check_input, check_ingest.options()).require_grid();
            } else if (!check_times.empty()) {
                grid = build_grid(parse_times(check_times));
            } else {
                throw CLI::RequiredError("--input or --times");
            }
            print_json(out, to_json(check_special_case(*grid), *grid));
            return 0;
        }

        if (sim->parsed()) {
            std::ifstream in(sim_spec_path);
            if (!in) {
                throw Error(ErrorCode::IoError, "cannot open '" + sim_spec_path + "'");
            }
            Json doc;
            try {
                doc = Json::parse(in);
            } catch (const Json::exception& e) {
                throw Error(ErrorCode::ParseError, "spec is not valid JSON: " + std::string(e.what()));
            }
            SimSpec spec = sim_spec_from_json(doc);
            if (sim_seed) {
                spec.seed = *sim_seed;
            }
            const RepeatedMeasuresData data = simulate(spec);
            const bool design_columns = spec.design == DesignRule::UserSupplied;
            if (sim_out.empty() || sim_out == "-") {
                write_long_csv(out, data, design_columns);
            } else {
                std::ofstream file(sim_out, std::ios::binary);
                if (!file) {
                    throw Error(ErrorCode::IoError, "cannot write '" + sim_out + "'");
                }
                write_long_csv(file, data, design_columns);
            }
            return 0;
        }

        if (fitcmd->parsed()) {
            const RepeatedMeasuresData data = ingest_file(fit_input, fit_ingest.options());
            const FitResult result = fit(data, parse_parameterization(fit_param), parse_criterion(fit_flags.criterion),
                                         fit_flags.options);
            print_json(out, to_json(result));
            return 0;
        }

        if (cmp->parsed()) {
            const RepeatedMeasuresData data = ingest_file(cmp_input, cmp_ingest.options());
            const ComparisonReport report =
                compare_parameterizations(data, parse_criterion(cmp_flags.criterion), cmp_flags.options);
            print_json(out, to_json(report, data));
            return 0;
        }
    } catch (const Error& e) {
        return fail(out, err, error_name(e.code()), exit_code(e.code()), e.what());
    } catch (const CLI::Error& e) {
        return fail(out, err, "UsageError", kExitUsage, e.what());
    } catch (const std::exception& e) {
        return fail(out, err, "InternalError", kExitInternal, e.what());
    }
    return kExitUsage;
}

}  // namespace lear::cli
