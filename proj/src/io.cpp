#include "lear/io.hpp"

#include "lear/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <ostream>

namespace lear {

std::string format_double(double value) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", value);
    return std::string(buf, static_cast<std::size_t>(n));
}

std::size_t CsvTable::column(std::string_view name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw Error(ErrorCode::ParseError, "line 1: missing column '" + std::string(name) + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(std::istream& in) {
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (text.rfind("\xEF\xBB\xBF", 0) == 0) {
        text.erase(0, 3);
    }

    std::vector<CsvRecord> records;
    CsvRecord current;
    std::string field;
    bool quoted = false;
    bool field_was_quoted = false;
    std::size_t line = 1;
    current.line = 1;

    auto end_field = [&] {
        current.fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
    };
    auto end_record = [&] {
        end_field();
        const bool blank = current.fields.size() == 1 && current.fields.front().empty();
        if (!blank) {
            records.push_back(std::move(current));
        }
        current = CsvRecord{};
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') {
                    ++line;
                }
                field.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            if (!field.empty() || field_was_quoted) {
                throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": stray quote inside field");
            }
            quoted = true;
            field_was_quoted = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
                ++i;
            }
            end_record();
            ++line;
            current.line = line;
        } else {
            if (field_was_quoted) {
                throw Error(ErrorCode::ParseError,
                            "line " + std::to_string(line) + ": characters after closing quote");
            }
            field.push_back(c);
        }
    }
    if (quoted) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(current.line) + ": unterminated quoted field");
    }
    if (!field.empty() || field_was_quoted || !current.fields.empty()) {
        end_record();
    }

    if (records.empty()) {
        throw Error(ErrorCode::ParseError, "line 1: header row required");
    }
    CsvTable table;
    table.header = std::move(records.front().fields);
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].fields.size() != table.header.size()) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(records[i].line) + ": expected " +
                                                   std::to_string(table.header.size()) + " fields, found " +
                                                   std::to_string(records[i].fields.size()));
        }
        table.records.push_back(std::move(records[i]));
    }
    return table;
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out.push_back(c);
        }
    }
    out.push_back('"');
    return out;
}

namespace {

double parse_number(const std::string& text, std::size_t line, std::string_view column) {
    auto first = text.data();
    auto last = text.data() + text.size();
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    while (last > first && (last[-1] == ' ' || last[-1] == '\t')) --last;
    if (first < last && *first == '+') ++first;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || first == last || !std::isfinite(value)) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": column '" + std::string(column) +
                                               "': cannot parse '" + text + "' as a finite number");
    }
    return value;
}

}  // namespace

RepeatedMeasuresData assemble_long(const std::vector<LongRecord>& records, DesignRule design) {
    if (records.empty()) {
        throw Error(ErrorCode::DegenerateGrid, "no data rows");
    }
    const std::size_t extra = records.front().covariates.size();
    if (design == DesignRule::UserSupplied && extra == 0) {
        throw Error(ErrorCode::InvalidSpec, "user-supplied design needs at least one covariate column");
    }

    std::vector<std::string> order;
    std::map<std::string, std::vector<const LongRecord*>> by_subject;
    for (const auto& rec : records) {
        if (rec.covariates.size() != extra) {
            throw Error(ErrorCode::InvalidData, "line " + std::to_string(rec.line) + ": expected " +
                                                    std::to_string(extra) + " covariates");
        }
        auto [it, inserted] = by_subject.try_emplace(rec.subject);
        if (inserted) {
            order.push_back(rec.subject);
        }
        for (const auto* existing : it->second) {
            if (existing->time == rec.time) {
                throw Error(ErrorCode::DuplicateMeasurement,
                            "line " + std::to_string(rec.line) + ": duplicate measurement for subject '" + rec.subject +
                                "' at time " + format_double(rec.time) + " (first seen on line " +
                                std::to_string(existing->line) + ")");
            }
        }
        it->second.push_back(&rec);
    }

    std::vector<SubjectData> subjects;
    subjects.reserve(order.size());
    for (const auto& id : order) {
        auto& rows = by_subject[id];
        std::stable_sort(rows.begin(), rows.end(), [](const LongRecord* a, const LongRecord* b) { return a->time < b->time; });
        SubjectData s;
        s.id = id;
        const auto p = static_cast<Eigen::Index>(rows.size());
        s.y.resize(p);
        for (Eigen::Index j = 0; j < p; ++j) {
            s.times.push_back(rows[static_cast<std::size_t>(j)]->time);
            s.y(j) = rows[static_cast<std::size_t>(j)]->y;
        }
        const auto k_extra = static_cast<Eigen::Index>(extra);
        Matrix base = design == DesignRule::UserSupplied ? Matrix(p, 0) : design_matrix(design, s.times);
        s.x.resize(p, base.cols() + k_extra);
        s.x.leftCols(base.cols()) = base;
        for (Eigen::Index j = 0; j < p; ++j) {
            for (Eigen::Index k = 0; k < k_extra; ++k) {
                s.x(j, base.cols() + k) = rows[static_cast<std::size_t>(j)]->covariates[static_cast<std::size_t>(k)];
            }
        }
        subjects.push_back(std::move(s));
    }

    RepeatedMeasuresData data(std::move(subjects));
    static_cast<void>(data.require_grid());
    return data;
}

RepeatedMeasuresData ingest(std::istream& in, const IngestOptions& options) {
    const CsvTable table = read_csv(in);
    const std::size_t subject_col = table.column(options.subject_column);
    const std::size_t time_col = table.column(options.time_column);
    const std::size_t y_col = table.column(options.y_column);
    std::vector<std::size_t> covariate_cols;
    for (const auto& name : options.covariates) {
        covariate_cols.push_back(table.column(name));
    }
    if (options.design == DesignRule::UserSupplied && covariate_cols.empty()) {
        throw Error(ErrorCode::InvalidSpec, "user-supplied design needs at least one covariate column");
    }

    std::vector<LongRecord> records;
    records.reserve(table.records.size());
    for (const auto& rec : table.records) {
        LongRecord row{rec.fields[subject_col], parse_number(rec.fields[time_col], rec.line, options.time_column),
                       parse_number(rec.fields[y_col], rec.line, options.y_column), {}, rec.line};
        for (std::size_t k = 0; k < covariate_cols.size(); ++k) {
            row.covariates.push_back(parse_number(rec.fields[covariate_cols[k]], rec.line, options.covariates[k]));
        }
        records.push_back(std::move(row));
    }
    return assemble_long(records, options.design);
}

RepeatedMeasuresData ingest_file(const std::string& path, const IngestOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    }
    return ingest(in, options);
}

void write_long_csv(std::ostream& out, const RepeatedMeasuresData& data, bool design_columns) {
    out << "subject,time,y";
    if (design_columns) {
        for (Eigen::Index k = 0; k < data.q(); ++k) {
            out << ",x" << (k + 1);
        }
    }
    out << '\n';
    for (const auto& s : data.subjects()) {
        for (std::size_t j = 0; j < s.times.size(); ++j) {
            const auto row = static_cast<Eigen::Index>(j);
            out << csv_escape(s.id) << ',' << format_double(s.times[j]) << ',' << format_double(s.y(row));
            if (design_columns) {
                for (Eigen::Index k = 0; k < data.q(); ++k) {
                    out << ',' << format_double(s.x(row, k));
                }
            }
            out << '\n';
        }
    }
}

}  // namespace lear
