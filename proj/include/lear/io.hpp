#pragma once

#include "lear/data.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace lear {

/// Shortest text that reads back to the same double: 17 significant digits.
std::string format_double(double value);

struct CsvRecord {
    /// 1-based line on which the record starts (the header is line 1).
    std::size_t line = 0;
    std::vector<std::string> fields;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<CsvRecord> records;

    /// Column index by name, or ParseError.
    [[nodiscard]] std::size_t column(std::string_view name) const;
};

/// RFC 4180 reader: comma separated, double-quoted fields with "" escapes,
/// quoted line breaks, CRLF or LF endings. A header row is required; blank
/// lines are skipped. A leading UTF-8 byte-order mark is dropped.
CsvTable read_csv(std::istream& in);

std::string csv_escape(std::string_view field);

/// Column mapping for long-format data (one row per measurement).
struct IngestOptions {
    std::string subject_column = "subject";
    std::string time_column = "time";
    std::string y_column = "y";
    /// Intercept and InterceptLinearTime are followed by `covariates`;
    /// UserSupplied uses exactly the `covariates` columns.
    DesignRule design = DesignRule::Intercept;
    std::vector<std::string> covariates;
};

/// One long-format measurement. `line` is used in error messages.
struct LongRecord {
    std::string subject;
    double time = 0.0;
    double y = 0.0;
    std::vector<double> covariates;
    std::size_t line = 0;
};

/// Groups records by subject (first-appearance order), sorts each subject by
/// time and builds X_i from `design` followed by the covariates. Throws
/// DuplicateMeasurement and DegenerateGrid.
RepeatedMeasuresData assemble_long(const std::vector<LongRecord>& records, DesignRule design);

/// Groups rows by subject (first-appearance order) and sorts each subject by
/// time. Throws DuplicateMeasurement, ParseError (with line number) and
/// DegenerateGrid when no subject has two measurements.
RepeatedMeasuresData ingest(std::istream& in, const IngestOptions& options = {});
RepeatedMeasuresData ingest_file(const std::string& path, const IngestOptions& options = {});

/// Writes subject,time,y and, when `design_columns` is true, x1..xq.
void write_long_csv(std::ostream& out, const RepeatedMeasuresData& data, bool design_columns);

}  // namespace lear
