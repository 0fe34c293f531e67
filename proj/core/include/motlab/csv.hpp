#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "motlab/diagnostics.hpp"

namespace motlab {

/// Formats a double with 17 significant digits (%.17g), enough for an exact
/// binary round trip through the text file.
std::string format_csv_value(double value);

/// Fixed diagnostics column order; the L^p moments expand to one column
/// "lp_u_<p>" per configured exponent.
std::vector<std::string> diagnostics_columns(const DiagnosticsConfig& config);

/// Streaming CSV writer for diagnostics records.  Absent optional values
/// (v_t on the first row, the weighted functional outside its domain) are
/// written as empty cells.
class DiagnosticsCsvWriter {
  public:
    DiagnosticsCsvWriter(const std::filesystem::path& path, const DiagnosticsConfig& config);

    void append(const DiagnosticsRecord& record);
    void flush();

  private:
    std::ofstream out_;
    std::size_t p_count_;
};

/// A parsed CSV file: header names plus rows of optional doubles (empty
/// cells map to nullopt).
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::optional<double>>> rows;

    /// Index of a named column; throws std::runtime_error when missing.
    std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace motlab
