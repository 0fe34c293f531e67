#include "motlab/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace motlab {

namespace {

std::string format_exponent(double p) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", p);
    return buf;
}

void append_cell(std::string& line, const std::optional<double>& value) {
    line.push_back(',');
    if (value.has_value()) line += format_csv_value(*value);
}

}  // namespace

std::string format_csv_value(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::vector<std::string> diagnostics_columns(const DiagnosticsConfig& config) {
    std::vector<std::string> columns = {"t",         "mass_u",    "sup_v",    "dual_norm_sq",
                                        "l2_u_sq",   "grad_v_sq", "lap_v_sq", "grad_v_4",
                                        "v_t_sq"};
    for (double p : config.p_list) columns.push_back("lp_u_" + format_exponent(p));
    columns.insert(columns.end(),
                   {"entropy_u", "fisher_u", "grad_u_43", "weighted", "stab_u", "stab_v"});
    return columns;
}

DiagnosticsCsvWriter::DiagnosticsCsvWriter(const std::filesystem::path& path,
                                           const DiagnosticsConfig& config)
    : out_(path, std::ios::trunc), p_count_(config.p_list.size()) {
    if (!out_) {
        throw std::runtime_error("csv: cannot open '" + path.string() + "' for write");
    }
    const auto columns = diagnostics_columns(config);
    std::string header;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i > 0) header.push_back(',');
        header += columns[i];
    }
    out_ << header << '\n';
}

void DiagnosticsCsvWriter::append(const DiagnosticsRecord& record) {
    if (record.lp_u.size() != p_count_) {
        throw std::invalid_argument("csv: record L^p count does not match the header");
    }
    std::string line = format_csv_value(record.t);
    append_cell(line, record.mass_u);
    append_cell(line, record.sup_v);
    append_cell(line, record.dual_norm_sq);
    append_cell(line, record.l2_u_sq);
    append_cell(line, record.grad_v_sq);
    append_cell(line, record.lap_v_sq);
    append_cell(line, record.grad_v_4);
    append_cell(line, record.v_t_sq);
    for (double lp : record.lp_u) append_cell(line, lp);
    append_cell(line, record.entropy_u);
    append_cell(line, record.fisher_u);
    append_cell(line, record.grad_u_43);
    append_cell(line, record.weighted);
    append_cell(line, record.stab_u);
    append_cell(line, record.stab_v);
    out_ << line << '\n';
    if (!out_) throw std::runtime_error("csv: write failed");
}

void DiagnosticsCsvWriter::flush() {
    out_.flush();
    if (!out_) throw std::runtime_error("csv: flush failed");
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return i;
    }
    throw std::runtime_error("csv: no column named '" + name + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv: cannot open '" + path.string() + "'");
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv: empty file '" + path.string() + "'");
    {
        std::stringstream header(line);
        std::string cell;
        while (std::getline(header, cell, ',')) table.columns.push_back(cell);
    }
    if (table.columns.empty()) throw std::runtime_error("csv: empty header");
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::optional<double>> row;
        row.reserve(table.columns.size());
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const std::string cell = line.substr(
                start, comma == std::string::npos ? std::string::npos : comma - start);
            if (cell.empty()) {
                row.emplace_back(std::nullopt);
            } else {
                char* end = nullptr;
                const double value = std::strtod(cell.c_str(), &end);
                if (end == cell.c_str() || *end != '\0') {
                    throw std::runtime_error("csv: bad number '" + cell + "' at line " +
                                             std::to_string(line_no));
                }
                row.emplace_back(value);
            }
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (row.size() != table.columns.size()) {
            throw std::runtime_error("csv: row width mismatch at line " + std::to_string(line_no));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace motlab
