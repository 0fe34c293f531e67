#include "motlab/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

#include "motlab/csv.hpp"
#include "motlab/diagnostics.hpp"
#include "motlab/snapshot.hpp"

namespace motlab {

namespace {

constexpr double kWidth = 720.0, kHeight = 460.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 36.0, kBottom = 46.0;
constexpr double kLogFloor = 1e-16;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

// 11-stop viridis-like ramp for heat maps.
constexpr double kRamp[11][3] = {
    {0.267, 0.005, 0.329}, {0.283, 0.141, 0.458}, {0.254, 0.265, 0.530},
    {0.207, 0.372, 0.553}, {0.164, 0.471, 0.558}, {0.128, 0.567, 0.551},
    {0.135, 0.659, 0.518}, {0.267, 0.749, 0.441}, {0.478, 0.821, 0.318},
    {0.741, 0.873, 0.150}, {0.993, 0.906, 0.144}};

std::string fmt(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", value);
    return buf;
}

std::string fmt_px(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

std::string ramp_color(double s) {
    s = std::clamp(s, 0.0, 1.0) * 10.0;
    const int k = std::min(9, static_cast<int>(s));
    const double w = s - k;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                  static_cast<int>(std::lround(255.0 * (kRamp[k][0] * (1 - w) + kRamp[k + 1][0] * w))),
                  static_cast<int>(std::lround(255.0 * (kRamp[k][1] * (1 - w) + kRamp[k + 1][1] * w))),
                  static_cast<int>(std::lround(255.0 * (kRamp[k][2] * (1 - w) + kRamp[k + 1][2] * w))));
    return buf;
}

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

std::string svg_open(const std::string& title) {
    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" +
           fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + fmt(kWidth / 2) +
           "\" y=\"22\" font-family=\"monospace\" font-size=\"15\" text-anchor=\"middle\">" +
           title + "</text>\n";
    return out;
}

/// Line chart of one or more series; log_y clamps values at kLogFloor and
/// plots log10.
std::string render_line_chart(const std::string& title, const std::vector<Series>& series,
                              bool log_y) {
    double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
    bool first = true;
    for (const Series& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double y = log_y ? std::log10(std::max(s.y[i], kLogFloor)) : s.y[i];
            if (first) {
                x_lo = x_hi = s.x[i];
                y_lo = y_hi = y;
                first = false;
            } else {
                x_lo = std::min(x_lo, s.x[i]);
                x_hi = std::max(x_hi, s.x[i]);
                y_lo = std::min(y_lo, y);
                y_hi = std::max(y_hi, y);
            }
        }
    }
    if (x_hi - x_lo <= 0.0) x_hi = x_lo + 1.0;
    if (y_hi - y_lo <= 0.0) {
        const double pad = std::max(1.0, std::abs(y_hi)) * 0.05;
        y_lo -= pad;
        y_hi += pad;
    } else {
        const double pad = (y_hi - y_lo) * 0.05;
        y_lo -= pad;
        y_hi += pad;
    }
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
    const auto py = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * plot_h; };

    std::string out = svg_open(title);
    out += "<rect x=\"" + fmt_px(kLeft) + "\" y=\"" + fmt_px(kTop) + "\" width=\"" +
           fmt_px(plot_w) + "\" height=\"" + fmt_px(plot_h) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x_lo + (x_hi - x_lo) * i / 4.0;
        const double yv = y_lo + (y_hi - y_lo) * i / 4.0;
        out += "<text x=\"" + fmt_px(px(xv)) + "\" y=\"" + fmt_px(kHeight - kBottom + 18) +
               "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">" + fmt(xv) +
               "</text>\n";
        const std::string y_label = log_y ? ("1e" + fmt(yv)) : fmt(yv);
        out += "<text x=\"" + fmt_px(kLeft - 6) + "\" y=\"" + fmt_px(py(yv) + 4) +
               "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">" + y_label +
               "</text>\n";
    }
    for (std::size_t si = 0; si < series.size(); ++si) {
        const Series& s = series[si];
        const char* color = kPalette[si % 5];
        std::string points;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double y = log_y ? std::log10(std::max(s.y[i], kLogFloor)) : s.y[i];
            points += fmt_px(px(s.x[i])) + "," + fmt_px(py(y)) + " ";
        }
        out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
        out += "<text x=\"" + fmt_px(kLeft + 10) + "\" y=\"" +
               fmt_px(kTop + 16 + 15 * static_cast<double>(si)) +
               "\" font-family=\"monospace\" font-size=\"12\" fill=\"" + color + "\">" + s.label +
               "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

std::string render_heatmap(const std::string& title, int nx, int ny,
                           const std::vector<double>& values) {
    double lo = values[0], hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi - lo;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const double cw = plot_w / nx, ch = plot_h / ny;
    std::string out = svg_open(title + "  [" + fmt(lo) + ", " + fmt(hi) + "]");
    // values are indexed [iy * nx + ix]; iy = 0 is drawn at the bottom.
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const double v = values[static_cast<std::size_t>(iy) * nx + ix];
            const double s = span > 0.0 ? (v - lo) / span : 0.5;
            out += "<rect x=\"" + fmt_px(kLeft + ix * cw) + "\" y=\"" +
                   fmt_px(kTop + plot_h - (iy + 1) * ch) + "\" width=\"" + fmt_px(cw + 0.5) +
                   "\" height=\"" + fmt_px(ch + 0.5) + "\" fill=\"" + ramp_color(s) + "\"/>\n";
        }
    }
    out += "<rect x=\"" + fmt_px(kLeft) + "\" y=\"" + fmt_px(kTop) + "\" width=\"" +
           fmt_px(plot_w) + "\" height=\"" + fmt_px(plot_h) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    out += "</svg>\n";
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content,
                std::vector<std::filesystem::path>& written) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw std::runtime_error("plots: cannot write '" + path.string() + "'");
    out << content;
    written.push_back(path);
}

std::vector<double> column_values(const CsvTable& table, const std::string& name,
                                  std::vector<double>* times) {
    const std::size_t t_col = table.column("t");
    const std::size_t col = table.column(name);
    std::vector<double> values;
    if (times) times->clear();
    for (const auto& row : table.rows) {
        if (!row[col].has_value()) continue;
        values.push_back(*row[col]);
        if (times) times->push_back(row[t_col].value_or(0.0));
    }
    return values;
}

Series window_series(const CsvTable& table, const std::string& column,
                     const std::string& label) {
    Series s;
    s.label = label;
    std::vector<double> times;
    const std::vector<double> values = column_values(table, column, &times);
    if (times.size() < 2) return s;
    WindowSeries ws{times, values, 1.0};
    s.x = times;
    s.y = sliding_window_integrals(ws);
    return s;
}

std::string field_title(const std::string& stem, const char* field, double t) {
    return stem + " " + field + " at t=" + fmt(t);
}

}  // namespace

std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& run_dir) {
    const auto csv_path = run_dir / "diagnostics.csv";
    if (!std::filesystem::exists(csv_path)) {
        throw std::runtime_error("plots: missing '" + csv_path.string() + "'");
    }
    const CsvTable table = read_csv(csv_path);
    if (table.rows.empty()) throw std::runtime_error("plots: diagnostics.csv has no rows");

    std::vector<std::filesystem::path> written;
    std::vector<double> times;

    {
        Series s{"mass_u", {}, column_values(table, "mass_u", &times)};
        s.x = times;
        write_file(run_dir / "series_mass_u.svg", render_line_chart("mass_u", {s}, false),
                   written);
    }
    {
        Series s{"sup_v", {}, column_values(table, "sup_v", &times)};
        s.x = times;
        write_file(run_dir / "series_sup_v.svg", render_line_chart("sup_v", {s}, false), written);
    }
    {
        Series s{"stab_u", {}, column_values(table, "stab_u", &times)};
        s.x = times;
        write_file(run_dir / "series_stab_u.svg",
                   render_line_chart("stab_u (log scale)", {s}, true), written);
    }
    {
        Series s{"entropy_u", {}, column_values(table, "entropy_u", &times)};
        s.x = times;
        write_file(run_dir / "series_entropy_u.svg", render_line_chart("entropy_u", {s}, false),
                   written);
    }
    if (table.rows.size() >= 2) {
        std::vector<Series> windows;
        windows.push_back(window_series(table, "grad_v_sq", "W[grad_v_sq]"));
        windows.push_back(window_series(table, "lap_v_sq", "W[lap_v_sq]"));
        windows.push_back(window_series(table, "grad_v_4", "W[grad_v_4]"));
        windows.push_back(window_series(table, "v_t_sq", "W[v_t_sq]"));
        windows.push_back(window_series(table, "l2_u_sq", "W[l2_u_sq]"));
        std::vector<Series> nonempty;
        for (auto& w : windows) {
            if (w.x.size() >= 2) nonempty.push_back(std::move(w));
        }
        if (!nonempty.empty()) {
            write_file(run_dir / "series_windows.svg",
                       render_line_chart("sliding-window integrals (window 1)", nonempty, false),
                       written);
        }
    }

    std::vector<std::filesystem::path> snaps;
    for (const auto& entry : std::filesystem::directory_iterator(run_dir)) {
        if (entry.path().extension() == ".mlab") snaps.push_back(entry.path());
    }
    std::sort(snaps.begin(), snaps.end());
    if (!snaps.empty()) {
        std::set<std::size_t> picks{0, snaps.size() / 3, 2 * snaps.size() / 3, snaps.size() - 1};
        for (std::size_t idx : picks) {
            const Snapshot snap = read_snapshot(snaps[idx]);
            const std::string stem = snaps[idx].stem().string();
            const auto plot_field = [&](const char* name, const Field& f) {
                const std::string out_name = stem + "_" + name + ".svg";
                if (snap.grid.dim == 1) {
                    Series s{name, {}, {}};
                    for (int i = 0; i < snap.grid.cells[0]; ++i) {
                        s.x.push_back(snap.grid.center(0, i));
                        s.y.push_back(f[static_cast<std::size_t>(i)]);
                    }
                    write_file(run_dir / out_name,
                               render_line_chart(field_title(stem, name, snap.t), {s}, false),
                               written);
                } else if (snap.grid.dim == 2) {
                    // Row-major with axis 0 slowest: index = i0 * n1 + i1.
                    // Render axis 1 horizontally, axis 0 vertically.
                    const int n0 = snap.grid.cells[0], n1 = snap.grid.cells[1];
                    write_file(run_dir / out_name,
                               render_heatmap(field_title(stem, name, snap.t), n1, n0, f),
                               written);
                } else {
                    const int n0 = snap.grid.cells[0], n1 = snap.grid.cells[1],
                              n2 = snap.grid.cells[2];
                    const int mid = n0 / 2;
                    std::vector<double> slice(static_cast<std::size_t>(n1) * n2);
                    for (int i1 = 0; i1 < n1; ++i1) {
                        for (int i2 = 0; i2 < n2; ++i2) {
                            slice[static_cast<std::size_t>(i1) * n2 + i2] =
                                f[(static_cast<std::size_t>(mid) * n1 + i1) * n2 + i2];
                        }
                    }
                    write_file(run_dir / out_name,
                               render_heatmap(field_title(stem, name, snap.t) + " (mid slice)",
                                              n2, n1, slice),
                               written);
                }
            };
            plot_field("u", snap.u);
            plot_field("v", snap.v);
        }
    }
    return written;
}

}  // namespace motlab
