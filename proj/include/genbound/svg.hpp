#pragma once

// Minimal CSV reader and SVG line chart for trace files.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "genbound/error.hpp"

namespace genbound {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column_index(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw MissingColumnError(name);
        return static_cast<std::size_t>(it - header.begin());
    }

    /// Numeric cells of a column; empty cells become nullopt.
    std::vector<std::optional<double>> numeric_column(const std::string& name) const {
        const std::size_t c = column_index(name);
        std::vector<std::optional<double>> out;
        for (const auto& r : rows) {
            if (c >= r.size() || r[c].empty()) {
                out.push_back(std::nullopt);
                continue;
            }
            try {
                out.push_back(std::stod(r[c]));
            } catch (const std::exception&) {
                throw Error("column " + name + ": non-numeric cell '" + r[c] + "'");
            }
        }
        return out;
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw Error("empty CSV input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    t.header = split_csv_line(line);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        t.rows.push_back(split_csv_line(line));
    }
    return t;
}

struct SvgOptions {
    std::string x_column = "epoch";
    int width = 720;
    int height = 440;
    std::string title;
};

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string svg_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace detail

/// One polyline per column over the x column, linear axes, legend.
/// Rows with an empty cell are skipped for that column.
inline std::string render_svg(const CsvTable& table, const std::vector<std::string>& columns,
                              const SvgOptions& opt = {}) {
    if (columns.empty()) throw Error("no columns to render");
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};
    const auto xs = table.numeric_column(opt.x_column);
    std::vector<std::vector<std::pair<double, double>>> series;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto& name : columns) {
        const auto ys = table.numeric_column(name);
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < ys.size(); ++i) {
            if (!xs[i] || !ys[i]) continue;
            pts.emplace_back(*xs[i], *ys[i]);
            xmin = std::min(xmin, *xs[i]);
            xmax = std::max(xmax, *xs[i]);
            ymin = std::min(ymin, *ys[i]);
            ymax = std::max(ymax, *ys[i]);
        }
        series.push_back(std::move(pts));
    }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
    if (ymax == ymin) ymin -= 0.5, ymax += 0.5;

    const double left = 70, right = 190, top = 40, bottom = 50;
    const double pw = opt.width - left - right, ph = opt.height - top - bottom;
    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return top + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };
    using detail::svg_num;

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
      << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!opt.title.empty())
        s << "<text x=\"" << svg_num(left) << "\" y=\"24\" font-size=\"14\">" << detail::xml_escape(opt.title)
          << "</text>\n";
    s << "<rect x=\"" << svg_num(left) << "\" y=\"" << svg_num(top) << "\" width=\"" << svg_num(pw) << "\" height=\""
      << svg_num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 4.0, fy = ymin + (ymax - ymin) * i / 4.0;
        s << "<text x=\"" << svg_num(px(fx)) << "\" y=\"" << svg_num(top + ph + 18) << "\" text-anchor=\"middle\">"
          << detail::svg_label(fx) << "</text>\n";
        s << "<text x=\"" << svg_num(left - 6) << "\" y=\"" << svg_num(py(fy) + 4) << "\" text-anchor=\"end\">"
          << detail::svg_label(fy) << "</text>\n";
    }
    s << "<text x=\"" << svg_num(left + pw / 2) << "\" y=\"" << svg_num(opt.height - 10.0)
      << "\" text-anchor=\"middle\">" << detail::xml_escape(opt.x_column) << "</text>\n";
    for (std::size_t c = 0; c < series.size(); ++c) {
        const char* color = palette[c % (sizeof palette / sizeof *palette)];
        s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < series[c].size(); ++i)
            s << (i ? " " : "") << svg_num(px(series[c][i].first)) << ',' << svg_num(py(series[c][i].second));
        s << "\"/>\n";
        const double ly = top + 10 + 18.0 * static_cast<double>(c);
        s << "<line x1=\"" << svg_num(left + pw + 12) << "\" y1=\"" << svg_num(ly) << "\" x2=\""
          << svg_num(left + pw + 32) << "\" y2=\"" << svg_num(ly) << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
        s << "<text x=\"" << svg_num(left + pw + 38) << "\" y=\"" << svg_num(ly + 4) << "\">"
          << detail::xml_escape(columns[c]) << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace genbound
