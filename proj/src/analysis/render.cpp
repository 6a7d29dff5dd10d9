// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <sstream>

#include "subjswap/analysis.hpp"
#include "subjswap/error.hpp"

namespace subjswap {

namespace {

// Black -> red -> yellow -> white.
void colour(double v, std::uint8_t* rgb) {
    const double r = std::clamp(3.0 * v, 0.0, 1.0);
    const double g = std::clamp(3.0 * v - 1.0, 0.0, 1.0);
    const double b = std::clamp(3.0 * v - 2.0, 0.0, 1.0);
    rgb[0] = static_cast<std::uint8_t>(std::lround(255.0 * r));
    rgb[1] = static_cast<std::uint8_t>(std::lround(255.0 * g));
    rgb[2] = static_cast<std::uint8_t>(std::lround(255.0 * b));
}

std::string escape(const std::string& s) {
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

}  // namespace

RgbImage render_heatmap(const Matrix& values, int scale) {
    require(values.size() > 0, ErrorKind::empty_input, "cannot render an empty matrix");
    require(scale >= 1, ErrorKind::domain, "scale must be at least 1");
    require(values.allFinite(), ErrorKind::numeric, "heat map values must be finite");
    const double lo = values.minCoeff();
    const double span = values.maxCoeff() - lo;
    RgbImage image(static_cast<int>(values.cols()) * scale, static_cast<int>(values.rows()) * scale);
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x) {
            const double v = values(y / scale, x / scale);
            colour(span > 0.0 ? (v - lo) / span : 0.0, image.pixel(x, y));
        }
    return image;
}

void write_heatmap(const std::filesystem::path& path, const Matrix& values, int scale) {
    write_png(path, render_heatmap(values, scale));
}

std::string html_grid(const std::string& title, const std::vector<std::vector<std::string>>& rows,
                      const std::vector<std::string>& row_labels) {
    std::ostringstream out;
    out << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" << escape(title)
        << "</title>\n<style>img{image-rendering:pixelated;width:128px;margin:2px}td{vertical-align:middle}</style>"
        << "</head><body>\n<h1>" << escape(title) << "</h1>\n<table>\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out << "<tr>";
        if (!row_labels.empty())
            out << "<td>" << (r < row_labels.size() ? escape(row_labels[r]) : std::string()) << "</td>";
        for (const auto& file : rows[r])
            out << "<td><img src=\"" << escape(file) << "\" alt=\"" << escape(file) << "\"></td>";
        out << "</tr>\n";
    }
    out << "</table>\n</body></html>\n";
    return out.str();
}

}  // namespace subjswap
