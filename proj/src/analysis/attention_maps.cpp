// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <map>

#include "subjswap/analysis.hpp"
#include "subjswap/error.hpp"

namespace subjswap {

namespace {

struct Tap {
    int height = 0;
    int width = 0;
};

std::map<std::string, Tap> tap_grids(const AttentionBank& bank) {
    std::map<std::string, Tap> grids;
    for (const auto& tap : bank.layout())
        grids[tap.layer_id] = Tap{tap.query_height, tap.query_width};
    return grids;
}

struct Interp {
    int lo = 0;
    int hi = 0;
    double frac = 0.0;
};

std::vector<Interp> axis_weights(int in, int out) {
    std::vector<Interp> w(static_cast<std::size_t>(out));
    const double scale = static_cast<double>(in) / out;
    for (int o = 0; o < out; ++o) {
        double src = (o + 0.5) * scale - 0.5;
        src = std::clamp(src, 0.0, static_cast<double>(in - 1));
        const int lo = static_cast<int>(std::floor(src));
        w[static_cast<std::size_t>(o)] = Interp{lo, std::min(lo + 1, in - 1), src - lo};
    }
    return w;
}

void renormalize_rows(Matrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const double s = m.row(r).sum();
        require(s > 0.0 && std::isfinite(s), ErrorKind::numeric, "averaged attention row has no mass");
        m.row(r) /= s;
    }
}

// Sum of resized maps grouped by step (0 = all steps).
std::map<int, std::pair<Matrix, int>> accumulate(const AttentionBank& bank, AttentionKind kind, Branch branch,
                                                  bool by_step) {
    const auto grids = tap_grids(bank);
    std::map<int, std::pair<Matrix, int>> sums;
    for (const auto& key : bank.keys()) {
        if (key.kind != kind || key.branch != branch)
            continue;
        auto grid = grids.find(key.layer_id);
        require(grid != grids.end(), ErrorKind::architecture_mismatch, "record for unknown layer " + key.layer_id);
        const Matrix resized = resize_query_axis(bank.fetch(key)->map, grid->second.height, grid->second.width);
        auto& [sum, count] = sums[by_step ? key.step : 0];
        if (count == 0) {
            sum = resized;
        } else {
            require(sum.cols() == resized.cols(), ErrorKind::shape,
                    "cannot average maps with " + std::to_string(sum.cols()) + " and " +
                        std::to_string(resized.cols()) + " keys");
            sum += resized;
        }
        ++count;
    }
    return sums;
}

}  // namespace

Matrix resize_query_axis(const Matrix& map, int grid_h, int grid_w, int out_h, int out_w) {
    require(grid_h > 0 && grid_w > 0 && out_h > 0 && out_w > 0, ErrorKind::domain, "grid sizes must be positive");
    require(map.rows() == static_cast<Eigen::Index>(grid_h) * grid_w, ErrorKind::shape,
            "map has " + std::to_string(map.rows()) + " queries, grid is " + std::to_string(grid_h) + "x" +
                std::to_string(grid_w));
    const auto wy = axis_weights(grid_h, out_h);
    const auto wx = axis_weights(grid_w, out_w);
    Matrix out(static_cast<Eigen::Index>(out_h) * out_w, map.cols());
    for (int y = 0; y < out_h; ++y) {
        const Interp& iy = wy[static_cast<std::size_t>(y)];
        for (int x = 0; x < out_w; ++x) {
            const Interp& ix = wx[static_cast<std::size_t>(x)];
            auto q = [&](int yy, int xx) { return map.row(static_cast<Eigen::Index>(yy) * grid_w + xx); };
            out.row(static_cast<Eigen::Index>(y) * out_w + x) =
                (1 - iy.frac) * ((1 - ix.frac) * q(iy.lo, ix.lo) + ix.frac * q(iy.lo, ix.hi)) +
                iy.frac * ((1 - ix.frac) * q(iy.hi, ix.lo) + ix.frac * q(iy.hi, ix.hi));
        }
    }
    return out;
}

Matrix average_attention(const AttentionBank& bank, AttentionKind kind, Branch branch) {
    auto sums = accumulate(bank, kind, branch, false);
    require(!sums.empty(), ErrorKind::empty_input,
            "bank holds no " + std::string(to_string(kind)) + "-attention records for this branch");
    auto& [sum, count] = sums.begin()->second;
    Matrix mean = sum / count;
    renormalize_rows(mean);
    return mean;
}

std::vector<Matrix> per_step_maps(const AttentionBank& bank, AttentionKind kind, Branch branch) {
    auto sums = accumulate(bank, kind, branch, true);
    require(!sums.empty(), ErrorKind::empty_input,
            "bank holds no " + std::string(to_string(kind)) + "-attention records for this branch");
    std::vector<Matrix> maps;
    for (auto& [step, entry] : sums) {
        Matrix mean = entry.first / entry.second;
        renormalize_rows(mean);
        maps.push_back(std::move(mean));
    }
    return maps;
}

}  // namespace subjswap
