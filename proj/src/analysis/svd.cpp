// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include <Eigen/SVD>

#include "subjswap/analysis.hpp"
#include "subjswap/error.hpp"

namespace subjswap {

namespace {

Eigen::BDCSVD<Matrix> decompose(const Matrix& map) {
    require(map.size() > 0, ErrorKind::empty_input, "cannot decompose an empty map");
    require(map.allFinite(), ErrorKind::numeric, "map contains non-finite values");
    return Eigen::BDCSVD<Matrix>(map, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

void check_rank(const Matrix& map, int k) {
    require(k > 0, ErrorKind::domain, "k must be positive, got " + std::to_string(k));
    require(k <= std::min(map.rows(), map.cols()), ErrorKind::domain,
            "k = " + std::to_string(k) + " exceeds the smaller map dimension");
}

}  // namespace

SvdSummary svd_components(const Matrix& map, int k, int grid_h, int grid_w) {
    check_rank(map, k);
    require(map.rows() == static_cast<Eigen::Index>(grid_h) * grid_w, ErrorKind::shape,
            "map rows do not match a " + std::to_string(grid_h) + "x" + std::to_string(grid_w) + " grid");
    const auto svd = decompose(map);
    SvdSummary summary;
    summary.singular_values = svd.singularValues();
    const double energy = summary.singular_values.squaredNorm();
    for (int i = 0; i < k; ++i) {
        // sign fixed so the entries sum to a non-negative value
        Vector u = svd.matrixU().col(i);
        if (u.sum() < 0.0)
            u = -u;
        const double lo = u.minCoeff();
        const double span = u.maxCoeff() - lo;
        u = span > 0.0 ? Vector((u.array() - lo) / span) : Vector::Zero(u.size());
        Matrix component(grid_h, grid_w);
        for (int y = 0; y < grid_h; ++y)
            for (int x = 0; x < grid_w; ++x)
                component(y, x) = u(static_cast<Eigen::Index>(y) * grid_w + x);
        summary.components.push_back(std::move(component));
        const double s = summary.singular_values(i);
        summary.explained_fraction.push_back(energy > 0.0 ? s * s / energy : 0.0);
    }
    return summary;
}

Matrix rank_k_approximation(const Matrix& map, int k) {
    check_rank(map, k);
    const auto svd = decompose(map);
    return svd.matrixU().leftCols(k) * svd.singularValues().head(k).asDiagonal() *
           svd.matrixV().leftCols(k).transpose();
}

}  // namespace subjswap
