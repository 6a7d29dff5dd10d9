// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include "subjswap/rng.hpp"

#include <cmath>
#include <numbers>

namespace subjswap {

double Rng::uniform() {
    return static_cast<double>(m_engine() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (m_has_spare) {
        m_has_spare = false;
        return m_spare;
    }
    double u1 = uniform();
    while (u1 <= 0.0)
        u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    m_spare = radius * std::sin(angle);
    m_has_spare = true;
    return radius * std::cos(angle);
}

int Rng::uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(m_engine() % span);
}

LatentGrid gaussian_latent(LatentShape shape, std::uint64_t seed) {
    Rng rng(seed);
    LatentGrid grid(shape);
    for (double& v : grid.values())
        v = rng.normal();
    return grid;
}

Matrix gaussian_matrix(int rows, int cols, double scale, Rng& rng) {
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            m(r, c) = scale * rng.normal();
    return m;
}

LatentGrid procedural_latent(LatentShape shape, std::uint64_t seed) {
    Rng rng(seed);
    LatentGrid grid(shape);
    for (int c = 0; c < shape.channels; ++c) {
        const double background = 2.0 * (rng.uniform() - 0.5);
        for (int y = 0; y < shape.height; ++y)
            for (int x = 0; x < shape.width; ++x)
                grid.at(c, y, x) = background;
    }

    const int shapes = 1 + rng.uniform_int(0, 2);
    for (int s = 0; s < shapes; ++s) {
        const bool disc = rng.uniform() < 0.5;
        const double cy = rng.uniform() * shape.height;
        const double cx = rng.uniform() * shape.width;
        const double extent = 1.0 + rng.uniform() * 0.3 * std::min(shape.height, shape.width);
        std::vector<double> fill(shape.channels);
        for (double& f : fill)
            f = 3.2 * (rng.uniform() - 0.5);
        for (int y = 0; y < shape.height; ++y) {
            for (int x = 0; x < shape.width; ++x) {
                const double dy = y + 0.5 - cy;
                const double dx = x + 0.5 - cx;
                const bool inside = disc ? (dy * dy + dx * dx <= extent * extent)
                                         : (std::abs(dy) <= extent && std::abs(dx) <= extent);
                if (!inside)
                    continue;
                for (int c = 0; c < shape.channels; ++c)
                    grid.at(c, y, x) = fill[c];
            }
        }
    }
    return grid;
}

}  // namespace subjswap
