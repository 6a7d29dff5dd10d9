// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

#include "subjswap/latent.hpp"

namespace subjswap {

// Portable seeded generator. std::normal_distribution is implementation
// defined, so normals come from Box-Muller over mt19937_64 output.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : m_engine(seed) {}

    double uniform();  // [0, 1)
    double normal();
    int uniform_int(int lo, int hi);  // inclusive range

    std::uint64_t next_u64() { return m_engine(); }

private:
    std::mt19937_64 m_engine;
    bool m_has_spare = false;
    double m_spare = 0.0;
};

LatentGrid gaussian_latent(LatentShape shape, std::uint64_t seed);
Matrix gaussian_matrix(int rows, int cols, double scale, Rng& rng);

// Seeded shapes (discs and boxes) over a flat background, in latent space.
LatentGrid procedural_latent(LatentShape shape, std::uint64_t seed);

}  // namespace subjswap
