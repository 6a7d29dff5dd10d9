// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

// Brute-force reference implementations. They use plain nested vectors and
// loops and share no code with the library beyond input conversion.

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "subjswap/latent.hpp"

namespace oracle {

using Table = std::vector<std::vector<double>>;

Table from_matrix(const subjswap::Matrix& m);
subjswap::Matrix to_matrix(const Table& t);

struct Attention {
    Table map;
    Table output;
};

// softmax(q k^T / sqrt(d)) and its product with v, one scalar at a time.
Attention attention(const Table& q, const Table& k, const Table& v);

Table matmul(const Table& a, const Table& b);

// z_prev written as c_z * z + c_eps * eps with the coefficients expanded.
std::vector<double> ddim(const std::vector<double>& z, const std::vector<double>& eps, double alpha_t,
                         double alpha_prev);

// Bilinear query-axis resize built from a tent kernel over every source
// pixel (half-pixel centres, clamped at the border).
Table resize_rows(const Table& map, int grid_h, int grid_w, int out_h, int out_w);

// Element-wise arithmetic mean, then row renormalization.
Table mean_rows_normalized(const std::vector<Table>& maps);

double frobenius_squared(const Table& m);

// Central difference of f at x along coordinate i.
double central_difference(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
                          std::size_t i, double h);

}  // namespace oracle
