// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "subjswap/backend.hpp"

namespace subjswap {

// Scalar loss <upstream, eps(latent, t, text)> probed at up to 8 parameters.
// Without `token` the entries index the text embedding (row, col); with it
// they index the token's table embedding (column only) and the text is
// encode_text(tokens).
struct GradientProbe {
    LatentGrid latent;
    int t = 1;
    Embedding text;
    LatentGrid upstream;
    std::vector<std::pair<int, int>> entries;
    std::optional<TokenId> token;
    std::vector<TokenId> tokens;
};

struct GradientReport {
    std::vector<double> analytic;
    std::vector<double> numeric;
    std::vector<double> relative_error;
    double max_relative_error = 0.0;
    double tolerance = 1e-3;
    bool passed = false;
};

// Central differences with step `step` against the backend's analytic
// gradient. Relative error is |a - n| / max(|a|, |n|, 1e-6).
GradientReport gradient_check(const NoisePredictor& backend, const GradientProbe& probe, double tolerance = 1e-3,
                              double step = 1e-4);

}  // namespace subjswap
