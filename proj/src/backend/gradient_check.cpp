// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include "subjswap/gradient_check.hpp"

#include <algorithm>
#include <cmath>

#include "subjswap/error.hpp"

namespace subjswap {

namespace {

double probe_loss(const NoisePredictor& backend, const GradientProbe& probe, const Embedding& text) {
    const LatentGrid eps = backend.predict(probe.latent, probe.t, text);
    double sum = 0.0;
    auto a = eps.values();
    auto u = probe.upstream.values();
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += a[i] * u[i];
    return sum;
}

}  // namespace

GradientReport gradient_check(const NoisePredictor& backend, const GradientProbe& probe, double tolerance,
                              double step) {
    require(!probe.entries.empty() && probe.entries.size() <= 8, ErrorKind::validation,
            "gradient probe must select between 1 and 8 parameters");
    require(backend.supports_gradients(), ErrorKind::capability, backend.name() + " cannot differentiate embeddings");

    const Embedding text = probe.token ? backend.encode_text(probe.tokens) : probe.text;
    const Embedding grad_text = backend.embedding_gradient(probe.latent, probe.t, text, probe.upstream);
    require(grad_text.allFinite(), ErrorKind::numeric, "non-finite analytic gradient");

    GradientReport report;
    report.tolerance = tolerance;
    for (const auto& [row, col] : probe.entries) {
        require(col >= 0 && col < text.cols(), ErrorKind::validation, "probe column out of range");
        double analytic = 0.0;
        Embedding plus = text, minus = text;
        if (probe.token) {
            for (std::size_t i = 0; i < probe.tokens.size(); ++i) {
                if (probe.tokens[i] != *probe.token)
                    continue;
                const auto r = static_cast<Eigen::Index>(i);
                analytic += grad_text(r, col);
                plus(r, col) += step;
                minus(r, col) -= step;
            }
        } else {
            require(row >= 0 && row < text.rows(), ErrorKind::validation, "probe row out of range");
            analytic = grad_text(row, col);
            plus(row, col) += step;
            minus(row, col) -= step;
        }
        const double numeric = (probe_loss(backend, probe, plus) - probe_loss(backend, probe, minus)) / (2.0 * step);
        require(std::isfinite(numeric), ErrorKind::numeric, "non-finite finite-difference gradient");
        const double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
        report.analytic.push_back(analytic);
        report.numeric.push_back(numeric);
        report.relative_error.push_back(rel);
        report.max_relative_error = std::max(report.max_relative_error, rel);
    }
    report.passed = report.max_relative_error < tolerance;
    return report;
}

}  // namespace subjswap
