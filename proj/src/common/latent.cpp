// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include "subjswap/latent.hpp"

#include <cmath>

#include "subjswap/error.hpp"

namespace subjswap {

std::string LatentShape::to_string() const {
    return std::to_string(channels) + "x" + std::to_string(height) + "x" + std::to_string(width);
}

LatentGrid::LatentGrid(LatentShape shape, double fill)
    : m_shape(shape), m_values(shape.size(), fill) {}

LatentGrid::LatentGrid(LatentShape shape, std::vector<double> values)
    : m_shape(shape), m_values(std::move(values)) {
    require(m_values.size() == shape.size(), ErrorKind::shape,
            "latent value count " + std::to_string(m_values.size()) + " does not match shape " +
                shape.to_string());
}

Matrix LatentGrid::to_tokens() const {
    const int positions = m_shape.positions();
    Matrix tokens(positions, m_shape.channels);
    for (int c = 0; c < m_shape.channels; ++c)
        for (int p = 0; p < positions; ++p)
            tokens(p, c) = m_values[static_cast<std::size_t>(c) * positions + p];
    return tokens;
}

LatentGrid LatentGrid::from_tokens(const Matrix& tokens, LatentShape shape) {
    require(tokens.rows() == shape.positions() && tokens.cols() == shape.channels, ErrorKind::shape,
            "token matrix does not match latent shape " + shape.to_string());
    LatentGrid grid(shape);
    const int positions = shape.positions();
    for (int c = 0; c < shape.channels; ++c)
        for (int p = 0; p < positions; ++p)
            grid.m_values[static_cast<std::size_t>(c) * positions + p] = tokens(p, c);
    return grid;
}

void require_same_shape(const LatentGrid& a, const LatentGrid& b, const char* what) {
    require(a.shape() == b.shape(), ErrorKind::shape,
            std::string(what) + ": latent shapes differ (" + a.shape().to_string() + " vs " +
                b.shape().to_string() + ")");
}

LatentGrid& LatentGrid::operator+=(const LatentGrid& other) {
    require_same_shape(*this, other, "add");
    for (std::size_t i = 0; i < m_values.size(); ++i)
        m_values[i] += other.m_values[i];
    return *this;
}

LatentGrid& LatentGrid::operator-=(const LatentGrid& other) {
    require_same_shape(*this, other, "subtract");
    for (std::size_t i = 0; i < m_values.size(); ++i)
        m_values[i] -= other.m_values[i];
    return *this;
}

LatentGrid& LatentGrid::operator*=(double scale) {
    for (double& v : m_values)
        v *= scale;
    return *this;
}

double LatentGrid::squared_norm() const {
    double sum = 0.0;
    for (double v : m_values)
        sum += v * v;
    return sum;
}

double LatentGrid::norm() const { return std::sqrt(squared_norm()); }

bool LatentGrid::all_finite() const {
    for (double v : m_values)
        if (!std::isfinite(v))
            return false;
    return true;
}

LatentGrid operator+(LatentGrid a, const LatentGrid& b) { return a += b; }
LatentGrid operator-(LatentGrid a, const LatentGrid& b) { return a -= b; }
LatentGrid operator*(double scale, LatentGrid a) { return a *= scale; }

LatentGrid axpby(double a, const LatentGrid& x, double b, const LatentGrid& y) {
    require_same_shape(x, y, "axpby");
    LatentGrid out(x.shape());
    auto xs = x.values();
    auto ys = y.values();
    auto os = out.values();
    for (std::size_t i = 0; i < os.size(); ++i)
        os[i] = a * xs[i] + b * ys[i];
    return out;
}

double mean_squared_error(const LatentGrid& a, const LatentGrid& b) {
    require_same_shape(a, b, "mse");
    if (a.size() == 0)
        return 0.0;
    return (a - b).squared_norm() / static_cast<double>(a.size());
}

double relative_error(const LatentGrid& estimate, const LatentGrid& reference) {
    require_same_shape(estimate, reference, "relative error");
    const double denom = reference.norm();
    const double diff = (estimate - reference).norm();
    return denom > 0.0 ? diff / denom : diff;
}

}  // namespace subjswap
