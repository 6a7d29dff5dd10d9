// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace subjswap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct LatentShape {
    int channels = 4;
    int height = 8;
    int width = 8;

    std::size_t size() const { return static_cast<std::size_t>(channels) * height * width; }
    int positions() const { return height * width; }
    bool operator==(const LatentShape&) const = default;
    std::string to_string() const;
};

// Channel-major (C, H, W) latent tensor at double precision.
class LatentGrid {
public:
    LatentGrid() = default;
    explicit LatentGrid(LatentShape shape, double fill = 0.0);
    LatentGrid(LatentShape shape, std::vector<double> values);

    const LatentShape& shape() const { return m_shape; }
    std::size_t size() const { return m_values.size(); }
    bool empty() const { return m_values.empty(); }

    double& at(int c, int y, int x) { return m_values[index(c, y, x)]; }
    double at(int c, int y, int x) const { return m_values[index(c, y, x)]; }

    std::span<double> values() { return m_values; }
    std::span<const double> values() const { return m_values; }

    // One row per spatial position (row-major y, x), one column per channel.
    Matrix to_tokens() const;
    static LatentGrid from_tokens(const Matrix& tokens, LatentShape shape);

    LatentGrid& operator+=(const LatentGrid& other);
    LatentGrid& operator-=(const LatentGrid& other);
    LatentGrid& operator*=(double scale);

    double squared_norm() const;
    double norm() const;
    bool all_finite() const;

    bool operator==(const LatentGrid& other) const = default;

private:
    std::size_t index(int c, int y, int x) const {
        return (static_cast<std::size_t>(c) * m_shape.height + y) * m_shape.width + x;
    }

    LatentShape m_shape{0, 0, 0};
    std::vector<double> m_values;
};

LatentGrid operator+(LatentGrid a, const LatentGrid& b);
LatentGrid operator-(LatentGrid a, const LatentGrid& b);
LatentGrid operator*(double scale, LatentGrid a);

// a * x + b * y, elementwise.
LatentGrid axpby(double a, const LatentGrid& x, double b, const LatentGrid& y);

double mean_squared_error(const LatentGrid& a, const LatentGrid& b);
double relative_error(const LatentGrid& estimate, const LatentGrid& reference);

void require_same_shape(const LatentGrid& a, const LatentGrid& b, const char* what);

}  // namespace subjswap
