// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include "oracles/oracles.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

Table from_matrix(const subjswap::Matrix& m) {
    Table t(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            t[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = m(r, c);
    return t;
}

subjswap::Matrix to_matrix(const Table& t) {
    subjswap::Matrix m(static_cast<Eigen::Index>(t.size()), t.empty() ? 0 : static_cast<Eigen::Index>(t[0].size()));
    for (std::size_t r = 0; r < t.size(); ++r)
        for (std::size_t c = 0; c < t[r].size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = t[r][c];
    return m;
}

Table matmul(const Table& a, const Table& b) {
    const std::size_t n = a.size(), inner = b.size(), m = b.empty() ? 0 : b[0].size();
    Table out(n, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            long double acc = 0.0L;
            for (std::size_t p = 0; p < inner; ++p)
                acc += static_cast<long double>(a[i][p]) * b[p][j];
            out[i][j] = static_cast<double>(acc);
        }
    return out;
}

Attention attention(const Table& q, const Table& k, const Table& v) {
    const std::size_t nq = q.size(), nk = k.size(), d = q[0].size();
    Attention out;
    out.map.assign(nq, std::vector<double>(nk));
    for (std::size_t i = 0; i < nq; ++i) {
        std::vector<long double> scores(nk);
        for (std::size_t j = 0; j < nk; ++j) {
            long double s = 0.0L;
            for (std::size_t p = 0; p < d; ++p)
                s += static_cast<long double>(q[i][p]) * k[j][p];
            scores[j] = s / std::sqrt(static_cast<long double>(d));
        }
        const long double top = *std::max_element(scores.begin(), scores.end());
        long double total = 0.0L;
        for (auto& s : scores) {
            s = std::exp(s - top);
            total += s;
        }
        for (std::size_t j = 0; j < nk; ++j)
            out.map[i][j] = static_cast<double>(scores[j] / total);
    }
    out.output = matmul(out.map, v);
    return out;
}

std::vector<double> ddim(const std::vector<double>& z, const std::vector<double>& eps, double alpha_t,
                         double alpha_prev) {
    const double c_z = std::sqrt(alpha_prev / alpha_t);
    const double c_eps = std::sqrt(1.0 - alpha_prev) - std::sqrt(alpha_prev * (1.0 - alpha_t) / alpha_t);
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        out[i] = c_z * z[i] + c_eps * eps[i];
    return out;
}

namespace {

double source_coordinate(int o, int in, int out) {
    double s = (o + 0.5) * in / out - 0.5;
    if (s < 0.0)
        s = 0.0;
    if (s > in - 1)
        s = in - 1;
    return s;
}

double tent(double x) { return std::max(0.0, 1.0 - std::abs(x)); }

}  // namespace

Table resize_rows(const Table& map, int grid_h, int grid_w, int out_h, int out_w) {
    const std::size_t cols = map[0].size();
    Table out(static_cast<std::size_t>(out_h * out_w), std::vector<double>(cols, 0.0));
    for (int oy = 0; oy < out_h; ++oy) {
        const double sy = source_coordinate(oy, grid_h, out_h);
        for (int ox = 0; ox < out_w; ++ox) {
            const double sx = source_coordinate(ox, grid_w, out_w);
            auto& row = out[static_cast<std::size_t>(oy * out_w + ox)];
            for (int y = 0; y < grid_h; ++y)
                for (int x = 0; x < grid_w; ++x) {
                    const double w = tent(sy - y) * tent(sx - x);
                    if (w == 0.0)
                        continue;
                    for (std::size_t c = 0; c < cols; ++c)
                        row[c] += w * map[static_cast<std::size_t>(y * grid_w + x)][c];
                }
        }
    }
    return out;
}

Table mean_rows_normalized(const std::vector<Table>& maps) {
    Table out = maps[0];
    for (auto& row : out)
        std::fill(row.begin(), row.end(), 0.0);
    for (const auto& m : maps)
        for (std::size_t r = 0; r < out.size(); ++r)
            for (std::size_t c = 0; c < out[r].size(); ++c)
                out[r][c] += m[r][c];
    for (auto& row : out) {
        double total = 0.0;
        for (double v : row)
            total += v / maps.size();
        for (double& v : row)
            v = v / maps.size() / total;
    }
    return out;
}

double frobenius_squared(const Table& m) {
    long double acc = 0.0L;
    for (const auto& row : m)
        for (double v : row)
            acc += static_cast<long double>(v) * v;
    return static_cast<double>(acc);
}

double central_difference(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
                          std::size_t i, double h) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double up = f(x);
    x[i] = x0 - h;
    const double down = f(x);
    return (up - down) / (2.0 * h);
}

}  // namespace oracle
