// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

namespace subjswap {

// Cumulative signal fractions alpha_bar[t] for t = 0..T; alpha_bar[0] = 1,
// strictly decreasing, all in (0, 1].
class NoiseSchedule {
public:
    NoiseSchedule() = default;
    explicit NoiseSchedule(std::vector<double> alpha_bar);

    // alpha_bar[t] = 1 - (t / T) * (1 - final_alpha_bar)
    static NoiseSchedule linear(int steps, double final_alpha_bar = 0.02);

    int steps() const { return static_cast<int>(m_alpha_bar.size()) - 1; }
    double alpha_bar(int t) const;
    const std::vector<double>& values() const { return m_alpha_bar; }

    bool operator==(const NoiseSchedule&) const = default;

private:
    std::vector<double> m_alpha_bar{1.0};
};

}  // namespace subjswap
