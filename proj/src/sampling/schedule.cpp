// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include "subjswap/schedule.hpp"

#include <cmath>
#include <string>

#include "subjswap/error.hpp"

namespace subjswap {

NoiseSchedule::NoiseSchedule(std::vector<double> alpha_bar) : m_alpha_bar(std::move(alpha_bar)) {
    require(m_alpha_bar.size() >= 2, ErrorKind::schedule, "noise schedule needs at least one step");
    require(m_alpha_bar[0] == 1.0, ErrorKind::schedule, "alpha_bar[0] must equal 1");
    for (std::size_t t = 1; t < m_alpha_bar.size(); ++t) {
        const double a = m_alpha_bar[t];
        require(std::isfinite(a) && a > 0.0 && a <= 1.0, ErrorKind::schedule,
                "alpha_bar[" + std::to_string(t) + "] outside (0, 1]");
        require(a < m_alpha_bar[t - 1], ErrorKind::schedule, "alpha_bar must be strictly decreasing");
    }
}

NoiseSchedule NoiseSchedule::linear(int steps, double final_alpha_bar) {
    require(steps >= 1, ErrorKind::validation, "schedule needs at least one step");
    require(final_alpha_bar > 0.0 && final_alpha_bar < 1.0, ErrorKind::schedule, "final alpha_bar outside (0, 1)");
    std::vector<double> alpha_bar(static_cast<std::size_t>(steps) + 1);
    for (int t = 0; t <= steps; ++t)
        alpha_bar[t] = 1.0 - (static_cast<double>(t) / steps) * (1.0 - final_alpha_bar);
    return NoiseSchedule(std::move(alpha_bar));
}

double NoiseSchedule::alpha_bar(int t) const {
    require(t >= 0 && t <= steps(), ErrorKind::schedule,
            "timestep " + std::to_string(t) + " outside schedule of " + std::to_string(steps()) + " steps");
    return m_alpha_bar[static_cast<std::size_t>(t)];
}

}  // namespace subjswap
