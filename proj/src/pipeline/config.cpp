// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "subjswap/error.hpp"
#include "subjswap/log.hpp"
#include "subjswap/pipeline.hpp"

namespace subjswap {

void GenerationConfig::validate() const {
    require(steps >= 1, ErrorKind::validation, "steps must be at least 1");
    require(std::isfinite(guidance) && guidance >= 0.0, ErrorKind::validation, "guidance must be finite and >= 0");
    require(latent_shape.channels >= 1 && latent_shape.height >= 1 && latent_shape.width >= 1, ErrorKind::validation,
            "latent shape must be positive");
    schedule.validate(steps);
}

GenerationConfig GenerationConfig::normalized() const {
    GenerationConfig out = *this;
    require(steps >= 1, ErrorKind::validation, "steps must be at least 1");
    const SwapSchedule before = out.schedule;
    if (out.schedule.clamp_to(steps))
        warn("swap schedule " + before.to_string() + " exceeds " + std::to_string(steps) + " steps; clamped to " +
             out.schedule.to_string());
    out.validate();
    return out;
}

}  // namespace subjswap
