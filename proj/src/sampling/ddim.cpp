// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "subjswap/error.hpp"
#include "subjswap/sampling.hpp"

namespace subjswap {

namespace {

LatentGrid transition(const LatentGrid& z, const LatentGrid& eps, int from, int to, const NoiseSchedule& schedule) {
    require_same_shape(z, eps, "ddim");
    const double a_from = schedule.alpha_bar(from);
    const double a_to = schedule.alpha_bar(to);
    // x0 = (z - sqrt(1 - a_from) eps) / sqrt(a_from)
    const LatentGrid x0 = axpby(1.0 / std::sqrt(a_from), z, -std::sqrt(1.0 - a_from) / std::sqrt(a_from), eps);
    return axpby(std::sqrt(a_to), x0, std::sqrt(1.0 - a_to), eps);
}

}  // namespace

const LatentGrid& Trajectory::at(int t) const {
    require(t >= 0 && t <= steps(), ErrorKind::domain, "trajectory has no latent for t=" + std::to_string(t));
    return by_time[static_cast<std::size_t>(t)];
}

const LatentGrid& Trajectory::final() const {
    require(!by_time.empty(), ErrorKind::empty_input, "empty trajectory");
    return direction == TrajectoryDirection::sampling ? by_time.front() : by_time.back();
}

LatentGrid ddim_step(const LatentGrid& z_t, const LatentGrid& eps, int t, int t_prev, const NoiseSchedule& schedule) {
    require(t > t_prev && t_prev >= 0, ErrorKind::ordering,
            "ddim_step needs t > t_prev >= 0 (got t=" + std::to_string(t) + ", t_prev=" + std::to_string(t_prev) + ")");
    return transition(z_t, eps, t, t_prev, schedule);
}

LatentGrid ddim_inverse_step(const LatentGrid& z_t, const LatentGrid& eps, int t, int t_next,
                             const NoiseSchedule& schedule) {
    require(t_next > t && t >= 0, ErrorKind::ordering, "inverse step needs t_next > t >= 0");
    return transition(z_t, eps, t, t_next, schedule);
}

std::vector<Branch> guided_branches(double w) {
    if (w == 1.0)
        return {Branch::conditional};
    if (w == 0.0)
        return {Branch::unconditional};
    return {Branch::conditional, Branch::unconditional};
}

LatentGrid cfg_predict(const NoisePredictor& backend, const LatentGrid& z, int t, const Embedding& cond,
                       const Embedding& uncond, double w, int step, AttentionController* cond_hook,
                       AttentionController* uncond_hook) {
    require(std::isfinite(w) && w >= 0.0, ErrorKind::validation, "guidance weight must be finite and >= 0");
    require(cond.rows() == uncond.rows() && cond.cols() == uncond.cols(), ErrorKind::shape,
            "conditional and unconditional embeddings differ in shape");
    if (w == 1.0)
        return backend.predict(z, t, cond, HookContext{step, Branch::conditional, cond_hook});
    const LatentGrid eps_u = backend.predict(z, t, uncond, HookContext{step, Branch::unconditional, uncond_hook});
    if (w == 0.0)
        return eps_u;
    const LatentGrid eps_c = backend.predict(z, t, cond, HookContext{step, Branch::conditional, cond_hook});
    return eps_u + w * (eps_c - eps_u);
}

Trajectory sample(const LatentGrid& z_T, const Embedding& cond, const UnconditionalFor& uncond,
                  const NoisePredictor& backend, const NoiseSchedule& schedule, double w,
                  const ControllerFor& controllers, const StepObserver& after_step) {
    const int steps = schedule.steps();
    Trajectory traj;
    traj.direction = TrajectoryDirection::sampling;
    traj.by_time.resize(static_cast<std::size_t>(steps) + 1);
    traj.by_time[static_cast<std::size_t>(steps)] = z_T;
    LatentGrid z = z_T;
    for (int step = 1; step <= steps; ++step) {
        const int t = steps - step + 1;
        AttentionController* cond_hook = controllers ? controllers(step, Branch::conditional) : nullptr;
        AttentionController* uncond_hook = controllers ? controllers(step, Branch::unconditional) : nullptr;
        const LatentGrid eps = cfg_predict(backend, z, t, cond, uncond(step), w, step, cond_hook, uncond_hook);
        z = ddim_step(z, eps, t, t - 1, schedule);
        require(z.all_finite(), ErrorKind::numeric, "sampling produced non-finite latents at step " + std::to_string(step));
        traj.by_time[static_cast<std::size_t>(t - 1)] = z;
        if (after_step)
            after_step(step);
    }
    return traj;
}

Trajectory ddim_invert(const LatentGrid& z_0, const Embedding& cond, const NoisePredictor& backend,
                       const NoiseSchedule& schedule) {
    require(backend.deterministic(), ErrorKind::contract, "DDIM inversion requires a deterministic backend");
    const int steps = schedule.steps();
    Trajectory traj;
    traj.direction = TrajectoryDirection::inversion;
    traj.by_time.reserve(static_cast<std::size_t>(steps) + 1);
    traj.by_time.push_back(z_0);
    LatentGrid z = z_0;
    for (int t = 1; t <= steps; ++t) {
        const LatentGrid eps = backend.predict(z, t, cond);
        z = ddim_inverse_step(z, eps, t - 1, t, schedule);
        require(z.all_finite(), ErrorKind::numeric, "inversion produced non-finite latents at t=" + std::to_string(t));
        traj.by_time.push_back(z);
    }
    return traj;
}

Trajectory reconstruct(const LatentGrid& z_T, const Embedding& cond, const NullTextBank& null_bank,
                       const NoisePredictor& backend, const NoiseSchedule& schedule, double w) {
    require(null_bank.steps() == schedule.steps(), ErrorKind::schedule_mismatch,
            "null-text bank has " + std::to_string(null_bank.steps()) + " entries for a " +
                std::to_string(schedule.steps()) + "-step schedule");
    return sample(z_T, cond, [&](int step) -> const Embedding& { return null_bank.at_step(step); }, backend, schedule,
                  w);
}

double trajectory_relative_error(const Trajectory& estimate, const Trajectory& reference) {
    require(estimate.steps() == reference.steps(), ErrorKind::schedule_mismatch, "trajectories differ in length");
    double num = 0.0, den = 0.0;
    for (int t = 0; t < reference.steps(); ++t) {
        num += (estimate.at(t) - reference.at(t)).squared_norm();
        den += reference.at(t).squared_norm();
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace subjswap
