// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include "subjswap/backend.hpp"
#include "subjswap/schedule.hpp"

namespace subjswap {

enum class TrajectoryDirection { sampling, inversion };

// Latents indexed by timestep: at(t) is z_t for t = 0..T.
struct Trajectory {
    TrajectoryDirection direction = TrajectoryDirection::sampling;
    std::vector<LatentGrid> by_time;

    int steps() const { return static_cast<int>(by_time.size()) - 1; }
    const LatentGrid& at(int t) const;
    // z_0 for sampling, z_T for inversion.
    const LatentGrid& final() const;

    bool operator==(const Trajectory&) const = default;
};

// Deterministic (eta = 0) DDIM update from t to t_prev < t.
LatentGrid ddim_step(const LatentGrid& z_t, const LatentGrid& eps, int t, int t_prev, const NoiseSchedule& schedule);

// Same update in the noising direction (t_next > t).
LatentGrid ddim_inverse_step(const LatentGrid& z_t, const LatentGrid& eps, int t, int t_next,
                             const NoiseSchedule& schedule);

// Branches a guided prediction evaluates at guidance weight w.
std::vector<Branch> guided_branches(double w);

// eps_u + w (eps_c - eps_u). w = 1 evaluates only the conditional branch and
// w = 0 only the unconditional one.
LatentGrid cfg_predict(const NoisePredictor& backend, const LatentGrid& z, int t, const Embedding& cond,
                       const Embedding& uncond, double w, int step = 0, AttentionController* cond_hook = nullptr,
                       AttentionController* uncond_hook = nullptr);

// Step j in 1..T runs at timestep T - j + 1.
using UnconditionalFor = std::function<const Embedding&(int step)>;
using ControllerFor = std::function<AttentionController*(int step, Branch branch)>;
using StepObserver = std::function<void(int step)>;

Trajectory sample(const LatentGrid& z_T, const Embedding& cond, const UnconditionalFor& uncond,
                  const NoisePredictor& backend, const NoiseSchedule& schedule, double w,
                  const ControllerFor& controllers = {}, const StepObserver& after_step = {});

// z_0 -> z_T with guidance 1 (conditional prediction only).
Trajectory ddim_invert(const LatentGrid& z_0, const Embedding& cond, const NoisePredictor& backend,
                       const NoiseSchedule& schedule);

// Per-step unconditional embeddings; at_step(j) for j = 1..T.
struct NullTextBank {
    std::vector<Embedding> per_step;

    int steps() const { return static_cast<int>(per_step.size()); }
    const Embedding& at_step(int step) const;
    static NullTextBank constant(const Embedding& null_embedding, int steps);

    bool operator==(const NullTextBank& other) const;
};

struct NullTextOptions {
    int iterations = 10;
    double learning_rate = 1e-2;
    double early_stop_loss = 1e-5;
    double guidance = 7.5;
    double divergence_loss = 1e6;
};

struct NullTextResult {
    NullTextBank bank;
    // Pivot loss before the first update and after every accepted update.
    std::vector<std::vector<double>> loss_history;
    Trajectory reconstruction;
};

// Per step, descends |z*_{t-1} - ddim_step(z_t, cfg(null_j))|^2 in the null
// embedding, halving the step until the loss does not increase. Each step
// starts from the previous step's optimum.
NullTextResult optimize_null_text(const Trajectory& inversion, const Embedding& cond, const Embedding& initial_null,
                                  const NoisePredictor& backend, const NoiseSchedule& schedule,
                                  const NullTextOptions& options = {});

Trajectory reconstruct(const LatentGrid& z_T, const Embedding& cond, const NullTextBank& null_bank,
                       const NoisePredictor& backend, const NoiseSchedule& schedule, double w);

// sqrt(sum_t |a_t - b_t|^2 / sum_t |b_t|^2) over t = 0..T-1.
double trajectory_relative_error(const Trajectory& estimate, const Trajectory& reference);

}  // namespace subjswap
