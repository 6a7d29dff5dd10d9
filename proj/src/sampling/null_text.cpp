// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "subjswap/error.hpp"
#include "subjswap/sampling.hpp"

namespace subjswap {

const Embedding& NullTextBank::at_step(int step) const {
    require(step >= 1 && step <= steps(), ErrorKind::schedule_mismatch,
            "null-text bank has no entry for step " + std::to_string(step));
    return per_step[static_cast<std::size_t>(step - 1)];
}

NullTextBank NullTextBank::constant(const Embedding& null_embedding, int steps) {
    return NullTextBank{std::vector<Embedding>(static_cast<std::size_t>(steps), null_embedding)};
}

bool NullTextBank::operator==(const NullTextBank& other) const {
    if (per_step.size() != other.per_step.size())
        return false;
    for (std::size_t i = 0; i < per_step.size(); ++i) {
        const auto& a = per_step[i];
        const auto& b = other.per_step[i];
        if (a.rows() != b.rows() || a.cols() != b.cols() || !(a.array() == b.array()).all())
            return false;
    }
    return true;
}

NullTextResult optimize_null_text(const Trajectory& inversion, const Embedding& cond, const Embedding& initial_null,
                                  const NoisePredictor& backend, const NoiseSchedule& schedule,
                                  const NullTextOptions& options) {
    require(inversion.direction == TrajectoryDirection::inversion, ErrorKind::contract,
            "null-text optimization needs an inversion trajectory");
    require(inversion.steps() == schedule.steps(), ErrorKind::schedule_mismatch,
            "inversion length does not match the schedule");
    require(options.iterations >= 0, ErrorKind::validation, "iterations must be non-negative");
    require(options.learning_rate > 0.0, ErrorKind::validation, "learning rate must be positive");
    require(cond.rows() == initial_null.rows() && cond.cols() == initial_null.cols(), ErrorKind::shape,
            "null embedding shape differs from the conditional embedding");
    if (options.iterations > 0)
        require(backend.supports_gradients(), ErrorKind::capability,
                backend.name() + " cannot differentiate embeddings");

    const int steps = schedule.steps();
    const double w = options.guidance;
    NullTextResult result;
    result.reconstruction.direction = TrajectoryDirection::sampling;
    result.reconstruction.by_time.resize(static_cast<std::size_t>(steps) + 1);
    result.reconstruction.by_time[static_cast<std::size_t>(steps)] = inversion.at(steps);

    LatentGrid z = inversion.at(steps);
    Embedding null_embedding = initial_null;
    for (int step = 1; step <= steps; ++step) {
        const int t = steps - step + 1;
        const LatentGrid& pivot = inversion.at(t - 1);
        const LatentGrid eps_c = backend.predict(z, t, cond);

        auto guided = [&](const Embedding& null) {
            if (w == 1.0)
                return eps_c;
            const LatentGrid eps_u = backend.predict(z, t, null);
            return w == 0.0 ? eps_u : eps_u + w * (eps_c - eps_u);
        };
        auto pivot_loss = [&](const Embedding& null) {
            return (ddim_step(z, guided(null), t, t - 1, schedule) - pivot).squared_norm();
        };

        // d z_{t-1} / d eps for the DDIM update
        const double a_t = schedule.alpha_bar(t);
        const double a_prev = schedule.alpha_bar(t - 1);
        const double eps_coeff = std::sqrt(1.0 - a_prev) - std::sqrt(a_prev) * std::sqrt(1.0 - a_t) / std::sqrt(a_t);

        std::vector<double> history;
        double loss = pivot_loss(null_embedding);
        require(std::isfinite(loss) && loss <= options.divergence_loss, ErrorKind::diverged,
                "null-text pivot loss diverged at step " + std::to_string(step));
        history.push_back(loss);
        for (int it = 0; it < options.iterations && loss >= options.early_stop_loss; ++it) {
            const LatentGrid residual = ddim_step(z, guided(null_embedding), t, t - 1, schedule) - pivot;
            const LatentGrid upstream = (2.0 * eps_coeff * (1.0 - w)) * residual;
            const Embedding grad = backend.embedding_gradient(z, t, null_embedding, upstream);
            require(grad.allFinite(), ErrorKind::numeric, "non-finite null-text gradient");
            if (grad.squaredNorm() == 0.0)
                break;

            bool accepted = false;
            double rate = options.learning_rate;
            for (int halving = 0; halving < 30 && !accepted; ++halving, rate *= 0.5) {
                Embedding candidate = null_embedding - rate * grad;
                const double candidate_loss = pivot_loss(candidate);
                if (std::isfinite(candidate_loss) && candidate_loss <= loss) {
                    null_embedding = std::move(candidate);
                    loss = candidate_loss;
                    accepted = true;
                }
            }
            if (!accepted)
                break;
            history.push_back(loss);
        }

        result.bank.per_step.push_back(null_embedding);
        result.loss_history.push_back(std::move(history));
        z = ddim_step(z, guided(null_embedding), t, t - 1, schedule);
        result.reconstruction.by_time[static_cast<std::size_t>(t - 1)] = z;
    }
    return result;
}

}  // namespace subjswap
