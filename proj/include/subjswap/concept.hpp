// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "subjswap/backend.hpp"

namespace subjswap {

enum class ConceptMode { embedding_inversion, finetune_adapter };

std::string_view to_string(ConceptMode mode);
ConceptMode concept_mode_from_string(std::string_view name);

struct ConceptTrainerConfig {
    ConceptMode mode = ConceptMode::embedding_inversion;
    double learning_rate = 5e-4;
    int steps = 1000;
    int batch = 4;
    // "{}" marks where the concept token goes.
    std::string prompt_template = "{}";
    std::uint64_t seed = 0;

    static ConceptTrainerConfig embedding_inversion_defaults();
    static ConceptTrainerConfig finetune_defaults();

    void validate() const;
};

struct ConceptTrainingResult {
    Vector embedding;
    std::vector<double> loss_history;  // mean minibatch loss per step
};

// Learns only the embedding of `token`: minimizes the denoising loss
// |eps - eps_theta(sqrt(a) x + sqrt(1 - a) eps, text(tokens), t)|^2 over the
// references. The backend's table entry is restored before returning.
ConceptTrainingResult train_concept_embedding(std::span<const LatentGrid> references, TokenId token,
                                              std::span<const TokenId> prompt_tokens,
                                              const ConceptTrainerConfig& config, NoisePredictor& backend,
                                              const NoiseSchedule& schedule);

// Mean denoising loss over a fixed, seeded set of (t, noise) draws per
// reference, with `embedding` in place of the token's table entry.
double concept_denoising_loss(std::span<const LatentGrid> references, TokenId token,
                              std::span<const TokenId> prompt_tokens, const Vector& embedding,
                              const NoisePredictor& backend, const NoiseSchedule& schedule, std::uint64_t seed,
                              int draws_per_reference = 8);

// Full fine-tuning plan for an attached pretrained checkpoint.
struct FinetunePlan {
    std::string checkpoint;
    std::string optimizer = "AdamW";
    double learning_rate = 1e-6;
    int steps = 800;
    int batch = 1;
    bool tune_denoiser = true;
    bool tune_text_encoder = true;
    std::string prompt_template;
    std::vector<std::string> reference_images;
    bool dry_run = true;

    nlohmann::json to_json() const;
    static FinetunePlan from_json(const nlohmann::json& json);
    bool operator==(const FinetunePlan&) const = default;
};

}  // namespace subjswap
