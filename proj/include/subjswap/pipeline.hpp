// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "subjswap/bank.hpp"
#include "subjswap/prompt.hpp"
#include "subjswap/sampling.hpp"

namespace subjswap {

struct GenerationConfig {
    int steps = 50;
    double guidance = 7.5;
    std::uint64_t seed = 0;
    LatentShape latent_shape{4, 8, 8};
    SwapSchedule schedule{10, 25, 20};
    // Swap in the unconditional CFG branch as well as the conditional one.
    bool swap_unconditional = true;
    // Hooked layers; empty means every attention layer.
    std::vector<std::string> layers;
    std::size_t bank_memory_budget = std::numeric_limits<std::size_t>::max();
    std::filesystem::path spill_directory;

    void validate() const;
    // Clamps schedule values above `steps` (with a warning), then validates.
    GenerationConfig normalized() const;
};

struct CaptureResult {
    Trajectory trajectory;
    AttentionBank bank;
};

// Embedding of the all-padding prompt.
Embedding null_text_embedding(const NoisePredictor& backend);

// Plain CFG-DDIM generation; the null bank, when given, supplies the
// per-step unconditional embeddings.
Trajectory generate(const LatentGrid& z_T, const PromptSpec& prompt, const GenerationConfig& config,
                    const NoisePredictor& backend, const NullTextBank* null_bank = nullptr);

// Same trajectory as generate(), plus the attention state of steps
// 1..schedule.capture_window() for every hooked layer, head and evaluated branch.
CaptureResult generate_with_capture(const LatentGrid& z_T, const PromptSpec& prompt, const GenerationConfig& config,
                                    const NoisePredictor& backend, const NullTextBank* null_bank = nullptr);

// Target generation from the source's initial noise, consulting the bank
// at each step under config.schedule. `effective`, when given, must be an
// empty bank and receives the maps and outputs actually used.
Trajectory swap_subject(const LatentGrid& source_z_T, const AttentionBank& bank, const PromptSpec& target_prompt,
                     const GenerationConfig& config, const NoisePredictor& backend,
                     const NullTextBank* null_bank = nullptr, AttentionBank* effective = nullptr);

}  // namespace subjswap
