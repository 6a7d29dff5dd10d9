// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "subjswap/error.hpp"
#include "subjswap/hooks.hpp"
#include "subjswap/pipeline.hpp"

namespace subjswap {

namespace {

void check_backend(const LatentGrid& z_T, const PromptSpec& prompt, const GenerationConfig& config,
                   const NoisePredictor& backend, const NullTextBank* null_bank) {
    require(backend.schedule().steps() == config.steps, ErrorKind::schedule_mismatch,
            backend.name() + " runs a " + std::to_string(backend.schedule().steps()) + "-step schedule, config asks for " +
                std::to_string(config.steps));
    require(z_T.shape() == backend.latent_shape(), ErrorKind::shape,
            "initial latent " + z_T.shape().to_string() + " does not match backend " +
                backend.latent_shape().to_string());
    require(static_cast<int>(prompt.tokens.size()) == backend.text_length(), ErrorKind::prompt_length,
            "prompt is padded to " + std::to_string(prompt.tokens.size()) + " tokens, backend expects " +
                std::to_string(backend.text_length()));
    if (null_bank)
        require(null_bank->steps() == config.steps, ErrorKind::schedule_mismatch,
                "null-text bank covers " + std::to_string(null_bank->steps()) + " steps, config has " +
                    std::to_string(config.steps));
}

UnconditionalFor unconditional_source(const NullTextBank* null_bank, const Embedding& fallback) {
    if (null_bank)
        return [null_bank](int step) -> const Embedding& { return null_bank->at_step(step); };
    return [&fallback](int) -> const Embedding& { return fallback; };
}

std::vector<Branch> swap_branches(const GenerationConfig& config) {
    auto branches = guided_branches(config.guidance);
    if (!config.swap_unconditional)
        std::erase(branches, Branch::unconditional);
    return branches;
}

}  // namespace

Embedding null_text_embedding(const NoisePredictor& backend) {
    return backend.encode_text(std::vector<TokenId>(static_cast<std::size_t>(backend.text_length()), kPadToken));
}

Trajectory generate(const LatentGrid& z_T, const PromptSpec& prompt, const GenerationConfig& config,
                    const NoisePredictor& backend, const NullTextBank* null_bank) {
    const GenerationConfig cfg = config.normalized();
    check_backend(z_T, prompt, cfg, backend, null_bank);
    const Embedding cond = backend.encode_text(prompt.tokens);
    const Embedding null = null_text_embedding(backend);
    return sample(z_T, cond, unconditional_source(null_bank, null), backend, backend.schedule(), cfg.guidance);
}

CaptureResult generate_with_capture(const LatentGrid& z_T, const PromptSpec& prompt, const GenerationConfig& config,
                                    const NoisePredictor& backend, const NullTextBank* null_bank) {
    const GenerationConfig cfg = config.normalized();
    check_backend(z_T, prompt, cfg, backend, null_bank);
    const Embedding cond = backend.encode_text(prompt.tokens);
    const Embedding null = null_text_embedding(backend);

    const LayerFilter filter(cfg.layers);
    AttentionBank bank(BankOptions{cfg.bank_memory_budget, cfg.spill_directory});
    const auto branches = guided_branches(cfg.guidance);
    bank.begin_capture(cfg.steps, cfg.schedule, filter.select(backend.taps()), branches);
    CaptureController capture(bank, filter);
    const int window = bank.window();

    auto controllers = [&](int step, Branch) -> AttentionController* { return step <= window ? &capture : nullptr; };
    auto verify = [&](int step) {
        if (step <= window)
            for (Branch b : branches)
                capture.verify_step(step, b);
    };
    Trajectory trajectory = sample(z_T, cond, unconditional_source(null_bank, null), backend, backend.schedule(),
                                   cfg.guidance, controllers, verify);
    bank.finish_capture();
    return CaptureResult{std::move(trajectory), std::move(bank)};
}

Trajectory swap_subject(const LatentGrid& source_z_T, const AttentionBank& bank, const PromptSpec& target_prompt,
                     const GenerationConfig& config, const NoisePredictor& backend, const NullTextBank* null_bank,
                     AttentionBank* effective) {
    const GenerationConfig cfg = config.normalized();
    check_backend(source_z_T, target_prompt, cfg, backend, null_bank);

    const LayerFilter filter(cfg.layers);
    const auto layout = filter.select(backend.taps());
    const auto branches = swap_branches(cfg);
    const int required = cfg.schedule.capture_window();
    if (required > 0) {
        require(bank.total_steps() == cfg.steps, ErrorKind::schedule_mismatch,
                "bank was captured over " + std::to_string(bank.total_steps()) + " steps, config has " +
                    std::to_string(cfg.steps));
        require(bank.layout() == layout, ErrorKind::architecture_mismatch,
                "bank layer layout does not match the backend's hooked layers");
        bank.require_complete(required, branches);
    }

    if (effective) {
        require(effective->empty() && !effective->capturing(), ErrorKind::contract,
                "effective-state bank must start empty");
        effective->begin_capture(cfg.steps, cfg.schedule, layout, guided_branches(cfg.guidance));
    }

    const Embedding cond = backend.encode_text(target_prompt.tokens);
    const Embedding null = null_text_embedding(backend);
    SwapController swap(bank, cfg.schedule, cfg.steps, branches, filter, effective);
    auto controllers = [&](int step, Branch) -> AttentionController* {
        const bool recording = effective && step <= effective->window();
        return (recording || decide_swap(step, cfg.schedule, cfg.steps).any()) ? &swap : nullptr;
    };
    // z_T^target is the source's z_T
    Trajectory trajectory = sample(source_z_T, cond, unconditional_source(null_bank, null), backend,
                                   backend.schedule(), cfg.guidance, controllers);
    if (effective)
        effective->finish_capture();
    return trajectory;
}

}  // namespace subjswap
