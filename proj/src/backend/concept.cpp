// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include "subjswap/concept.hpp"

#include <cmath>

#include "subjswap/error.hpp"
#include "subjswap/rng.hpp"

namespace subjswap {

namespace {

struct DenoisingSample {
    std::size_t reference = 0;
    int t = 1;
    LatentGrid noise;
};

DenoisingSample draw_sample(std::size_t references, const LatentShape& shape, int steps, Rng& rng) {
    DenoisingSample s;
    s.reference = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(references) - 1));
    s.t = rng.uniform_int(1, steps);
    s.noise = gaussian_latent(shape, rng.next_u64());
    return s;
}

LatentGrid noised(const LatentGrid& clean, const DenoisingSample& s, const NoiseSchedule& schedule) {
    const double a = schedule.alpha_bar(s.t);
    return axpby(std::sqrt(a), clean, std::sqrt(1.0 - a), s.noise);
}

// Replaces the token's contribution in every row where it appears.
Embedding with_token(const Embedding& base, std::span<const TokenId> tokens, TokenId token, const Vector& current,
                     const Vector& replacement) {
    Embedding e = base;
    for (std::size_t i = 0; i < tokens.size(); ++i)
        if (tokens[i] == token)
            e.row(static_cast<Eigen::Index>(i)) += (replacement - current).transpose();
    return e;
}

void check_inputs(std::span<const LatentGrid> references, TokenId token, std::span<const TokenId> prompt_tokens) {
    require(!references.empty(), ErrorKind::empty_input, "concept learning needs at least one reference");
    bool present = false;
    for (TokenId id : prompt_tokens)
        present = present || id == token;
    require(present, ErrorKind::validation, "concept token does not occur in the training prompt");
}

}  // namespace

std::string_view to_string(ConceptMode mode) {
    return mode == ConceptMode::embedding_inversion ? "embedding_inversion" : "finetune_adapter";
}

ConceptMode concept_mode_from_string(std::string_view name) {
    if (name == "embedding_inversion")
        return ConceptMode::embedding_inversion;
    if (name == "finetune_adapter")
        return ConceptMode::finetune_adapter;
    fail(ErrorKind::validation, "unknown concept mode '" + std::string(name) + "'");
}

ConceptTrainerConfig ConceptTrainerConfig::embedding_inversion_defaults() {
    ConceptTrainerConfig c;
    c.mode = ConceptMode::embedding_inversion;
    c.learning_rate = 5e-4;
    c.steps = 1000;
    c.batch = 4;
    return c;
}

ConceptTrainerConfig ConceptTrainerConfig::finetune_defaults() {
    ConceptTrainerConfig c;
    c.mode = ConceptMode::finetune_adapter;
    c.learning_rate = 1e-6;
    c.steps = 800;
    c.batch = 1;
    return c;
}

void ConceptTrainerConfig::validate() const {
    require(std::isfinite(learning_rate) && learning_rate > 0.0, ErrorKind::validation,
            "learning rate must be positive");
    require(steps >= 0, ErrorKind::validation, "steps must be non-negative");
    require(batch >= 1, ErrorKind::validation, "batch must be at least 1");
    require(prompt_template.find("{}") != std::string::npos, ErrorKind::validation,
            "prompt template must contain {} for the concept token");
}

ConceptTrainingResult train_concept_embedding(std::span<const LatentGrid> references, TokenId token,
                                              std::span<const TokenId> prompt_tokens,
                                              const ConceptTrainerConfig& config, NoisePredictor& backend,
                                              const NoiseSchedule& schedule) {
    require(config.mode == ConceptMode::embedding_inversion, ErrorKind::validation,
            "token training needs mode embedding_inversion");
    config.validate();
    check_inputs(references, token, prompt_tokens);
    require(backend.supports_gradients(), ErrorKind::capability, backend.name() + " cannot differentiate embeddings");

    const Vector initial = backend.token_embedding(token);
    const Embedding base = backend.encode_text(prompt_tokens);

    ConceptTrainingResult result{initial, {}};
    Vector first_moment = Vector::Zero(initial.size());
    Vector second_moment = Vector::Zero(initial.size());
    constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

    Rng rng(config.seed);
    const std::size_t elements = references.front().size();
    for (int step = 1; step <= config.steps; ++step) {
        const Embedding text = with_token(base, prompt_tokens, token, initial, result.embedding);
        Vector grad = Vector::Zero(initial.size());
        double loss = 0.0;
        for (int b = 0; b < config.batch; ++b) {
            const auto sample = draw_sample(references.size(), references.front().shape(), schedule.steps(), rng);
            const LatentGrid z = noised(references[sample.reference], sample, schedule);
            const LatentGrid residual = backend.predict(z, sample.t, text) - sample.noise;
            loss += residual.squared_norm() / static_cast<double>(elements);
            const LatentGrid upstream = (2.0 / static_cast<double>(elements * config.batch)) * residual;
            const Embedding grad_text = backend.embedding_gradient(z, sample.t, text, upstream);
            for (std::size_t i = 0; i < prompt_tokens.size(); ++i)
                if (prompt_tokens[i] == token)
                    grad += grad_text.row(static_cast<Eigen::Index>(i)).transpose();
        }
        loss /= config.batch;
        require(std::isfinite(loss) && loss <= 1e6 && grad.allFinite(), ErrorKind::diverged,
                "concept training diverged at step " + std::to_string(step));
        result.loss_history.push_back(loss);

        first_moment = beta1 * first_moment + (1.0 - beta1) * grad;
        second_moment = beta2 * second_moment + (1.0 - beta2) * grad.cwiseProduct(grad);
        const double c1 = 1.0 - std::pow(beta1, step);
        const double c2 = 1.0 - std::pow(beta2, step);
        result.embedding -= (config.learning_rate * (first_moment / c1).array() /
                             ((second_moment / c2).array().sqrt() + adam_eps))
                                .matrix();
    }
    return result;
}

double concept_denoising_loss(std::span<const LatentGrid> references, TokenId token,
                              std::span<const TokenId> prompt_tokens, const Vector& embedding,
                              const NoisePredictor& backend, const NoiseSchedule& schedule, std::uint64_t seed,
                              int draws_per_reference) {
    check_inputs(references, token, prompt_tokens);
    const Vector current = backend.token_embedding(token);
    const Embedding text = with_token(backend.encode_text(prompt_tokens), prompt_tokens, token, current, embedding);
    Rng rng(seed);
    double total = 0.0;
    int count = 0;
    for (std::size_t r = 0; r < references.size(); ++r) {
        for (int d = 0; d < draws_per_reference; ++d) {
            DenoisingSample s;
            s.reference = r;
            s.t = rng.uniform_int(1, schedule.steps());
            s.noise = gaussian_latent(references[r].shape(), rng.next_u64());
            const LatentGrid z = noised(references[r], s, schedule);
            total += mean_squared_error(backend.predict(z, s.t, text), s.noise);
            ++count;
        }
    }
    return total / count;
}

nlohmann::json FinetunePlan::to_json() const {
    return {{"checkpoint", checkpoint},
            {"optimizer", optimizer},
            {"learning_rate", learning_rate},
            {"steps", steps},
            {"batch", batch},
            {"tune_denoiser", tune_denoiser},
            {"tune_text_encoder", tune_text_encoder},
            {"prompt_template", prompt_template},
            {"reference_images", reference_images},
            {"dry_run", dry_run}};
}

FinetunePlan FinetunePlan::from_json(const nlohmann::json& json) {
    FinetunePlan plan;
    try {
        plan.checkpoint = json.at("checkpoint").get<std::string>();
        plan.optimizer = json.at("optimizer").get<std::string>();
        plan.learning_rate = json.at("learning_rate").get<double>();
        plan.steps = json.at("steps").get<int>();
        plan.batch = json.at("batch").get<int>();
        plan.tune_denoiser = json.at("tune_denoiser").get<bool>();
        plan.tune_text_encoder = json.at("tune_text_encoder").get<bool>();
        plan.prompt_template = json.at("prompt_template").get<std::string>();
        plan.reference_images = json.at("reference_images").get<std::vector<std::string>>();
        plan.dry_run = json.at("dry_run").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::corruption, std::string("malformed fine-tuning plan: ") + e.what());
    }
    return plan;
}

}  // namespace subjswap
