// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "support/fixtures.hpp"
#include "subjswap/concept.hpp"
#include "subjswap/error.hpp"
#include "subjswap/rng.hpp"

using namespace subjswap;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error raised");
    return ErrorKind::contract;
}

}  // namespace

TEST_SUITE("concept") {

TEST_CASE("defaults") {
    const auto inv = ConceptTrainerConfig::embedding_inversion_defaults();
    CHECK(inv.learning_rate == 5e-4);
    CHECK(inv.steps == 1000);
    CHECK(inv.mode == ConceptMode::embedding_inversion);
    const auto ft = ConceptTrainerConfig::finetune_defaults();
    CHECK(ft.learning_rate == 1e-6);
    CHECK(ft.steps == 800);
    CHECK(ft.mode == ConceptMode::finetune_adapter);
    CHECK(concept_mode_from_string(to_string(ConceptMode::finetune_adapter)) == ConceptMode::finetune_adapter);
    CHECK(kind_of([] { concept_mode_from_string("lora"); }) == ErrorKind::validation);
}

TEST_CASE("config validation") {
    ConceptTrainerConfig c;
    c.learning_rate = 0.0;
    CHECK(kind_of([&] { c.validate(); }) == ErrorKind::validation);
    c = {};
    c.batch = 0;
    CHECK(kind_of([&] { c.validate(); }) == ErrorKind::validation);
    c = {};
    c.prompt_template = "a photo of";
    CHECK(kind_of([&] { c.validate(); }) == ErrorKind::validation);
}

TEST_CASE("training lowers the denoising loss and leaves the model untouched") {
    auto toy = fixture::toy(50);
    const Tokenizer tok;
    const TokenId token = tok.token_id("<sks>");
    const auto prompt = tok.from_template("a photo of {}", "<sks>");
    const std::vector<LatentGrid> refs{procedural_latent(toy.latent_shape(), 21),
                                       procedural_latent(toy.latent_shape(), 22)};
    const Vector before = toy.token_embedding(token);

    ConceptTrainerConfig cfg;
    cfg.steps = 150;
    cfg.learning_rate = 2e-2;
    cfg.seed = 5;
    const auto result = train_concept_embedding(refs, token, prompt, cfg, toy, toy.schedule());
    CHECK(result.loss_history.size() == 150);
    CHECK(toy.token_embedding(token) == before);
    const double fresh = concept_denoising_loss(refs, token, prompt, before, toy, toy.schedule(), 99);
    const double trained = concept_denoising_loss(refs, token, prompt, result.embedding, toy, toy.schedule(), 99);
    CHECK(trained < fresh);

    cfg.steps = 0;
    CHECK(train_concept_embedding(refs, token, prompt, cfg, toy, toy.schedule()).embedding == before);
}

TEST_CASE("training input checks") {
    auto toy = fixture::toy(10);
    const Tokenizer tok;
    const auto prompt = tok.from_template("a photo of {}", "<sks>");
    const std::vector<LatentGrid> refs{procedural_latent(toy.latent_shape(), 1)};
    ConceptTrainerConfig cfg;
    cfg.steps = 1;
    CHECK(kind_of([&] { train_concept_embedding({}, tok.token_id("<sks>"), prompt, cfg, toy, toy.schedule()); }) ==
          ErrorKind::empty_input);
    CHECK(kind_of([&] { train_concept_embedding(refs, tok.token_id("<zzz>"), prompt, cfg, toy, toy.schedule()); }) ==
          ErrorKind::validation);
    cfg.mode = ConceptMode::finetune_adapter;
    CHECK(kind_of([&] { train_concept_embedding(refs, tok.token_id("<sks>"), prompt, cfg, toy, toy.schedule()); }) ==
          ErrorKind::validation);
}

TEST_CASE("fine-tuning plan json round trip") {
    FinetunePlan plan;
    plan.checkpoint = "hub://x";
    plan.prompt_template = "a photo of {}";
    plan.reference_images = {"a.png", "b.png"};
    CHECK(FinetunePlan::from_json(plan.to_json()) == plan);
    auto broken = plan.to_json();
    broken.erase("steps");
    CHECK(kind_of([&] { FinetunePlan::from_json(broken); }) == ErrorKind::corruption);
}

}
