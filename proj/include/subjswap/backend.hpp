// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "subjswap/bank.hpp"
#include "subjswap/hooks.hpp"
#include "subjswap/image.hpp"
#include "subjswap/latent.hpp"
#include "subjswap/schedule.hpp"

namespace subjswap {

using TokenId = std::int32_t;

// Text embedding: one row per token position.
using Embedding = Matrix;

struct HookContext {
    int step = 0;
    Branch branch = Branch::conditional;
    AttentionController* controller = nullptr;
};

// Noise prediction network conditioned on a text embedding. Implementations
// route every attention sublayer through the context's controller.
//
// Instances are not safe for concurrent prediction when a controller carries
// per-run state; weights are immutable except through set_token_embedding.
class NoisePredictor {
public:
    virtual ~NoisePredictor() = default;

    virtual std::string name() const = 0;
    virtual LatentShape latent_shape() const = 0;
    virtual int text_length() const = 0;
    virtual int vocab_size() const = 0;
    virtual const NoiseSchedule& schedule() const = 0;
    // Stable, ordered list of hookable attention sublayers.
    virtual std::vector<TapInfo> taps() const = 0;
    virtual bool deterministic() const { return true; }

    virtual Embedding encode_text(std::span<const TokenId> tokens) const = 0;
    virtual LatentGrid predict(const LatentGrid& z, int t, const Embedding& text, const HookContext& hooks = {}) const = 0;

    virtual LatentGrid encode_image(const RgbImage& image) const = 0;
    virtual RgbImage decode_image(const LatentGrid& z) const = 0;

    // d<upstream, eps(z, t, text)> / d text. Only backends reporting
    // supports_gradients() implement it.
    virtual bool supports_gradients() const { return false; }
    virtual Embedding embedding_gradient(const LatentGrid& z, int t, const Embedding& text,
                                         const LatentGrid& upstream) const;

    // Row i of encode_text(tokens) depends on the token table only through
    // token_embedding(tokens[i]) with unit Jacobian.
    virtual Vector token_embedding(TokenId id) const;
    virtual void set_token_embedding(TokenId id, const Vector& embedding);
};

struct Prediction {
    LatentGrid eps;
    std::vector<AttentionRecord> taps;
};

// One prediction with every attention tap recorded.
Prediction predict_with_taps(const NoisePredictor& backend, const LatentGrid& z, int t, const Embedding& text,
                             int step = 1, Branch branch = Branch::conditional);

}  // namespace subjswap
