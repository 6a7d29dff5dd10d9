// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include "subjswap/backend.hpp"

#include "subjswap/error.hpp"

namespace subjswap {

Embedding NoisePredictor::embedding_gradient(const LatentGrid&, int, const Embedding&, const LatentGrid&) const {
    fail(ErrorKind::capability, name() + " does not provide embedding gradients");
}

Vector NoisePredictor::token_embedding(TokenId) const {
    fail(ErrorKind::capability, name() + " does not expose token embeddings");
}

void NoisePredictor::set_token_embedding(TokenId, const Vector&) {
    fail(ErrorKind::capability, name() + " does not expose token embeddings");
}

Prediction predict_with_taps(const NoisePredictor& backend, const LatentGrid& z, int t, const Embedding& text,
                             int step, Branch branch) {
    TapCollector collector;
    HookContext hooks{step, branch, &collector};
    LatentGrid eps = backend.predict(z, t, text, hooks);
    return {std::move(eps), std::move(collector.records)};
}

}  // namespace subjswap
