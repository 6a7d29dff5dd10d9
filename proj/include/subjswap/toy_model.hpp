// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>

#include "subjswap/backend.hpp"

namespace subjswap {

struct ToyModelSpec {
    LatentShape latent{4, 8, 8};
    int blocks = 2;
    int heads = 2;
    int vocab_size = 256;
    int embed_dim = 32;
    int text_length = 8;
    int timesteps = 50;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const ToyModelSpec&) const = default;
};

// Small deterministic transformer denoiser over the flattened latent grid.
// Every block is self-attention, cross-attention on the text embedding, then
// a tanh feed-forward, each with a residual connection. The prediction is
// sqrt(1 - alpha_bar_t) * z plus a learned correction, so sampling stays
// bounded without training.
class ToyModel final : public NoisePredictor {
public:
    explicit ToyModel(const ToyModelSpec& spec = {});

    const ToyModelSpec& spec() const { return m_spec; }

    std::string name() const override { return "toy"; }
    LatentShape latent_shape() const override { return m_spec.latent; }
    int text_length() const override { return m_spec.text_length; }
    int vocab_size() const override { return m_spec.vocab_size; }
    const NoiseSchedule& schedule() const override { return m_schedule; }
    std::vector<TapInfo> taps() const override;

    Embedding encode_text(std::span<const TokenId> tokens) const override;
    LatentGrid predict(const LatentGrid& z, int t, const Embedding& text, const HookContext& hooks = {}) const override;

    LatentGrid encode_image(const RgbImage& image) const override;
    RgbImage decode_image(const LatentGrid& z) const override;

    bool supports_gradients() const override { return true; }
    Embedding embedding_gradient(const LatentGrid& z, int t, const Embedding& text,
                                 const LatentGrid& upstream) const override;

    Vector token_embedding(TokenId id) const override;
    void set_token_embedding(TokenId id, const Vector& embedding) override;

    void save(const std::filesystem::path& directory) const;
    static ToyModel load(const std::filesystem::path& directory);

    static constexpr int kPixelsPerLatent = 8;

private:
    struct Projection {
        std::vector<Matrix> query, key, value, out;  // one per head
    };
    struct Block {
        Projection self_attn;
        Projection cross_attn;
        Matrix ff_in, ff_out;
    };
    struct HeadCache {
        Matrix q, k, v, map;
    };
    struct BlockCache {
        Matrix after_self;
        Matrix after_cross;
        Matrix ff_activation;
        std::vector<HeadCache> self_heads;
        std::vector<HeadCache> cross_heads;
        Matrix input;
    };
    struct ForwardCache {
        std::vector<BlockCache> blocks;
    };

    Matrix forward(const LatentGrid& z, int t, const Embedding& text, const HookContext& hooks,
                   ForwardCache* cache) const;
    Matrix timestep_embedding(int t) const;
    void check_inputs(const LatentGrid& z, int t, const Embedding& text) const;
    std::string layer_id(int block, AttentionKind kind) const;

    ToyModelSpec m_spec;
    NoiseSchedule m_schedule;
    Matrix m_token_table;
    Matrix m_text_position;
    Matrix m_input_proj;
    Matrix m_spatial_position;
    Matrix m_output_proj;
    std::vector<Block> m_blocks;
    std::vector<std::string> m_self_ids;
    std::vector<std::string> m_cross_ids;
};

}  // namespace subjswap
