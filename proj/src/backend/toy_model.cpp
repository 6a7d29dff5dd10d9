// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include "subjswap/toy_model.hpp"

#include <algorithm>
#include <cmath>

#include "subjswap/error.hpp"
#include "subjswap/rng.hpp"
#include "subjswap/store.hpp"

namespace subjswap {

namespace {

// Latent-to-RGB factors in the style of common latent previewers (channel x rgb).
const double kLatentRgb[4][3] = {
    {0.3512, 0.2297, 0.3227},
    {0.3250, 0.4974, 0.2350},
    {-0.2829, 0.1762, 0.2721},
    {-0.2120, -0.2616, -0.7177},
};

constexpr double kOutputGain = 0.3;
constexpr double kResidualScale = 0.5;
constexpr double kRgbContrast = 2.0;

// Weight of the network term; vanishes at both ends of the schedule.
double correction_weight(double a) { return a * (1.0 - a); }

Matrix latent_rgb_factors(int channels) {
    Matrix f = Matrix::Zero(channels, 3);
    for (int c = 0; c < std::min(channels, 4); ++c)
        for (int k = 0; k < 3; ++k)
            f(c, k) = kLatentRgb[c][k];
    return f;
}

// d loss / d scores for a row softmax.
Matrix softmax_backward(const Matrix& map, const Matrix& grad_map) {
    Matrix weighted = map.cwiseProduct(grad_map);
    Vector row_dot = weighted.rowwise().sum();
    return weighted - map.cwiseProduct(row_dot.replicate(1, map.cols()));
}

}  // namespace

void ToyModelSpec::validate() const {
    require(latent.channels >= 1 && latent.height >= 1 && latent.width >= 1, ErrorKind::validation,
            "toy latent shape must be positive");
    require(blocks >= 1, ErrorKind::validation, "toy model needs at least one block");
    require(heads >= 1 && embed_dim % heads == 0, ErrorKind::validation, "embed_dim must be divisible by heads");
    require(embed_dim % 2 == 0, ErrorKind::validation, "embed_dim must be even");
    require(vocab_size >= 2, ErrorKind::validation, "vocab_size must be at least 2");
    require(text_length >= 1, ErrorKind::validation, "text_length must be positive");
    require(timesteps >= 1, ErrorKind::validation, "timesteps must be positive");
}

ToyModel::ToyModel(const ToyModelSpec& spec) : m_spec(spec) {
    m_spec.validate();
    m_schedule = NoiseSchedule::linear(m_spec.timesteps);

    const int d = m_spec.embed_dim;
    const int head_dim = d / m_spec.heads;
    const int channels = m_spec.latent.channels;
    const int positions = m_spec.latent.positions();
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

    Rng rng(m_spec.seed);
    m_token_table = gaussian_matrix(m_spec.vocab_size, d, 1.0, rng);
    m_text_position = gaussian_matrix(m_spec.text_length, d, 0.3, rng);
    m_input_proj = gaussian_matrix(channels, d, 1.0 / std::sqrt(static_cast<double>(channels)), rng);
    m_spatial_position = gaussian_matrix(positions, d, 0.3, rng);

    auto make_projection = [&] {
        Projection p;
        for (int h = 0; h < m_spec.heads; ++h) {
            p.query.push_back(gaussian_matrix(d, head_dim, inv_sqrt_d, rng));
            p.key.push_back(gaussian_matrix(d, head_dim, inv_sqrt_d, rng));
            p.value.push_back(gaussian_matrix(d, head_dim, inv_sqrt_d, rng));
            p.out.push_back(gaussian_matrix(head_dim, d, kResidualScale / std::sqrt(static_cast<double>(d)), rng));
        }
        return p;
    };
    for (int b = 0; b < m_spec.blocks; ++b) {
        Block block;
        block.self_attn = make_projection();
        block.cross_attn = make_projection();
        block.ff_in = gaussian_matrix(d, 2 * d, inv_sqrt_d, rng);
        block.ff_out = gaussian_matrix(2 * d, d, kResidualScale / std::sqrt(2.0 * d), rng);
        m_blocks.push_back(std::move(block));
        m_self_ids.push_back(layer_id(b, AttentionKind::self_attention));
        m_cross_ids.push_back(layer_id(b, AttentionKind::cross_attention));
    }
    m_output_proj = gaussian_matrix(d, channels, kOutputGain * inv_sqrt_d, rng);
}

std::string ToyModel::layer_id(int block, AttentionKind kind) const {
    return "blocks." + std::to_string(block) + "." + std::string(to_string(kind));
}

std::vector<TapInfo> ToyModel::taps() const {
    std::vector<TapInfo> out;
    const auto& shape = m_spec.latent;
    for (int b = 0; b < m_spec.blocks; ++b) {
        out.push_back({m_self_ids[b], AttentionKind::self_attention, m_spec.heads, shape.height, shape.width,
                       shape.positions()});
        out.push_back({m_cross_ids[b], AttentionKind::cross_attention, m_spec.heads, shape.height, shape.width,
                       m_spec.text_length});
    }
    return out;
}

Embedding ToyModel::encode_text(std::span<const TokenId> tokens) const {
    require(static_cast<int>(tokens.size()) == m_spec.text_length, ErrorKind::prompt_length,
            "toy text encoder expects " + std::to_string(m_spec.text_length) + " tokens, got " +
                std::to_string(tokens.size()));
    Embedding e(m_spec.text_length, m_spec.embed_dim);
    for (int i = 0; i < m_spec.text_length; ++i) {
        const TokenId id = tokens[static_cast<std::size_t>(i)];
        require(id >= 0 && id < m_spec.vocab_size, ErrorKind::vocabulary,
                "token id " + std::to_string(id) + " outside vocabulary of " + std::to_string(m_spec.vocab_size));
        e.row(i) = m_token_table.row(id) + m_text_position.row(i);
    }
    return e;
}

Matrix ToyModel::timestep_embedding(int t) const {
    const int d = m_spec.embed_dim;
    const int half = d / 2;
    Matrix row(1, d);
    for (int i = 0; i < half; ++i) {
        const double freq = std::exp(-std::log(10000.0) * i / half);
        row(0, 2 * i) = std::sin(t * freq);
        row(0, 2 * i + 1) = std::cos(t * freq);
    }
    return row;
}

void ToyModel::check_inputs(const LatentGrid& z, int t, const Embedding& text) const {
    require(z.shape() == m_spec.latent, ErrorKind::shape,
            "latent " + z.shape().to_string() + " does not match toy model " + m_spec.latent.to_string());
    require(t >= 1 && t <= m_spec.timesteps, ErrorKind::domain,
            "timestep " + std::to_string(t) + " outside [1, " + std::to_string(m_spec.timesteps) + "]");
    require(text.rows() == m_spec.text_length && text.cols() == m_spec.embed_dim, ErrorKind::shape,
            "text embedding must be " + std::to_string(m_spec.text_length) + "x" + std::to_string(m_spec.embed_dim));
    require(z.all_finite() && text.allFinite(), ErrorKind::numeric, "non-finite toy model input");
}

Matrix ToyModel::forward(const LatentGrid& z, int t, const Embedding& text, const HookContext& hooks,
                         ForwardCache* cache) const {
    const Matrix tokens = z.to_tokens();
    Matrix hidden = tokens * m_input_proj + m_spatial_position;
    hidden.rowwise() += timestep_embedding(t).row(0);

    auto attend = [&](const Projection& proj, const std::string& id, AttentionKind kind, const Matrix& queries_from,
                      const Matrix& keys_from, std::vector<HeadCache>* head_cache) {
        Matrix delta = Matrix::Zero(queries_from.rows(), m_spec.embed_dim);
        for (int h = 0; h < m_spec.heads; ++h) {
            Matrix q = queries_from * proj.query[h];
            Matrix k = keys_from * proj.key[h];
            Matrix v = keys_from * proj.value[h];
            AttentionResult attn = scaled_attention(q, k, v);
            Matrix out = std::move(attn.output);
            if (hooks.controller) {
                AttentionSite site{hooks.step, hooks.branch, id, h, kind};
                out = hooks.controller->intercept(site, attn.map, v, std::move(out));
            }
            delta += out * proj.out[h];
            if (head_cache)
                head_cache->push_back({std::move(q), std::move(k), std::move(v), std::move(attn.map)});
        }
        return delta;
    };

    for (int b = 0; b < m_spec.blocks; ++b) {
        const Block& block = m_blocks[b];
        BlockCache* bc = nullptr;
        if (cache) {
            cache->blocks.emplace_back();
            bc = &cache->blocks.back();
            bc->input = hidden;
        }
        Matrix after_self = hidden + attend(block.self_attn, m_self_ids[b], AttentionKind::self_attention, hidden,
                                            hidden, bc ? &bc->self_heads : nullptr);
        Matrix after_cross = after_self + attend(block.cross_attn, m_cross_ids[b], AttentionKind::cross_attention,
                                                 after_self, text, bc ? &bc->cross_heads : nullptr);
        Matrix activation = (after_cross * block.ff_in).array().tanh().matrix();
        hidden = after_cross + activation * block.ff_out;
        if (bc) {
            bc->after_self = std::move(after_self);
            bc->after_cross = std::move(after_cross);
            bc->ff_activation = std::move(activation);
        }
    }

    const double a = m_schedule.alpha_bar(t);
    return std::sqrt(1.0 - a) * tokens + correction_weight(a) * (hidden * m_output_proj);
}

LatentGrid ToyModel::predict(const LatentGrid& z, int t, const Embedding& text, const HookContext& hooks) const {
    check_inputs(z, t, text);
    return LatentGrid::from_tokens(forward(z, t, text, hooks, nullptr), m_spec.latent);
}

Embedding ToyModel::embedding_gradient(const LatentGrid& z, int t, const Embedding& text,
                                       const LatentGrid& upstream) const {
    check_inputs(z, t, text);
    require_same_shape(z, upstream, "embedding gradient upstream");
    ForwardCache cache;
    forward(z, t, text, HookContext{}, &cache);

    const double inv_sqrt_head = 1.0 / std::sqrt(static_cast<double>(m_spec.embed_dim / m_spec.heads));
    Embedding grad_text = Embedding::Zero(text.rows(), text.cols());
    Matrix grad_hidden = correction_weight(m_schedule.alpha_bar(t)) * (upstream.to_tokens() * m_output_proj.transpose());

    for (int b = m_spec.blocks - 1; b >= 0; --b) {
        const Block& block = m_blocks[b];
        const BlockCache& bc = cache.blocks[b];

        // feed-forward residual
        Matrix grad_pre = (grad_hidden * block.ff_out.transpose())
                              .cwiseProduct((1.0 - bc.ff_activation.array().square()).matrix());
        Matrix grad_after_cross = grad_hidden + grad_pre * block.ff_in.transpose();

        // cross-attention: queries from after_self, keys/values from text
        Matrix grad_after_self = grad_after_cross;
        for (int h = 0; h < m_spec.heads; ++h) {
            const HeadCache& hc = bc.cross_heads[h];
            Matrix grad_out = grad_after_cross * block.cross_attn.out[h].transpose();
            Matrix grad_map = grad_out * hc.v.transpose();
            Matrix grad_v = hc.map.transpose() * grad_out;
            Matrix grad_scores = softmax_backward(hc.map, grad_map) * inv_sqrt_head;
            Matrix grad_q = grad_scores * hc.k;
            Matrix grad_k = grad_scores.transpose() * hc.q;
            grad_after_self += grad_q * block.cross_attn.query[h].transpose();
            grad_text += grad_k * block.cross_attn.key[h].transpose() + grad_v * block.cross_attn.value[h].transpose();
        }

        if (b == 0)
            break;

        // self-attention: queries, keys and values all from the block input
        Matrix grad_input = grad_after_self;
        for (int h = 0; h < m_spec.heads; ++h) {
            const HeadCache& hc = bc.self_heads[h];
            Matrix grad_out = grad_after_self * block.self_attn.out[h].transpose();
            Matrix grad_map = grad_out * hc.v.transpose();
            Matrix grad_v = hc.map.transpose() * grad_out;
            Matrix grad_scores = softmax_backward(hc.map, grad_map) * inv_sqrt_head;
            Matrix grad_q = grad_scores * hc.k;
            Matrix grad_k = grad_scores.transpose() * hc.q;
            grad_input += grad_q * block.self_attn.query[h].transpose() + grad_k * block.self_attn.key[h].transpose() +
                          grad_v * block.self_attn.value[h].transpose();
        }
        grad_hidden = std::move(grad_input);
    }
    return grad_text;
}

Vector ToyModel::token_embedding(TokenId id) const {
    require(id >= 0 && id < m_spec.vocab_size, ErrorKind::vocabulary, "token id " + std::to_string(id) + " unknown");
    return m_token_table.row(id).transpose();
}

void ToyModel::set_token_embedding(TokenId id, const Vector& embedding) {
    require(id >= 0 && id < m_spec.vocab_size, ErrorKind::vocabulary, "token id " + std::to_string(id) + " unknown");
    require(embedding.size() == m_spec.embed_dim, ErrorKind::shape, "token embedding has the wrong width");
    require(embedding.allFinite(), ErrorKind::numeric, "non-finite token embedding");
    m_token_table.row(id) = embedding.transpose();
}

RgbImage ToyModel::decode_image(const LatentGrid& z) const {
    require(z.shape() == m_spec.latent, ErrorKind::shape, "latent does not match toy decoder");
    const Matrix rgb = z.to_tokens() * latent_rgb_factors(m_spec.latent.channels);
    const int scale = kPixelsPerLatent;
    RgbImage image(m_spec.latent.width * scale, m_spec.latent.height * scale);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const int p = (y / scale) * m_spec.latent.width + (x / scale);
            auto* px = image.pixel(x, y);
            for (int k = 0; k < 3; ++k) {
                const double s = 1.0 / (1.0 + std::exp(-kRgbContrast * rgb(p, k)));
                px[k] = static_cast<std::uint8_t>(std::clamp(std::lround(255.0 * s), 0L, 255L));
            }
        }
    }
    return image;
}

LatentGrid ToyModel::encode_image(const RgbImage& image) const {
    const int scale = kPixelsPerLatent;
    require(image.width == m_spec.latent.width * scale && image.height == m_spec.latent.height * scale,
            ErrorKind::shape,
            "toy encoder expects " + std::to_string(m_spec.latent.width * scale) + "x" +
                std::to_string(m_spec.latent.height * scale) + " images");
    const Matrix factors = latent_rgb_factors(m_spec.latent.channels);
    // minimum-norm inverse of the linear part of the decoder
    const Matrix inverse = factors * (factors.transpose() * factors).inverse();
    Matrix logits(m_spec.latent.positions(), 3);
    for (int ly = 0; ly < m_spec.latent.height; ++ly) {
        for (int lx = 0; lx < m_spec.latent.width; ++lx) {
            double sum[3] = {0, 0, 0};
            for (int y = ly * scale; y < (ly + 1) * scale; ++y)
                for (int x = lx * scale; x < (lx + 1) * scale; ++x)
                    for (int k = 0; k < 3; ++k)
                        sum[k] += image.pixel(x, y)[k];
            for (int k = 0; k < 3; ++k) {
                const double s = std::clamp(sum[k] / (scale * scale * 255.0), 1e-3, 1.0 - 1e-3);
                logits(ly * m_spec.latent.width + lx, k) = std::log(s / (1.0 - s)) / kRgbContrast;
            }
        }
    }
    return LatentGrid::from_tokens(logits * inverse.transpose(), m_spec.latent);
}

void ToyModel::save(const std::filesystem::path& directory) const {
    StoreWriter writer(directory, "toy_model");
    auto& meta = writer.metadata();
    meta["latent"] = {m_spec.latent.channels, m_spec.latent.height, m_spec.latent.width};
    meta["blocks"] = m_spec.blocks;
    meta["heads"] = m_spec.heads;
    meta["vocab_size"] = m_spec.vocab_size;
    meta["embed_dim"] = m_spec.embed_dim;
    meta["text_length"] = m_spec.text_length;
    meta["timesteps"] = m_spec.timesteps;
    meta["seed"] = m_spec.seed;

    writer.put_matrix("token_table.bin", m_token_table);
    writer.put_matrix("text_position.bin", m_text_position);
    writer.put_matrix("input_proj.bin", m_input_proj);
    writer.put_matrix("spatial_position.bin", m_spatial_position);
    writer.put_matrix("output_proj.bin", m_output_proj);
    for (int b = 0; b < m_spec.blocks; ++b) {
        const Block& block = m_blocks[b];
        const std::string prefix = "blocks." + std::to_string(b) + ".";
        for (auto [name, proj] : {std::pair{"self", &block.self_attn}, std::pair{"cross", &block.cross_attn}}) {
            for (int h = 0; h < m_spec.heads; ++h) {
                const std::string stem = prefix + name + "." + std::to_string(h) + ".";
                writer.put_matrix(stem + "query.bin", proj->query[h]);
                writer.put_matrix(stem + "key.bin", proj->key[h]);
                writer.put_matrix(stem + "value.bin", proj->value[h]);
                writer.put_matrix(stem + "out.bin", proj->out[h]);
            }
        }
        writer.put_matrix(prefix + "ff_in.bin", block.ff_in);
        writer.put_matrix(prefix + "ff_out.bin", block.ff_out);
    }
    writer.commit();
}

ToyModel ToyModel::load(const std::filesystem::path& directory) {
    StoreReader reader(directory, "toy_model");
    const auto& meta = reader.metadata();
    ToyModelSpec spec;
    try {
        const auto latent = meta.at("latent").get<std::vector<int>>();
        require(latent.size() == 3, ErrorKind::corruption, "toy model latent shape must have 3 entries");
        spec.latent = {latent[0], latent[1], latent[2]};
        spec.blocks = meta.at("blocks").get<int>();
        spec.heads = meta.at("heads").get<int>();
        spec.vocab_size = meta.at("vocab_size").get<int>();
        spec.embed_dim = meta.at("embed_dim").get<int>();
        spec.text_length = meta.at("text_length").get<int>();
        spec.timesteps = meta.at("timesteps").get<int>();
        spec.seed = meta.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::corruption, std::string("toy model manifest: ") + e.what());
    }

    ToyModel model(spec);
    auto load_into = [&](const std::string& file, Matrix& target) {
        Matrix m = reader.matrix(file);
        require(m.rows() == target.rows() && m.cols() == target.cols(), ErrorKind::corruption,
                "weight " + file + " has the wrong shape");
        target = std::move(m);
    };
    load_into("token_table.bin", model.m_token_table);
    load_into("text_position.bin", model.m_text_position);
    load_into("input_proj.bin", model.m_input_proj);
    load_into("spatial_position.bin", model.m_spatial_position);
    load_into("output_proj.bin", model.m_output_proj);
    for (int b = 0; b < spec.blocks; ++b) {
        Block& block = model.m_blocks[b];
        const std::string prefix = "blocks." + std::to_string(b) + ".";
        for (auto [name, proj] : {std::pair{"self", &block.self_attn}, std::pair{"cross", &block.cross_attn}}) {
            for (int h = 0; h < spec.heads; ++h) {
                const std::string stem = prefix + name + "." + std::to_string(h) + ".";
                load_into(stem + "query.bin", proj->query[h]);
                load_into(stem + "key.bin", proj->key[h]);
                load_into(stem + "value.bin", proj->value[h]);
                load_into(stem + "out.bin", proj->out[h]);
            }
        }
        load_into(prefix + "ff_in.bin", block.ff_in);
        load_into(prefix + "ff_out.bin", block.ff_out);
    }
    return model;
}

}  // namespace subjswap
