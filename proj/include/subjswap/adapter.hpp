// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include "subjswap/backend.hpp"
#include "subjswap/concept.hpp"
#include "subjswap/toy_model.hpp"

namespace subjswap {

// What an external latent-diffusion implementation must provide to be driven
// through PretrainedAdapter.
class AdapterRuntime {
public:
    // Invoked once per attention head; may rewrite `output` in place.
    using AttentionCallback = std::function<void(const std::string& layer_id, int head, AttentionKind kind,
                                                 const Matrix& map, const Matrix& values, Matrix& output)>;

    virtual ~AdapterRuntime() = default;

    virtual LatentShape latent_shape() const = 0;
    virtual int text_length() const = 0;
    virtual int vocab_size() const = 0;
    virtual const NoiseSchedule& schedule() const = 0;
    virtual std::vector<TapInfo> attention_layers() const = 0;
    virtual Embedding encode_text(std::span<const TokenId> tokens) const = 0;
    virtual LatentGrid run_denoiser(const LatentGrid& z, int t, const Embedding& text,
                                    const AttentionCallback& on_attention) const = 0;
    virtual LatentGrid encode_image(const RgbImage& image) const = 0;
    virtual RgbImage decode_image(const LatentGrid& z) const = 0;

    virtual bool supports_finetune() const { return false; }
    virtual void finetune(const FinetunePlan& plan);
};

// Maps the hook registry onto an external runtime addressed by an opaque
// checkpoint uri. Without a runtime every compute call fails with a
// capability error; the checkpoint is still usable for planning.
class PretrainedAdapter final : public NoisePredictor {
public:
    PretrainedAdapter(std::string checkpoint, std::unique_ptr<AdapterRuntime> runtime);

    const std::string& checkpoint() const { return m_checkpoint; }
    bool has_runtime() const { return m_runtime != nullptr; }
    AdapterRuntime& runtime() const;

    std::string name() const override { return "adapter:" + m_checkpoint; }
    LatentShape latent_shape() const override { return runtime().latent_shape(); }
    int text_length() const override { return runtime().text_length(); }
    int vocab_size() const override { return runtime().vocab_size(); }
    const NoiseSchedule& schedule() const override { return runtime().schedule(); }
    std::vector<TapInfo> taps() const override { return runtime().attention_layers(); }

    Embedding encode_text(std::span<const TokenId> tokens) const override { return runtime().encode_text(tokens); }
    LatentGrid predict(const LatentGrid& z, int t, const Embedding& text, const HookContext& hooks = {}) const override;
    LatentGrid encode_image(const RgbImage& image) const override { return runtime().encode_image(image); }
    RgbImage decode_image(const LatentGrid& z) const override { return runtime().decode_image(z); }

private:
    std::string m_checkpoint;
    std::unique_ptr<AdapterRuntime> m_runtime;
};

using AdapterRuntimeFactory = std::function<std::unique_ptr<AdapterRuntime>(const std::string& checkpoint)>;

// Runtimes are looked up by the uri scheme ("scheme://...") or, failing that,
// by the full uri.
void register_adapter_runtime(const std::string& scheme, AdapterRuntimeFactory factory);
void clear_adapter_runtimes();

// "toy" or "adapter:<uri>".
std::unique_ptr<NoisePredictor> make_backend(std::string_view selection, const ToyModelSpec& toy_spec = {});

// Validates the configuration and emits the training plan; when dry_run is
// false the plan is handed to the adapter's runtime.
FinetunePlan finetune_adapter(const std::vector<std::filesystem::path>& reference_images,
                              const ConceptTrainerConfig& config, const NoisePredictor* backend, bool dry_run = true);

}  // namespace subjswap
