// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include "subjswap/adapter.hpp"

#include <map>
#include <mutex>

#include "subjswap/error.hpp"

namespace subjswap {

namespace {

std::mutex& registry_mutex() {
    static std::mutex m;
    return m;
}

std::map<std::string, AdapterRuntimeFactory>& registry() {
    static std::map<std::string, AdapterRuntimeFactory> factories;
    return factories;
}

}  // namespace

void AdapterRuntime::finetune(const FinetunePlan&) {
    fail(ErrorKind::capability, "adapter runtime does not support fine-tuning");
}

PretrainedAdapter::PretrainedAdapter(std::string checkpoint, std::unique_ptr<AdapterRuntime> runtime)
    : m_checkpoint(std::move(checkpoint)), m_runtime(std::move(runtime)) {
    require(!m_checkpoint.empty(), ErrorKind::validation, "adapter checkpoint uri is empty");
}

AdapterRuntime& PretrainedAdapter::runtime() const {
    require(m_runtime != nullptr, ErrorKind::capability,
            "no adapter runtime is linked for checkpoint '" + m_checkpoint + "'");
    return *m_runtime;
}

LatentGrid PretrainedAdapter::predict(const LatentGrid& z, int t, const Embedding& text,
                                      const HookContext& hooks) const {
    auto& rt = runtime();
    std::size_t expected = 0;
    for (const auto& tap : rt.attention_layers())
        expected += static_cast<std::size_t>(tap.heads);

    std::size_t calls = 0;
    auto callback = [&](const std::string& layer_id, int head, AttentionKind kind, const Matrix& map,
                        const Matrix& values, Matrix& output) {
        ++calls;
        if (hooks.controller) {
            AttentionSite site{hooks.step, hooks.branch, layer_id, head, kind};
            output = hooks.controller->intercept(site, map, values, std::move(output));
        }
    };
    LatentGrid eps = rt.run_denoiser(z, t, text, callback);
    require(calls == expected, ErrorKind::instrumentation,
            "adapter runtime reported " + std::to_string(calls) + " attention calls, expected " +
                std::to_string(expected));
    return eps;
}

void register_adapter_runtime(const std::string& scheme, AdapterRuntimeFactory factory) {
    std::lock_guard lock(registry_mutex());
    registry()[scheme] = std::move(factory);
}

void clear_adapter_runtimes() {
    std::lock_guard lock(registry_mutex());
    registry().clear();
}

std::unique_ptr<NoisePredictor> make_backend(std::string_view selection, const ToyModelSpec& toy_spec) {
    if (selection == "toy")
        return std::make_unique<ToyModel>(toy_spec);
    constexpr std::string_view prefix = "adapter:";
    require(selection.substr(0, prefix.size()) == prefix, ErrorKind::config,
            "unknown backend '" + std::string(selection) + "' (expected toy or adapter:<uri>)");
    const std::string uri(selection.substr(prefix.size()));
    require(!uri.empty(), ErrorKind::config, "adapter backend needs a checkpoint uri");

    AdapterRuntimeFactory factory;
    {
        std::lock_guard lock(registry_mutex());
        const auto scheme_end = uri.find("://");
        const std::string scheme = scheme_end == std::string::npos ? uri : uri.substr(0, scheme_end);
        if (auto it = registry().find(scheme); it != registry().end())
            factory = it->second;
        else if (auto full = registry().find(uri); full != registry().end())
            factory = full->second;
    }
    return std::make_unique<PretrainedAdapter>(uri, factory ? factory(uri) : nullptr);
}

FinetunePlan finetune_adapter(const std::vector<std::filesystem::path>& reference_images,
                              const ConceptTrainerConfig& config, const NoisePredictor* backend, bool dry_run) {
    const auto* adapter = dynamic_cast<const PretrainedAdapter*>(backend);
    require(adapter != nullptr, ErrorKind::capability, "fine-tuning needs an attached pretrained adapter");
    require(config.mode == ConceptMode::finetune_adapter, ErrorKind::validation,
            "fine-tuning plan needs mode finetune_adapter");
    config.validate();
    require(!reference_images.empty(), ErrorKind::empty_input, "fine-tuning needs reference images");

    FinetunePlan plan;
    plan.checkpoint = adapter->checkpoint();
    plan.learning_rate = config.learning_rate;
    plan.steps = config.steps;
    plan.batch = config.batch;
    plan.prompt_template = config.prompt_template;
    for (const auto& path : reference_images)
        plan.reference_images.push_back(path.string());
    plan.dry_run = dry_run;

    if (!dry_run) {
        auto& rt = adapter->runtime();
        require(rt.supports_finetune(), ErrorKind::capability, "adapter runtime does not support fine-tuning");
        rt.finetune(plan);
    }
    return plan;
}

}  // namespace subjswap
