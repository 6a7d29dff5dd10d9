// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <string>

#include "subjswap/pipeline.hpp"
#include "subjswap/toy_model.hpp"

namespace fixture {

inline subjswap::ToyModel toy(int steps = 50, std::uint64_t seed = 0) {
    subjswap::ToyModelSpec spec;
    spec.timesteps = steps;
    spec.seed = seed;
    return subjswap::ToyModel(spec);
}

// Schedule values above `steps` are clamped without a warning.
inline subjswap::GenerationConfig config(int steps = 50, subjswap::SwapSchedule schedule = {10, 25, 20},
                                         double guidance = 7.5) {
    subjswap::GenerationConfig cfg;
    cfg.steps = steps;
    cfg.guidance = guidance;
    cfg.schedule = schedule;
    cfg.schedule.clamp_to(steps);
    return cfg;
}

inline subjswap::PromptSpec prompt(const std::string& text, const std::string& subject) {
    return subjswap::Tokenizer().prompt(text, subject);
}

// Copy of a finished bank with `edit` applied to every record.
inline subjswap::AttentionBank copy_bank(const subjswap::AttentionBank& bank,
                                         const std::function<void(subjswap::AttentionRecord&)>& edit = {}) {
    subjswap::AttentionBank out;
    out.begin_capture(bank.total_steps(), bank.schedule(), bank.layout(), bank.branches());
    for (const auto& key : bank.keys()) {
        subjswap::AttentionRecord record = *bank.fetch(key);
        if (edit)
            edit(record);
        out.insert(std::move(record));
    }
    out.finish_capture();
    return out;
}

// Fresh directory under the build tree, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& name) {
        static std::atomic<int> counter{0};
        m_path = std::filesystem::path(SUBJSWAP_TEST_TMP) / (name + "-" + std::to_string(counter++));
        std::filesystem::remove_all(m_path);
        std::filesystem::create_directories(m_path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(m_path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return m_path; }
    std::filesystem::path operator/(const std::string& name) const { return m_path / name; }

private:
    std::filesystem::path m_path;
};

}  // namespace fixture
