// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "subjswap/bank.hpp"
#include "subjswap/sampling.hpp"

namespace subjswap {

// Attention banks are stored as float64 so that a reload is bit-identical.
void save_bank(const AttentionBank& bank, const std::filesystem::path& directory);
// Fails closed: corruption for missing, malformed or mis-shaped records.
AttentionBank load_bank(const std::filesystem::path& directory, BankOptions options = {});

void save_latent(const LatentGrid& latent, const std::filesystem::path& directory,
                 const nlohmann::json& metadata = nlohmann::json::object());
LatentGrid load_latent(const std::filesystem::path& directory, nlohmann::json* metadata = nullptr);

void save_trajectory(const Trajectory& trajectory, const std::filesystem::path& directory);
Trajectory load_trajectory(const std::filesystem::path& directory);

void save_null_bank(const NullTextBank& bank, const std::filesystem::path& directory);
NullTextBank load_null_bank(const std::filesystem::path& directory);

struct ConceptEmbedding {
    std::string word;
    TokenId token = 0;
    Vector embedding;
};

void save_concept(const ConceptEmbedding& concept_embedding, const std::filesystem::path& directory);
ConceptEmbedding load_concept(const std::filesystem::path& directory);

}  // namespace subjswap
