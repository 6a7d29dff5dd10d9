// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

#include "subjswap/latent.hpp"

namespace subjswap {

enum class AttentionKind { self_attention, cross_attention };

// CFG branch a network evaluation belongs to.
enum class Branch { conditional = 0, unconditional = 1 };

std::string_view to_string(AttentionKind kind);
AttentionKind attention_kind_from_string(std::string_view name);

struct AttentionResult {
    Matrix map;     // row-stochastic, n_query x n_key
    Matrix output;  // map * v
};

// softmax(q k^T / sqrt(d)) row-wise, then map * v.
AttentionResult scaled_attention(const Matrix& q, const Matrix& k, const Matrix& v);

struct RecordKey {
    int step = 0;  // denoising steps executed so far, 1 at t = T
    Branch branch = Branch::conditional;
    std::string layer_id;
    int head = 0;
    AttentionKind kind = AttentionKind::self_attention;

    auto operator<=>(const RecordKey&) const = default;
    bool operator==(const RecordKey&) const = default;

    std::string to_string() const;
};

struct AttentionRecord {
    RecordKey key;
    Matrix map;
    std::optional<Matrix> output;  // self-attention only

    // Row sums within 1e-5, entries in [0, 1], self maps square, cross maps
    // without an output.
    void validate() const;

    bool operator==(const AttentionRecord& other) const;
};

bool is_row_stochastic(const Matrix& map, double tolerance = 1e-5);

// Step-count thresholds: source state is injected while the number of
// denoising steps executed so far is <= the threshold.
struct SwapSchedule {
    int self_output_steps = 10;
    int self_map_steps = 25;
    int cross_map_steps = 20;

    int capture_window() const;
    void validate(int total_steps) const;
    // Values above total_steps are clamped; returns true if anything changed.
    bool clamp_to(int total_steps);

    bool operator==(const SwapSchedule&) const = default;
    std::string to_string() const;
};

SwapSchedule parse_schedule(std::string_view triple);

struct SwapFlags {
    bool use_source_output = false;
    bool use_source_map = false;
    bool use_source_cross = false;

    bool any() const { return use_source_output || use_source_map || use_source_cross; }
    bool operator==(const SwapFlags&) const = default;
};

SwapFlags decide_swap(int step, const SwapSchedule& schedule, int total_steps);

// Source output wins over a source map when both flags are set.
Matrix apply_self_swap(const AttentionRecord& source, const Matrix& target_map, const Matrix& target_values,
                       const SwapFlags& flags);

// target_values are the projections of the target prompt; the source
// cross-attention output is never used.
Matrix apply_cross_swap(const AttentionRecord& source, const Matrix& target_map, const Matrix& target_values,
                        const SwapFlags& flags);

}  // namespace subjswap
