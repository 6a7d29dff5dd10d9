// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "subjswap/image.hpp"
#include "subjswap/pipeline.hpp"

namespace subjswap {

inline constexpr int kAnalysisGrid = 64;

// Bilinear resize (half-pixel centres, edge clamped) of the query axis: rows
// of `map` are laid out on a grid_h x grid_w grid and resampled onto
// out_h x out_w. Columns are untouched.
Matrix resize_query_axis(const Matrix& map, int grid_h, int grid_w, int out_h = kAnalysisGrid,
                         int out_w = kAnalysisGrid);

// Every record of `kind` on `branch`, resized to the 64x64 query grid and
// averaged over layers, heads and steps; rows renormalized to sum to 1.
Matrix average_attention(const AttentionBank& bank, AttentionKind kind, Branch branch = Branch::conditional);

// One averaged map per captured step, ordered by step.
std::vector<Matrix> per_step_maps(const AttentionBank& bank, AttentionKind kind = AttentionKind::self_attention,
                                  Branch branch = Branch::conditional);

struct SvdSummary {
    Vector singular_values;              // all of them, non-increasing
    std::vector<Matrix> components;      // top-k left singular vectors on the query grid, min-max normalized
    std::vector<double> explained_fraction;  // sigma_i^2 / sum sigma^2 for the top k
};

SvdSummary svd_components(const Matrix& map, int k, int grid_h = kAnalysisGrid, int grid_w = kAnalysisGrid);

// Best rank-k approximation (Eckart-Young).
Matrix rank_k_approximation(const Matrix& map, int k);

enum class SwapAxis { lambda_phi, lambda_M, lambda_A };

std::string to_string(SwapAxis axis);
SwapAxis swap_axis_from_string(const std::string& name);

struct AblationInputs {
    LatentGrid source_z_T;
    PromptSpec source_prompt;
    PromptSpec target_prompt;
};

struct AblationRow {
    int value = 0;
    double mse_to_source = 0.0;
    double mse_to_vanilla = 0.0;
    // Set only for endpoint rows.
    std::optional<std::string> endpoint;
    std::optional<bool> endpoint_passed;
};

struct AblationReport {
    SwapAxis axis = SwapAxis::lambda_M;
    SwapSchedule base{0, 0, 0};
    int total_steps = 0;
    std::vector<AblationRow> rows;
    std::vector<LatentGrid> outputs;  // final latent per row

    bool endpoints_passed() const;
    std::string table() const;
};

inline constexpr double kAblationEndpointTolerance = 1e-8;

// Runs swap_subject once per value with `axis` set to it and the other two
// axes taken from base.schedule. Values above T are clamped with a warning.
AblationReport ablation_sweep(SwapAxis axis, const std::vector<int>& values, const GenerationConfig& base,
                              const AblationInputs& inputs, const NoisePredictor& backend);

// Heat-map colouring of a matrix, min-max normalized; each cell becomes a
// scale x scale block.
RgbImage render_heatmap(const Matrix& values, int scale = 1);
void write_heatmap(const std::filesystem::path& path, const Matrix& values, int scale = 1);

// Static page laying out the given image files (relative paths) in rows.
std::string html_grid(const std::string& title, const std::vector<std::vector<std::string>>& rows,
                      const std::vector<std::string>& row_labels = {});

}  // namespace subjswap
