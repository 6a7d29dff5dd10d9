// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <sstream>

#include "subjswap/analysis.hpp"
#include "subjswap/error.hpp"
#include "subjswap/log.hpp"

namespace subjswap {

namespace {

int& axis_value(SwapSchedule& schedule, SwapAxis axis) {
    switch (axis) {
    case SwapAxis::lambda_phi: return schedule.self_output_steps;
    case SwapAxis::lambda_M: return schedule.self_map_steps;
    case SwapAxis::lambda_A: return schedule.cross_map_steps;
    }
    fail(ErrorKind::domain, "unknown swap axis");
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

}  // namespace

std::string to_string(SwapAxis axis) {
    switch (axis) {
    case SwapAxis::lambda_phi: return "lambda_phi";
    case SwapAxis::lambda_M: return "lambda_M";
    case SwapAxis::lambda_A: return "lambda_A";
    }
    return "?";
}

SwapAxis swap_axis_from_string(const std::string& name) {
    if (name == "lambda_phi") return SwapAxis::lambda_phi;
    if (name == "lambda_M") return SwapAxis::lambda_M;
    if (name == "lambda_A") return SwapAxis::lambda_A;
    fail(ErrorKind::validation, "unknown axis '" + name + "' (expected lambda_phi, lambda_M or lambda_A)");
}

bool AblationReport::endpoints_passed() const {
    for (const auto& row : rows)
        if (row.endpoint_passed && !*row.endpoint_passed)
            return false;
    return true;
}

std::string AblationReport::table() const {
    std::ostringstream out;
    out << "axis " << to_string(axis) << " steps " << total_steps << " base " << base.to_string() << "\n";
    out << "value\tmse_to_source\tmse_to_vanilla\tendpoint\n";
    for (const auto& row : rows) {
        out << row.value << "\t" << format_double(row.mse_to_source) << "\t" << format_double(row.mse_to_vanilla)
            << "\t";
        if (row.endpoint)
            out << *row.endpoint << (*row.endpoint_passed ? " pass" : " FAIL");
        else
            out << "-";
        out << "\n";
    }
    return out.str();
}

AblationReport ablation_sweep(SwapAxis axis, const std::vector<int>& values, const GenerationConfig& base,
                              const AblationInputs& inputs, const NoisePredictor& backend) {
    const GenerationConfig cfg = base.normalized();
    AblationReport report;
    report.axis = axis;
    report.base = cfg.schedule;
    report.total_steps = cfg.steps;
    if (values.empty())
        return report;

    std::vector<int> clamped;
    for (int v : values) {
        require(v >= 0, ErrorKind::validation, "sweep values must be non-negative");
        if (v > cfg.steps) {
            warn("sweep value " + std::to_string(v) + " exceeds " + std::to_string(cfg.steps) +
                 " steps; clamped");
            v = cfg.steps;
        }
        clamped.push_back(v);
    }

    GenerationConfig capture_cfg = cfg;
    capture_cfg.schedule = SwapSchedule{cfg.steps, cfg.steps, cfg.steps};
    const CaptureResult source = generate_with_capture(inputs.source_z_T, inputs.source_prompt, capture_cfg, backend);
    const LatentGrid vanilla = generate(inputs.source_z_T, inputs.target_prompt, cfg, backend).final();
    const LatentGrid& source_final = source.trajectory.final();
    const bool same_prompt = inputs.source_prompt.tokens == inputs.target_prompt.tokens;

    for (int v : clamped) {
        GenerationConfig run = cfg;
        axis_value(run.schedule, axis) = v;
        const LatentGrid out = swap_subject(inputs.source_z_T, source.bank, inputs.target_prompt, run, backend).final();
        AblationRow row;
        row.value = v;
        row.mse_to_source = mean_squared_error(out, source_final);
        row.mse_to_vanilla = mean_squared_error(out, vanilla);
        SwapSchedule others = run.schedule;
        axis_value(others, axis) = 0;
        if (v == cfg.steps && same_prompt) {
            row.endpoint = "full-swap";
            row.endpoint_passed = row.mse_to_source < kAblationEndpointTolerance;
        } else if (v == 0 && others.capture_window() == 0) {
            row.endpoint = "no-swap";
            row.endpoint_passed = row.mse_to_vanilla < kAblationEndpointTolerance;
        }
        report.rows.push_back(std::move(row));
        report.outputs.push_back(out);
    }
    return report;
}

}  // namespace subjswap
