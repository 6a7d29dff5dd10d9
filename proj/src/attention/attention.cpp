// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include "subjswap/attention.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "subjswap/error.hpp"

namespace subjswap {

std::string_view to_string(AttentionKind kind) {
    return kind == AttentionKind::self_attention ? "self" : "cross";
}

AttentionKind attention_kind_from_string(std::string_view name) {
    if (name == "self")
        return AttentionKind::self_attention;
    if (name == "cross")
        return AttentionKind::cross_attention;
    fail(ErrorKind::validation, "unknown attention kind '" + std::string(name) + "'");
}

AttentionResult scaled_attention(const Matrix& q, const Matrix& k, const Matrix& v) {
    require(q.cols() == k.cols(), ErrorKind::shape,
            "query/key inner dimensions differ (" + std::to_string(q.cols()) + " vs " + std::to_string(k.cols()) + ")");
    require(k.rows() == v.rows(), ErrorKind::shape,
            "key/value row counts differ (" + std::to_string(k.rows()) + " vs " + std::to_string(v.rows()) + ")");
    require(k.rows() > 0 && q.cols() > 0, ErrorKind::shape, "attention needs at least one key and one feature");
    require(q.allFinite() && k.allFinite() && v.allFinite(), ErrorKind::numeric, "non-finite attention input");

    const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
    Matrix map = (q * k.transpose()) * scale;
    for (Eigen::Index r = 0; r < map.rows(); ++r) {
        auto row = map.row(r);
        const double peak = row.maxCoeff();
        row = (row.array() - peak).exp().matrix();
        row /= row.sum();
    }
    Matrix output = map * v;
    return {std::move(map), std::move(output)};
}

std::string RecordKey::to_string() const {
    std::ostringstream out;
    out << "step=" << step << " branch=" << static_cast<int>(branch) << " layer=" << layer_id << " head=" << head
        << " kind=" << subjswap::to_string(kind);
    return out.str();
}

bool is_row_stochastic(const Matrix& map, double tolerance) {
    if (!map.allFinite())
        return false;
    if ((map.array() < 0.0).any() || (map.array() > 1.0).any())
        return false;
    for (Eigen::Index r = 0; r < map.rows(); ++r)
        if (std::abs(map.row(r).sum() - 1.0) > tolerance)
            return false;
    return true;
}

void AttentionRecord::validate() const {
    require(key.step >= 1, ErrorKind::domain, "record step must be >= 1: " + key.to_string());
    require(is_row_stochastic(map), ErrorKind::numeric, "record map is not row-stochastic: " + key.to_string());
    if (key.kind == AttentionKind::self_attention) {
        require(map.rows() == map.cols(), ErrorKind::shape, "self-attention map must be square: " + key.to_string());
        if (output)
            require(output->rows() == map.rows(), ErrorKind::shape, "self-attention output rows differ from map rows");
    } else {
        require(!output, ErrorKind::contract, "cross-attention records carry no output: " + key.to_string());
    }
}

bool AttentionRecord::operator==(const AttentionRecord& other) const {
    auto same = [](const Matrix& a, const Matrix& b) {
        return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
    };
    if (!(key == other.key) || !same(map, other.map) || output.has_value() != other.output.has_value())
        return false;
    return !output || same(*output, *other.output);
}

int SwapSchedule::capture_window() const {
    return std::max({self_output_steps, self_map_steps, cross_map_steps});
}

void SwapSchedule::validate(int total_steps) const {
    for (int value : {self_output_steps, self_map_steps, cross_map_steps})
        require(value >= 0 && value <= total_steps, ErrorKind::validation,
                "swap schedule " + to_string() + " must lie within [0, " + std::to_string(total_steps) + "]");
}

bool SwapSchedule::clamp_to(int total_steps) {
    bool changed = false;
    for (int* value : {&self_output_steps, &self_map_steps, &cross_map_steps}) {
        if (*value > total_steps) {
            *value = total_steps;
            changed = true;
        }
    }
    return changed;
}

std::string SwapSchedule::to_string() const {
    return std::to_string(self_output_steps) + "," + std::to_string(self_map_steps) + "," +
           std::to_string(cross_map_steps);
}

SwapSchedule parse_schedule(std::string_view triple) {
    std::vector<int> values;
    std::string text(triple);
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        try {
            std::size_t used = 0;
            const int value = std::stoi(part, &used);
            require(used == part.size(), ErrorKind::validation, "bad schedule entry '" + part + "'");
            values.push_back(value);
        } catch (const std::logic_error&) {
            fail(ErrorKind::validation, "bad schedule entry '" + part + "'");
        }
    }
    require(values.size() == 3, ErrorKind::validation,
            "schedule must be a comma triple output,map,cross; got '" + text + "'");
    for (int v : values)
        require(v >= 0, ErrorKind::validation, "schedule values must be non-negative");
    return SwapSchedule{values[0], values[1], values[2]};
}

SwapFlags decide_swap(int step, const SwapSchedule& schedule, int total_steps) {
    require(step >= 1 && step <= total_steps, ErrorKind::domain,
            "step " + std::to_string(step) + " outside [1, " + std::to_string(total_steps) + "]");
    schedule.validate(total_steps);
    return SwapFlags{step <= schedule.self_output_steps, step <= schedule.self_map_steps,
                     step <= schedule.cross_map_steps};
}

Matrix apply_self_swap(const AttentionRecord& source, const Matrix& target_map, const Matrix& target_values,
                       const SwapFlags& flags) {
    require(source.key.kind == AttentionKind::self_attention, ErrorKind::contract,
            "self swap given a cross-attention record");
    if (flags.use_source_output) {
        require(source.output.has_value(), ErrorKind::bank_incomplete,
                "source self-attention output missing for " + source.key.to_string());
        require(source.output->rows() == target_map.rows() && source.output->cols() == target_values.cols(),
                ErrorKind::incompatible_resolution, "source output shape differs from target layer");
        return *source.output;
    }
    if (flags.use_source_map) {
        require(source.map.cols() == target_values.rows() && source.map.rows() == target_map.rows(),
                ErrorKind::incompatible_resolution,
                "source self-attention map " + std::to_string(source.map.rows()) + "x" +
                    std::to_string(source.map.cols()) + " does not fit target values with " +
                    std::to_string(target_values.rows()) + " rows");
        return source.map * target_values;
    }
    require(target_map.cols() == target_values.rows(), ErrorKind::shape, "target map/value shapes disagree");
    return target_map * target_values;
}

Matrix apply_cross_swap(const AttentionRecord& source, const Matrix& target_map, const Matrix& target_values,
                        const SwapFlags& flags) {
    require(source.key.kind == AttentionKind::cross_attention, ErrorKind::contract,
            "cross swap given a self-attention record");
    if (flags.use_source_cross) {
        require(source.map.cols() == target_values.rows(), ErrorKind::prompt_length,
                "source cross-attention map covers " + std::to_string(source.map.cols()) +
                    " text tokens, target prompt has " + std::to_string(target_values.rows()));
        require(source.map.rows() == target_map.rows(), ErrorKind::incompatible_resolution,
                "source cross-attention map query count differs from target layer");
        return source.map * target_values;
    }
    require(target_map.cols() == target_values.rows(), ErrorKind::shape, "target map/value shapes disagree");
    return target_map * target_values;
}

}  // namespace subjswap
