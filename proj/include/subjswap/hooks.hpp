// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "subjswap/bank.hpp"

namespace subjswap {

struct AttentionSite {
    int step = 0;
    Branch branch = Branch::conditional;
    const std::string& layer_id;
    int head = 0;
    AttentionKind kind = AttentionKind::self_attention;

    RecordKey key() const { return RecordKey{step, branch, layer_id, head, kind}; }
};

// Called by a backend at every attention sublayer and head, after the
// layer's own map and output have been computed. The returned matrix
// replaces the output.
class AttentionController {
public:
    virtual ~AttentionController() = default;
    virtual Matrix intercept(const AttentionSite& site, const Matrix& map, const Matrix& values, Matrix output) = 0;
};

// Layer allowlist; empty means every layer.
class LayerFilter {
public:
    LayerFilter() = default;
    explicit LayerFilter(std::vector<std::string> allowed) : m_allowed(std::move(allowed)) {}

    bool allows(const std::string& layer_id) const;
    std::vector<TapInfo> select(const std::vector<TapInfo>& taps) const;
    const std::vector<std::string>& allowed() const { return m_allowed; }

private:
    std::vector<std::string> m_allowed;
};

// Observes without changing outputs; records steps inside the bank's window.
class CaptureController final : public AttentionController {
public:
    CaptureController(AttentionBank& bank, LayerFilter filter = {});

    Matrix intercept(const AttentionSite& site, const Matrix& map, const Matrix& values, Matrix output) override;

    // Throws instrumentation if some hooked layer never reported for step.
    void verify_step(int step, Branch branch) const;

private:
    AttentionBank& m_bank;
    LayerFilter m_filter;
    std::map<std::pair<int, Branch>, std::size_t> m_calls;
};

// Injects source state under the step-gated schedule. Optionally records the
// effective (post-swap) maps and outputs into a second bank.
class SwapController final : public AttentionController {
public:
    SwapController(const AttentionBank& source, SwapSchedule schedule, int total_steps, std::vector<Branch> branches,
                   LayerFilter filter = {}, AttentionBank* effective = nullptr);

    Matrix intercept(const AttentionSite& site, const Matrix& map, const Matrix& values, Matrix output) override;

private:
    const AttentionBank& m_source;
    SwapSchedule m_schedule;
    int m_total_steps;
    std::vector<Branch> m_branches;
    LayerFilter m_filter;
    AttentionBank* m_effective;
};

// Collects every tap of a single prediction, in call order.
class TapCollector final : public AttentionController {
public:
    Matrix intercept(const AttentionSite& site, const Matrix& map, const Matrix& values, Matrix output) override;

    std::vector<AttentionRecord> records;
};

// Replays a fixed set of records as self/cross swaps with every flag set
// (source output for self layers, source map for cross layers).
class ReplayController final : public AttentionController {
public:
    explicit ReplayController(const std::vector<AttentionRecord>& records);

    Matrix intercept(const AttentionSite& site, const Matrix& map, const Matrix& values, Matrix output) override;

private:
    std::map<RecordKey, const AttentionRecord*> m_records;
};

}  // namespace subjswap
