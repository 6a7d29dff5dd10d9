// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include "subjswap/hooks.hpp"

#include <algorithm>

#include "subjswap/error.hpp"

namespace subjswap {

bool LayerFilter::allows(const std::string& layer_id) const {
    return m_allowed.empty() || std::find(m_allowed.begin(), m_allowed.end(), layer_id) != m_allowed.end();
}

std::vector<TapInfo> LayerFilter::select(const std::vector<TapInfo>& taps) const {
    std::vector<TapInfo> out;
    for (const auto& tap : taps)
        if (allows(tap.layer_id))
            out.push_back(tap);
    for (const auto& name : m_allowed) {
        const bool known = std::any_of(taps.begin(), taps.end(), [&](const TapInfo& t) { return t.layer_id == name; });
        require(known, ErrorKind::validation, "layer allowlist names unknown layer '" + name + "'");
    }
    return out;
}

CaptureController::CaptureController(AttentionBank& bank, LayerFilter filter)
    : m_bank(bank), m_filter(std::move(filter)) {}

Matrix CaptureController::intercept(const AttentionSite& site, const Matrix& map, const Matrix&, Matrix output) {
    if (!m_filter.allows(site.layer_id))
        return output;
    ++m_calls[{site.step, site.branch}];
    if (site.step <= m_bank.window()) {
        AttentionRecord record{site.key(), map, std::nullopt};
        if (site.kind == AttentionKind::self_attention)
            record.output = output;
        capture(std::move(record), m_bank);
    }
    return output;
}

void CaptureController::verify_step(int step, Branch branch) const {
    std::size_t expected = 0;
    for (const auto& tap : m_bank.layout())
        expected += static_cast<std::size_t>(tap.heads);
    auto it = m_calls.find({step, branch});
    const std::size_t seen = it == m_calls.end() ? 0 : it->second;
    require(seen == expected, ErrorKind::instrumentation,
            "step " + std::to_string(step) + ": " + std::to_string(seen) + " attention hooks fired, expected " +
                std::to_string(expected));
}

SwapController::SwapController(const AttentionBank& source, SwapSchedule schedule, int total_steps,
                               std::vector<Branch> branches, LayerFilter filter, AttentionBank* effective)
    : m_source(source),
      m_schedule(schedule),
      m_total_steps(total_steps),
      m_branches(std::move(branches)),
      m_filter(std::move(filter)),
      m_effective(effective) {}

Matrix SwapController::intercept(const AttentionSite& site, const Matrix& map, const Matrix& values, Matrix output) {
    SwapFlags flags;
    const bool eligible = m_filter.allows(site.layer_id) &&
                          std::find(m_branches.begin(), m_branches.end(), site.branch) != m_branches.end();
    if (eligible)
        flags = decide_swap(site.step, m_schedule, m_total_steps);

    const bool self = site.kind == AttentionKind::self_attention;
    const bool touches = self ? (flags.use_source_output || flags.use_source_map) : flags.use_source_cross;
    std::shared_ptr<const AttentionRecord> source;
    if (touches) {
        source = m_source.fetch(site.key());
        output = self ? apply_self_swap(*source, map, values, flags) : apply_cross_swap(*source, map, values, flags);
    }

    if (m_effective && site.step <= m_effective->window() && m_filter.allows(site.layer_id)) {
        const bool source_map = self ? flags.use_source_map : flags.use_source_cross;
        if (source_map && !source)
            source = m_source.fetch(site.key());
        AttentionRecord record{site.key(), source_map ? source->map : map, std::nullopt};
        if (self)
            record.output = output;
        capture(std::move(record), *m_effective);
    }
    return output;
}

Matrix TapCollector::intercept(const AttentionSite& site, const Matrix& map, const Matrix&, Matrix output) {
    AttentionRecord record{site.key(), map, std::nullopt};
    if (site.kind == AttentionKind::self_attention)
        record.output = output;
    records.push_back(std::move(record));
    return output;
}

ReplayController::ReplayController(const std::vector<AttentionRecord>& records) {
    for (const auto& record : records)
        m_records.emplace(record.key, &record);
}

Matrix ReplayController::intercept(const AttentionSite& site, const Matrix& map, const Matrix& values, Matrix output) {
    auto it = m_records.find(site.key());
    require(it != m_records.end(), ErrorKind::bank_incomplete, "no replay record for " + site.key().to_string());
    const SwapFlags flags{true, true, true};
    if (site.kind == AttentionKind::self_attention)
        return apply_self_swap(*it->second, map, values, flags);
    return apply_cross_swap(*it->second, map, values, flags);
}

}  // namespace subjswap
