// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <variant>
#include <vector>

#include "subjswap/attention.hpp"

namespace subjswap {

// One hookable attention sublayer of a backend.
struct TapInfo {
    std::string layer_id;
    AttentionKind kind = AttentionKind::self_attention;
    int heads = 1;
    int query_height = 0;  // spatial grid of the query axis
    int query_width = 0;
    int key_count = 0;

    int query_count() const { return query_height * query_width; }
    bool operator==(const TapInfo&) const = default;
};

struct BankOptions {
    std::size_t memory_budget_bytes = std::numeric_limits<std::size_t>::max();
    std::filesystem::path spill_directory;  // required once the budget is exceeded
};

// Per-(step, branch, layer, head, kind) attention state of one trajectory.
// Single writer while capturing; immutable and safe for concurrent readers
// after finish_capture().
class AttentionBank {
public:
    AttentionBank() = default;
    explicit AttentionBank(BankOptions options);
    ~AttentionBank();

    AttentionBank(AttentionBank&&) noexcept;
    AttentionBank& operator=(AttentionBank&&) noexcept;

    void begin_capture(int total_steps, const SwapSchedule& schedule, std::vector<TapInfo> layout,
                       std::vector<Branch> branches);
    void insert(AttentionRecord record);
    void finish_capture();

    bool capturing() const { return m_capturing; }
    // Highest step whose records are expected.
    int window() const { return m_schedule.capture_window(); }
    int total_steps() const { return m_total_steps; }
    const SwapSchedule& schedule() const { return m_schedule; }
    const std::vector<TapInfo>& layout() const { return m_layout; }
    const std::vector<Branch>& branches() const { return m_branches; }

    bool contains(const RecordKey& key) const { return m_slots.count(key) != 0; }
    std::shared_ptr<const AttentionRecord> fetch(const RecordKey& key) const;
    std::vector<RecordKey> keys() const;
    std::size_t size() const { return m_slots.size(); }
    bool empty() const { return m_slots.empty(); }
    std::size_t spilled_count() const;
    std::size_t resident_bytes() const { return m_resident_bytes; }

    // Records per step for a complete bank.
    std::size_t records_per_step() const;

    // Throws bank_incomplete unless every (step <= steps, branch, tap, head)
    // record exists.
    void require_complete(int steps, const std::vector<Branch>& branches) const;
    bool complete() const;

    bool operator==(const AttentionBank& other) const;

private:
    struct Spilled {
        std::filesystem::path map_path;
        std::filesystem::path output_path;  // empty when absent
        Eigen::Index rows = 0;
        Eigen::Index cols = 0;
        Eigen::Index output_cols = 0;
    };
    using Slot = std::variant<std::shared_ptr<const AttentionRecord>, Spilled>;

    Slot spill(AttentionRecord record);

    BankOptions m_options;
    int m_total_steps = 0;
    SwapSchedule m_schedule{0, 0, 0};
    std::vector<TapInfo> m_layout;
    std::vector<Branch> m_branches;
    std::map<RecordKey, Slot> m_slots;
    std::size_t m_resident_bytes = 0;
    bool m_capturing = false;
    bool m_owns_spill = false;
};

// Stores a record into a bank that is capturing.
void capture(AttentionRecord record, AttentionBank& bank);

}  // namespace subjswap
