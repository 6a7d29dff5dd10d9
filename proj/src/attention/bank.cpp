// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include "subjswap/bank.hpp"

#include <algorithm>
#include <fstream>

#include "subjswap/error.hpp"
#include "subjswap/store.hpp"

namespace fs = std::filesystem;

namespace subjswap {

namespace {

std::size_t record_bytes(const AttentionRecord& record) {
    std::size_t n = static_cast<std::size_t>(record.map.size());
    if (record.output)
        n += static_cast<std::size_t>(record.output->size());
    return n * sizeof(double);
}

void write_raw(const fs::path& path, const Matrix& m) {
    const auto bytes = encode_blob(std::span<const double>(m.data(), static_cast<std::size_t>(m.size())), Dtype::float64);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::io, "cannot spill to " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), ErrorKind::io, "spill write failed for " + path.string());
}

Matrix read_raw(const fs::path& path, Eigen::Index rows, Eigen::Index cols) {
    const auto bytes = read_file(path);
    const auto values = decode_blob(bytes, Dtype::float64);
    require(values.size() == static_cast<std::size_t>(rows * cols), ErrorKind::corruption,
            "spilled record " + path.string() + " has the wrong size");
    Matrix m(rows, cols);
    std::copy(values.begin(), values.end(), m.data());
    return m;
}

}  // namespace

AttentionBank::AttentionBank(BankOptions options) : m_options(std::move(options)) {}

AttentionBank::~AttentionBank() {
    if (m_owns_spill && !m_options.spill_directory.empty()) {
        std::error_code ec;
        fs::remove_all(m_options.spill_directory, ec);
    }
}

AttentionBank::AttentionBank(AttentionBank&& other) noexcept
    : m_options(std::move(other.m_options)),
      m_total_steps(other.m_total_steps),
      m_schedule(other.m_schedule),
      m_layout(std::move(other.m_layout)),
      m_branches(std::move(other.m_branches)),
      m_slots(std::move(other.m_slots)),
      m_resident_bytes(other.m_resident_bytes),
      m_capturing(other.m_capturing),
      m_owns_spill(other.m_owns_spill) {
    other.m_owns_spill = false;
}

AttentionBank& AttentionBank::operator=(AttentionBank&& other) noexcept {
    if (this != &other) {
        // other takes over (and eventually cleans up) our previous spill files
        std::swap(m_options, other.m_options);
        std::swap(m_total_steps, other.m_total_steps);
        std::swap(m_schedule, other.m_schedule);
        std::swap(m_layout, other.m_layout);
        std::swap(m_branches, other.m_branches);
        std::swap(m_slots, other.m_slots);
        std::swap(m_resident_bytes, other.m_resident_bytes);
        std::swap(m_capturing, other.m_capturing);
        std::swap(m_owns_spill, other.m_owns_spill);
    }
    return *this;
}

void AttentionBank::begin_capture(int total_steps, const SwapSchedule& schedule, std::vector<TapInfo> layout,
                                  std::vector<Branch> branches) {
    require(m_slots.empty() && !m_capturing, ErrorKind::contract, "bank already holds a capture");
    require(total_steps >= 1, ErrorKind::validation, "bank needs at least one step");
    schedule.validate(total_steps);
    require(!layout.empty(), ErrorKind::instrumentation, "no attention layers to capture");
    require(!branches.empty(), ErrorKind::validation, "no branches to capture");
    std::sort(branches.begin(), branches.end());
    branches.erase(std::unique(branches.begin(), branches.end()), branches.end());
    m_total_steps = total_steps;
    m_schedule = schedule;
    m_layout = std::move(layout);
    m_branches = std::move(branches);
    m_capturing = true;
}

AttentionBank::Slot AttentionBank::spill(AttentionRecord record) {
    require(!m_options.spill_directory.empty(), ErrorKind::capability,
            "bank memory budget exceeded and no spill directory configured");
    if (!m_owns_spill) {
        fs::create_directories(m_options.spill_directory);
        m_owns_spill = true;
    }
    const auto& key = record.key;
    const std::string stem = "s" + std::to_string(key.step) + "_b" + std::to_string(static_cast<int>(key.branch)) +
                             "_" + key.layer_id + "_" + std::to_string(key.head) + "_" +
                             std::string(to_string(key.kind));
    Spilled spilled;
    spilled.map_path = m_options.spill_directory / (stem + "_map.bin");
    spilled.rows = record.map.rows();
    spilled.cols = record.map.cols();
    write_raw(spilled.map_path, record.map);
    if (record.output) {
        spilled.output_path = m_options.spill_directory / (stem + "_output.bin");
        spilled.output_cols = record.output->cols();
        write_raw(spilled.output_path, *record.output);
    }
    return spilled;
}

void AttentionBank::insert(AttentionRecord record) {
    require(m_capturing, ErrorKind::contract, "bank is not in capture mode");
    require(record.key.step >= 1 && record.key.step <= window(), ErrorKind::contract,
            "step " + std::to_string(record.key.step) + " outside the capture window of " + std::to_string(window()));
    require(!m_slots.count(record.key), ErrorKind::duplicate_capture, "duplicate capture of " + record.key.to_string());
    record.validate();
    const std::size_t bytes = record_bytes(record);
    RecordKey key = record.key;
    if (m_resident_bytes + bytes > m_options.memory_budget_bytes) {
        m_slots.emplace(std::move(key), spill(std::move(record)));
    } else {
        m_resident_bytes += bytes;
        m_slots.emplace(std::move(key), std::make_shared<const AttentionRecord>(std::move(record)));
    }
}

void AttentionBank::finish_capture() { m_capturing = false; }

std::shared_ptr<const AttentionRecord> AttentionBank::fetch(const RecordKey& key) const {
    auto it = m_slots.find(key);
    require(it != m_slots.end(), ErrorKind::bank_incomplete, "bank has no record for " + key.to_string());
    if (const auto* resident = std::get_if<std::shared_ptr<const AttentionRecord>>(&it->second))
        return *resident;
    const auto& spilled = std::get<Spilled>(it->second);
    auto record = std::make_shared<AttentionRecord>();
    record->key = key;
    record->map = read_raw(spilled.map_path, spilled.rows, spilled.cols);
    if (!spilled.output_path.empty())
        record->output = read_raw(spilled.output_path, spilled.rows, spilled.output_cols);
    return record;
}

std::vector<RecordKey> AttentionBank::keys() const {
    std::vector<RecordKey> out;
    out.reserve(m_slots.size());
    for (const auto& [key, _] : m_slots)
        out.push_back(key);
    return out;
}

std::size_t AttentionBank::spilled_count() const {
    return static_cast<std::size_t>(std::count_if(m_slots.begin(), m_slots.end(), [](const auto& entry) {
        return std::holds_alternative<Spilled>(entry.second);
    }));
}

std::size_t AttentionBank::records_per_step() const {
    std::size_t per_branch = 0;
    for (const auto& tap : m_layout)
        per_branch += static_cast<std::size_t>(tap.heads);
    return per_branch * m_branches.size();
}

void AttentionBank::require_complete(int steps, const std::vector<Branch>& branches) const {
    require(steps <= window(), ErrorKind::bank_incomplete,
            "bank covers steps 1.." + std::to_string(window()) + " but " + std::to_string(steps) + " are required");
    for (int step = 1; step <= steps; ++step)
        for (Branch branch : branches)
            for (const auto& tap : m_layout)
                for (int head = 0; head < tap.heads; ++head) {
                    RecordKey key{step, branch, tap.layer_id, head, tap.kind};
                    require(m_slots.count(key) != 0, ErrorKind::bank_incomplete,
                            "bank has no record for " + key.to_string());
                }
}

bool AttentionBank::complete() const {
    try {
        require_complete(window(), m_branches);
        return true;
    } catch (const Error&) {
        return false;
    }
}

bool AttentionBank::operator==(const AttentionBank& other) const {
    if (m_total_steps != other.m_total_steps || !(m_schedule == other.m_schedule) || m_layout != other.m_layout ||
        m_branches != other.m_branches || m_slots.size() != other.m_slots.size())
        return false;
    for (const auto& [key, _] : m_slots) {
        if (!other.contains(key))
            return false;
        if (!(*fetch(key) == *other.fetch(key)))
            return false;
    }
    return true;
}

void capture(AttentionRecord record, AttentionBank& bank) { bank.insert(std::move(record)); }

}  // namespace subjswap
