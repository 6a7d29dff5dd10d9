// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace subjswap {

enum class ErrorKind {
    shape,
    numeric,
    domain,
    bank_incomplete,
    incompatible_resolution,
    prompt_length,
    duplicate_capture,
    ordering,
    schedule,
    schedule_mismatch,
    contract,
    capability,
    diverged,
    span,
    length,
    corruption,
    format_version,
    vocabulary,
    empty_input,
    validation,
    config,
    io,
    architecture_mismatch,
    instrumentation,
};

// Process exit classes surfaced by the CLI.
enum class ErrorClass : int {
    config = 2,
    io = 3,
    contract = 4,
    numeric = 5,
};

std::string_view to_string(ErrorKind kind);
ErrorClass classify(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return m_kind; }

private:
    ErrorKind m_kind;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition)
        fail(kind, message);
}

}  // namespace subjswap
