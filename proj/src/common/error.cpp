// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include "subjswap/error.hpp"

namespace subjswap {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::shape: return "shape";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::domain: return "domain";
    case ErrorKind::bank_incomplete: return "bank_incomplete";
    case ErrorKind::incompatible_resolution: return "incompatible_resolution";
    case ErrorKind::prompt_length: return "prompt_length";
    case ErrorKind::duplicate_capture: return "duplicate_capture";
    case ErrorKind::ordering: return "ordering";
    case ErrorKind::schedule: return "schedule";
    case ErrorKind::schedule_mismatch: return "schedule_mismatch";
    case ErrorKind::contract: return "contract";
    case ErrorKind::capability: return "capability";
    case ErrorKind::diverged: return "optimization_diverged";
    case ErrorKind::span: return "span";
    case ErrorKind::length: return "length";
    case ErrorKind::corruption: return "corruption";
    case ErrorKind::format_version: return "format_version";
    case ErrorKind::vocabulary: return "vocabulary";
    case ErrorKind::empty_input: return "empty_input";
    case ErrorKind::validation: return "validation";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    case ErrorKind::architecture_mismatch: return "architecture_mismatch";
    case ErrorKind::instrumentation: return "instrumentation";
    }
    return "unknown";
}

ErrorClass classify(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::validation:
    case ErrorKind::config:
    case ErrorKind::span:
    case ErrorKind::length:
    case ErrorKind::vocabulary:
        return ErrorClass::config;
    case ErrorKind::io:
    case ErrorKind::corruption:
    case ErrorKind::format_version:
        return ErrorClass::io;
    case ErrorKind::numeric:
    case ErrorKind::diverged:
    case ErrorKind::schedule:
        return ErrorClass::numeric;
    default:
        return ErrorClass::contract;
    }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), m_kind(kind) {}

void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace subjswap
