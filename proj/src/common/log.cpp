// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include "subjswap/log.hpp"

#include <iostream>
#include <mutex>

namespace subjswap {

namespace {

std::mutex& warning_mutex() {
    static std::mutex m;
    return m;
}

WarningHandler& warning_handler() {
    static WarningHandler handler = [](std::string_view message) { std::cerr << "warning: " << message << '\n'; };
    return handler;
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
    std::lock_guard lock(warning_mutex());
    std::swap(warning_handler(), handler);
    return handler;
}

void warn(std::string_view message) {
    std::lock_guard lock(warning_mutex());
    if (warning_handler())
        warning_handler()(message);
}

}  // namespace subjswap
