// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string_view>

namespace subjswap {

using WarningHandler = std::function<void(std::string_view)>;

// Default handler writes "warning: <message>" to stderr. Returns the previous handler.
WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace subjswap
