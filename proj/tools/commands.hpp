// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace subjswap::cli {

struct CommonOptions {
    int steps = 50;
    double guidance = 7.5;
    std::uint64_t seed = 0;
    std::string schedule = "10,25,20";
    std::string backend = "toy";
    std::string out = "out";
    std::vector<std::string> layers;
    bool swap_unconditional = true;
    std::size_t bank_budget = 0;
    std::uint64_t model_seed = 0;
};

// Adds every subcommand to `app`; the selected one stores its action in `run`.
void register_commands(CLI::App& app, CommonOptions& common, std::function<void()>& run);

}  // namespace subjswap::cli
