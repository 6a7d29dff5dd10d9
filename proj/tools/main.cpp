// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <exception>
#include <string>

#include "commands.hpp"
#include "subjswap/error.hpp"

namespace {

std::string quoted(const std::string& text) {
    std::string out = "\"";
    for (char c : text) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += (c == '\n' || c == '\r') ? ' ' : c;
    }
    return out + "\"";
}

int report(const std::string& code, int exit_code, const std::string& reason) {
    std::fprintf(stderr, "error: code=%s exit=%d reason=%s\n", code.c_str(), exit_code, quoted(reason).c_str());
    return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Training-free subject swapping by attention injection in latent diffusion", "subjswap"};
    subjswap::cli::CommonOptions common;
    std::function<void()> run;
    subjswap::cli::register_commands(app, common, run);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        const int code = report("config", 2, e.what());
        std::fprintf(stderr, "%s\n", app.help().c_str());
        return code;
    }

    try {
        if (run)
            run();
        return 0;
    } catch (const subjswap::Error& e) {
        const auto cls = subjswap::classify(e.kind());
        return report(std::string(subjswap::to_string(e.kind())), static_cast<int>(cls), e.what());
    } catch (const std::exception& e) {
        return report("internal", 1, e.what());
    }
}
