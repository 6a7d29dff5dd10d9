// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "oracles/oracles.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "subjswap/analysis.hpp"
#include "subjswap/concept.hpp"
#include "subjswap/error.hpp"
#include "subjswap/gradient_check.hpp"
#include "subjswap/persistence.hpp"
#include "subjswap/rng.hpp"

using namespace subjswap;

namespace {

// Pinned tolerances.
constexpr double kFullSwapTolerance = 1e-5;
constexpr double kRowSumTolerance = 1e-5;
constexpr double kRoundTripTolerance = 1e-2;
// Measured 7.703e-3 for the configuration below; regression bound.
constexpr double kRoundTripRegressionBound = 8.0e-3;
constexpr double kGradientTolerance = 1e-3;
constexpr int kConceptSteps = 200;
constexpr double kEndpointTolerance = 1e-8;
constexpr double kEnergyTolerance = 1e-6;
constexpr double kProtocolTolerance = 1e-6;
constexpr int kSteps = 50;

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c);
    return buf;
}

struct Scene {
    ToyModel toy = fixture::toy(kSteps);
    LatentGrid z_T = gaussian_latent(toy.latent_shape(), 1);
    PromptSpec source = fixture::prompt("a white cat on grass", "white cat");
    PromptSpec target = fixture::prompt("a brown dog on grass", "brown dog");
};

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome shipped_defaults() {
    const GenerationConfig cfg;
    const bool library = cfg.steps == 50 && cfg.guidance == 7.5 && cfg.schedule == SwapSchedule{10, 25, 20};
    fixture::TempDir tmp("acc-defaults");
    const std::string cmd = std::string("\"") + SUBJSWAP_CLI_PATH + "\" --out \"" + (tmp / "run").string() +
                            "\" gen --prompt \"a cat\" >\"" + (tmp / "log").string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    bool cli = false;
    std::string cli_detail = "cli run failed";
    if (WIFEXITED(status) && WEXITSTATUS(status) == 0) {
        const auto run = nlohmann::json::parse(slurp(tmp / "run" / "run.json"));
        cli = run.at("steps") == 50 && run.at("guidance") == 7.5 && run.at("schedule") == "10,25,20";
        cli_detail = "cli T=" + run.at("steps").dump() + " w=" + run.at("guidance").dump() + " lambda=" +
                     run.at("schedule").get<std::string>();
    }
    return {library && cli, "library T=" + std::to_string(cfg.steps) + " w=" + fmt("%g", cfg.guidance) +
                                " lambda=" + cfg.schedule.to_string() + "; " + cli_detail};
}

Outcome zero_schedule_identity() {
    Scene s;
    const auto cap = generate_with_capture(s.z_T, s.source, fixture::config(kSteps), s.toy);
    const auto swapped = swap_subject(s.z_T, cap.bank, s.target, fixture::config(kSteps, {0, 0, 0}), s.toy);
    const auto vanilla = generate(s.z_T, s.target, fixture::config(kSteps), s.toy);
    double worst = 0.0;
    for (int t = 0; t <= kSteps; ++t)
        worst = std::max(worst, mean_squared_error(swapped.at(t), vanilla.at(t)));
    return {swapped == vanilla, fmt("bit-identical over %g latents, max mse %.3e", kSteps + 1, worst)};
}

Outcome full_swap_reconstruction() {
    Scene s;
    const auto cfg = fixture::config(kSteps, {kSteps, kSteps, kSteps});
    const auto cap = generate_with_capture(s.z_T, s.source, cfg, s.toy);
    const auto swapped = swap_subject(s.z_T, cap.bank, s.source, cfg, s.toy);
    double worst = 0.0;
    for (int t = 0; t < kSteps; ++t)
        worst = std::max(worst, relative_error(swapped.at(t), cap.trajectory.at(t)));
    return {worst <= kFullSwapTolerance, fmt("max relative latent error %.3e (tolerance %.0e)", worst, kFullSwapTolerance)};
}

Outcome phi_precedence() {
    Scene s;
    const auto cfg = fixture::config(kSteps);
    const int phi = cfg.schedule.self_output_steps;
    const auto cap = generate_with_capture(s.z_T, s.source, cfg, s.toy);
    int perturbed_records = 0;
    const auto perturbed = fixture::copy_bank(cap.bank, [&](AttentionRecord& r) {
        if (r.key.kind != AttentionKind::self_attention || r.key.step > phi)
            return;
        r.map = Matrix::Constant(r.map.rows(), r.map.cols(), 1.0 / static_cast<double>(r.map.cols()));
        ++perturbed_records;
    });
    const bool unchanged = swap_subject(s.z_T, perturbed, s.target, cfg, s.toy) == swap_subject(s.z_T, cap.bank, s.target, cfg, s.toy);
    // Without the output swap the same perturbation must be visible.
    const auto no_phi = fixture::config(kSteps, {0, cfg.schedule.self_map_steps, cfg.schedule.cross_map_steps});
    const bool visible = swap_subject(s.z_T, perturbed, s.target, no_phi, s.toy) != swap_subject(s.z_T, cap.bank, s.target, no_phi, s.toy);
    return {unchanged && visible,
            fmt("%g self-map records perturbed at steps <= %g; outputs identical: ", perturbed_records, phi) +
                (unchanged ? "yes" : "no") + "; perturbation visible with lambda_phi=0: " + (visible ? "yes" : "no")};
}

Outcome row_stochasticity() {
    Scene s;
    const auto cfg = fixture::config(kSteps);
    const auto cap = generate_with_capture(s.z_T, s.source, cfg, s.toy);
    AttentionBank effective;
    swap_subject(s.z_T, cap.bank, s.target, cfg, s.toy, nullptr, &effective);
    std::size_t total = 0, good = 0;
    double worst = 0.0;
    for (const AttentionBank* bank : {&cap.bank, static_cast<const AttentionBank*>(&effective)})
        for (const auto& key : bank->keys()) {
            const Matrix& map = bank->fetch(key)->map;
            ++total;
            good += is_row_stochastic(map, kRowSumTolerance);
            worst = std::max(worst, (map.rowwise().sum().array() - 1.0).abs().maxCoeff());
        }
    return {total > 0 && good == total,
            fmt("%g of %g captured maps row-stochastic, max |row sum - 1| = %.3e", double(good), double(total), worst)};
}

Outcome ddim_round_trip() {
    const auto toy = fixture::toy(kSteps);
    const LatentGrid z0 = procedural_latent(toy.latent_shape(), 3);
    const Embedding cond = toy.encode_text(fixture::prompt("a photo of a cat", "cat").tokens);
    const auto inv = ddim_invert(z0, cond, toy, toy.schedule());
    const auto rec = reconstruct(inv.final(), cond, NullTextBank::constant(null_text_embedding(toy), kSteps), toy,
                                 toy.schedule(), 1.0);
    const double final_err = relative_error(rec.final(), z0);
    const double traj_err = trajectory_relative_error(rec, Trajectory{TrajectoryDirection::sampling, inv.by_time});
    return {final_err <= kRoundTripTolerance && final_err <= kRoundTripRegressionBound,
            fmt("relative error |z0' - z0|/|z0| = %.4e (tolerance %.0e, regression bound %.1e)", final_err,
                kRoundTripTolerance, kRoundTripRegressionBound) +
                fmt("; trajectory %.4e", traj_err)};
}

Outcome null_text() {
    const auto toy = fixture::toy(kSteps);
    const LatentGrid z0 = procedural_latent(toy.latent_shape(), 3);
    const Embedding cond = toy.encode_text(fixture::prompt("a photo of a cat", "cat").tokens);
    const Embedding null0 = null_text_embedding(toy);
    const auto inv = ddim_invert(z0, cond, toy, toy.schedule());
    const Trajectory reference{TrajectoryDirection::sampling, inv.by_time};

    NullTextOptions baseline_opt;
    baseline_opt.iterations = 0;
    const auto baseline = optimize_null_text(inv, cond, null0, toy, toy.schedule(), baseline_opt);
    const auto optimized = optimize_null_text(inv, cond, null0, toy, toy.schedule());
    const double e0 = trajectory_relative_error(baseline.reconstruction, reference);
    const double e1 = trajectory_relative_error(optimized.reconstruction, reference);
    bool monotone = optimized.loss_history.size() == kSteps;
    for (const auto& losses : optimized.loss_history)
        for (std::size_t i = 1; i < losses.size(); ++i)
            monotone = monotone && losses[i] <= losses[i - 1];
    return {e1 < e0 && monotone, fmt("w=7.5 trajectory error optimized %.4e vs iters=0 %.4e", e1, e0) +
                                     "; per-step losses non-increasing: " + (monotone ? "yes" : "no")};
}

Outcome gradient_contract() {
    const auto toy = fixture::toy(kSteps);
    const auto spec = fixture::prompt("a photo of a cat", "cat");
    double worst = 0.0;
    bool passed = true;
    int probes = 0;
    gen::for_all(71, 6, [&](Rng& rng, int trial) {
        GradientProbe probe;
        probe.latent = gen::latent(rng, toy.latent_shape());
        probe.upstream = gen::latent(rng, toy.latent_shape());
        probe.t = rng.uniform_int(1, kSteps);
        probe.text = toy.encode_text(spec.tokens);
        if (trial % 2) {
            probe.tokens = spec.tokens;
            probe.token = spec.tokens[static_cast<std::size_t>(spec.subject.begin)];
        }
        for (int e = 0; e < 8; ++e)
            probe.entries.emplace_back(probe.token ? 0 : rng.uniform_int(0, 7), rng.uniform_int(0, 31));
        const auto report = gradient_check(toy, probe, kGradientTolerance);
        worst = std::max(worst, report.max_relative_error);
        passed = passed && report.passed;
        probes += static_cast<int>(probe.entries.size());
    });
    return {passed, fmt("%g probes, max relative error %.3e (tolerance %.0e)", probes, worst, kGradientTolerance)};
}

Outcome concept_trainer() {
    auto toy = fixture::toy(kSteps);
    const Tokenizer tok;
    const TokenId token = tok.token_id("<sks>");
    const auto prompt = tok.from_template("a photo of {}", "<sks>");
    std::vector<LatentGrid> refs;
    for (std::uint64_t i = 0; i < 4; ++i)
        refs.push_back(procedural_latent(toy.latent_shape(), i));
    auto cfg = ConceptTrainerConfig::embedding_inversion_defaults();
    cfg.steps = kConceptSteps;
    const Vector fresh = toy.token_embedding(token);
    const auto trained = train_concept_embedding(refs, token, prompt, cfg, toy, toy.schedule());
    constexpr std::uint64_t eval_seed = 0x5eed;
    const double l_trained = concept_denoising_loss(refs, token, prompt, trained.embedding, toy, toy.schedule(), eval_seed);
    const double l_fresh = concept_denoising_loss(refs, token, prompt, fresh, toy, toy.schedule(), eval_seed);
    cfg.steps = 0;
    const bool identity = train_concept_embedding(refs, token, prompt, cfg, toy, toy.schedule()).embedding == fresh;
    return {l_trained < l_fresh && identity,
            fmt("loss trained %.6f vs fresh %.6f after %g steps", l_trained, l_fresh, kConceptSteps) +
                "; steps=0 returns the initialization: " + (identity ? "yes" : "no")};
}

Outcome ablation_endpoints() {
    Scene s;
    const auto base = fixture::config(kSteps, {0, 0, 0});
    const auto same = ablation_sweep(SwapAxis::lambda_M, {0, 10, 25, kSteps}, base,
                                     AblationInputs{s.z_T, s.source, s.source}, s.toy);
    const auto other = ablation_sweep(SwapAxis::lambda_M, {0, 10, 25, kSteps}, base,
                                      AblationInputs{s.z_T, s.source, s.target}, s.toy);
    const double full = same.rows.back().mse_to_source;
    const double none = other.rows.front().mse_to_vanilla;
    std::string intermediate;
    for (std::size_t i = 1; i + 1 < other.rows.size(); ++i)
        intermediate += fmt(" lambda_M=%g: to_source %.3e to_vanilla %.3e;", other.rows[i].value,
                            other.rows[i].mse_to_source, other.rows[i].mse_to_vanilla);
    return {full < kEndpointTolerance && none < kEndpointTolerance && same.endpoints_passed() &&
                other.endpoints_passed(),
            fmt("lambda_M=T same prompt mse_to_source %.3e; lambda_M=0 mse_to_vanilla %.3e (tolerance %.0e);", full,
                none, kEndpointTolerance) +
                intermediate};
}

Outcome svd_analysis() {
    const auto toy = fixture::toy(kSteps);
    const auto cap = generate_with_capture(gaussian_latent(toy.latent_shape(), 1),
                                           fixture::prompt("a white cat on grass", "white cat"),
                                           fixture::config(kSteps, {1, 3, 2}), toy);
    const Matrix avg = average_attention(cap.bank, AttentionKind::self_attention);
    const auto summary = svd_components(avg, 4);
    const double energy_gap = std::abs(summary.singular_values.squaredNorm() - avg.squaredNorm());

    std::vector<oracle::Table> resized;
    for (const auto& key : cap.bank.keys()) {
        if (key.kind != AttentionKind::self_attention || key.branch != Branch::conditional)
            continue;
        const auto& tap = *std::find_if(cap.bank.layout().begin(), cap.bank.layout().end(),
                                        [&](const TapInfo& t) { return t.layer_id == key.layer_id; });
        resized.push_back(oracle::resize_rows(oracle::from_matrix(cap.bank.fetch(key)->map), tap.query_height,
                                              tap.query_width, kAnalysisGrid, kAnalysisGrid));
    }
    const double protocol_gap = (avg - oracle::to_matrix(oracle::mean_rows_normalized(resized))).cwiseAbs().maxCoeff();

    Rng rng(72);
    Vector u(kAnalysisGrid * kAnalysisGrid), v(8);
    for (Eigen::Index i = 0; i < u.size(); ++i)
        u(i) = 0.1 + rng.uniform();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = 0.1 + rng.uniform();
    v /= v.sum();
    const Matrix rank1 = u / u.maxCoeff() * v.transpose();
    const auto r1 = svd_components(rank1, 1);
    const Vector expected = (u.array() - u.minCoeff()) / (u.maxCoeff() - u.minCoeff());
    double component_gap = 0.0;
    for (int y = 0; y < kAnalysisGrid; ++y)
        for (int x = 0; x < kAnalysisGrid; ++x)
            component_gap = std::max(component_gap, std::abs(r1.components[0](y, x) - expected(y * kAnalysisGrid + x)));
    const double rank1_gap = (rank_k_approximation(rank1, 1) - rank1).cwiseAbs().maxCoeff();

    return {energy_gap <= kEnergyTolerance && protocol_gap <= kProtocolTolerance && component_gap <= kEnergyTolerance &&
                rank1_gap <= kEnergyTolerance,
            fmt("|sum sigma^2 - |M|_F^2| = %.3e; mean-oracle gap %.3e over ", energy_gap, protocol_gap) +
                std::to_string(resized.size()) + " maps" +
                fmt("; rank-1 component gap %.3e, reconstruction gap %.3e", component_gap, rank1_gap)};
}

Outcome persistence() {
    fixture::TempDir tmp("acc-persist");
    const auto toy = fixture::toy(kSteps);
    const LatentGrid z_T = gaussian_latent(toy.latent_shape(), 1);
    const auto cap = generate_with_capture(z_T, fixture::prompt("a white cat on grass", "white cat"),
                                           fixture::config(kSteps), toy);
    save_bank(cap.bank, tmp / "bank");
    save_latent(z_T, tmp / "z_T");
    const bool bank_exact = load_bank(tmp / "bank") == cap.bank;
    const bool latent_exact = load_latent(tmp / "z_T") == z_T;

    auto flip = [](const std::filesystem::path& file) {
        std::fstream f(file, std::ios::in | std::ios::out | std::ios::binary);
        char c = 0;
        f.seekg(5);
        f.read(&c, 1);
        c = static_cast<char>(c ^ 0x01);
        f.seekp(5);
        f.write(&c, 1);
    };
    auto fails_closed = [](const std::function<void()>& load) {
        try {
            load();
        } catch (const Error& e) {
            return e.kind() == ErrorKind::corruption;
        }
        return false;
    };
    std::filesystem::path blob;
    for (const auto& e : std::filesystem::directory_iterator(tmp / "bank"))
        if (e.path().extension() == ".bin")
            blob = e.path();
    flip(blob);
    flip(tmp / "z_T" / "latent.bin");
    const bool bank_closed = fails_closed([&] { load_bank(tmp / "bank"); });
    const bool latent_closed = fails_closed([&] { load_latent(tmp / "z_T"); });
    return {bank_exact && latent_exact && bank_closed && latent_closed,
            std::string("bank round trip exact: ") + (bank_exact ? "yes" : "no") + " (" +
                std::to_string(cap.bank.size()) + " records); latent exact: " + (latent_exact ? "yes" : "no") +
                "; corrupted bank rejected: " + (bank_closed ? "yes" : "no") +
                "; corrupted latent rejected: " + (latent_closed ? "yes" : "no")};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"default configuration", shipped_defaults},
        {"zero-schedule identity", zero_schedule_identity},
        {"full-swap reconstruction", full_swap_reconstruction},
        {"self-output precedence", phi_precedence},
        {"row-stochastic maps", row_stochasticity},
        {"ddim round trip", ddim_round_trip},
        {"null-text optimization", null_text},
        {"gradient contract", gradient_contract},
        {"concept trainer", concept_trainer},
        {"ablation endpoints", ablation_endpoints},
        {"svd analysis", svd_analysis},
        {"persistence", persistence},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = criteria[i].second();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += outcome.passed ? 0 : 1;
        std::printf("%s %2zu %-26s %s [%.2fs]\n", outcome.passed ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    outcome.detail.c_str(), seconds);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
