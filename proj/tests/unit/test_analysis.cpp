// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>

#include "doctest.h"
#include "oracles/oracles.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "subjswap/analysis.hpp"
#include "subjswap/error.hpp"
#include "subjswap/rng.hpp"

using namespace subjswap;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error raised");
    return ErrorKind::contract;
}

double max_abs_diff(const Matrix& a, const oracle::Table& b) {
    return (a - oracle::to_matrix(b)).cwiseAbs().maxCoeff();
}

// Oracle mean over the bank's records of one kind and branch, optionally
// restricted to one step.
oracle::Table oracle_mean(const AttentionBank& bank, AttentionKind kind, Branch branch, int only_step = 0) {
    std::vector<oracle::Table> resized;
    for (const auto& key : bank.keys()) {
        if (key.kind != kind || key.branch != branch || (only_step && key.step != only_step))
            continue;
        const auto tap = std::find_if(bank.layout().begin(), bank.layout().end(),
                                      [&](const TapInfo& t) { return t.layer_id == key.layer_id; });
        resized.push_back(oracle::resize_rows(oracle::from_matrix(bank.fetch(key)->map), tap->query_height,
                                              tap->query_width, kAnalysisGrid, kAnalysisGrid));
    }
    return oracle::mean_rows_normalized(resized);
}

AttentionBank captured_bank(int steps, SwapSchedule schedule) {
    const auto toy = fixture::toy(steps);
    return generate_with_capture(gaussian_latent(toy.latent_shape(), 1),
                                 fixture::prompt("a white cat on grass", "white cat"),
                                 fixture::config(steps, schedule), toy)
        .bank;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("query-axis resize matches the tent-kernel oracle") {
    gen::for_all(41, 10, [](Rng& rng, int) {
        const int gh = rng.uniform_int(1, 9), gw = rng.uniform_int(1, 9);
        const int oh = rng.uniform_int(1, 20), ow = rng.uniform_int(1, 20);
        const Matrix map = gen::stochastic(rng, gh * gw, rng.uniform_int(1, 6));
        CHECK(max_abs_diff(resize_query_axis(map, gh, gw, oh, ow), oracle::resize_rows(oracle::from_matrix(map), gh, gw, oh, ow)) < 1e-12);
    });
    Rng rng(42);
    const Matrix map = gen::stochastic(rng, 16, 3);
    CHECK((resize_query_axis(map, 4, 4, 4, 4) - map).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(kind_of([&] { resize_query_axis(map, 3, 4); }) == ErrorKind::shape);
}

TEST_CASE("averaged maps match the brute-force mean") {
    const auto bank = captured_bank(6, {1, 3, 2});
    for (auto kind : {AttentionKind::self_attention, AttentionKind::cross_attention}) {
        const Matrix avg = average_attention(bank, kind);
        CHECK(avg.rows() == kAnalysisGrid * kAnalysisGrid);
        CHECK(is_row_stochastic(avg, 1e-9));
        CHECK(max_abs_diff(avg, oracle_mean(bank, kind, Branch::conditional)) < 1e-6);
    }
    const Matrix uncond = average_attention(bank, AttentionKind::cross_attention, Branch::unconditional);
    CHECK(max_abs_diff(uncond, oracle_mean(bank, AttentionKind::cross_attention, Branch::unconditional)) < 1e-6);
    CHECK(kind_of([] { average_attention(AttentionBank{}, AttentionKind::self_attention); }) == ErrorKind::empty_input);
}

TEST_CASE("per-step maps cover the capture window") {
    const auto bank = captured_bank(6, {1, 4, 2});
    const auto maps = per_step_maps(bank);
    REQUIRE(maps.size() == 4);
    CHECK(max_abs_diff(maps[0], oracle_mean(bank, AttentionKind::self_attention, Branch::conditional, 1)) < 1e-6);
    CHECK(max_abs_diff(maps[3], oracle_mean(bank, AttentionKind::self_attention, Branch::conditional, 4)) < 1e-6);
}

TEST_CASE("singular value energy equals the Frobenius norm") {
    gen::for_all(43, 8, [](Rng& rng, int) {
        const Matrix map = gen::stochastic(rng, 16, rng.uniform_int(2, 16));
        const auto s = svd_components(map, 2, 4, 4);
        const double fro = oracle::frobenius_squared(oracle::from_matrix(map));
        CHECK(std::abs(s.singular_values.squaredNorm() - fro) <= 1e-6 * std::max(1.0, fro));
        for (Eigen::Index i = 1; i < s.singular_values.size(); ++i)
            CHECK(s.singular_values(i) <= s.singular_values(i - 1));
        CHECK(s.explained_fraction[0] >= s.explained_fraction[1]);
    });
}

TEST_CASE("rank-one maps are recovered by the first component") {
    Rng rng(44);
    Vector u(16), v(5);
    for (Eigen::Index i = 0; i < u.size(); ++i)
        u(i) = 0.1 + rng.uniform();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = 0.1 + rng.uniform();
    v /= v.sum();
    const Matrix map = u / u.maxCoeff() * v.transpose();
    const auto s = svd_components(map, 1, 4, 4);
    CHECK(s.explained_fraction[0] == doctest::Approx(1.0).epsilon(1e-12));
    const Vector expected = (u.array() - u.minCoeff()) / (u.maxCoeff() - u.minCoeff());
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
            CHECK(s.components[0](y, x) == doctest::Approx(expected(y * 4 + x)).epsilon(1e-9));
    CHECK((rank_k_approximation(map, 1) - map).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rank-k error never grows with k") {
    Rng rng(45);
    const Matrix map = gen::stochastic(rng, 16, 8);
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 8; ++k) {
        const double err = (rank_k_approximation(map, k) - map).norm();
        CHECK(err <= previous + 1e-12);
        previous = err;
    }
    CHECK(previous < 1e-10);
    CHECK(kind_of([&] { rank_k_approximation(map, 0); }) == ErrorKind::domain);
    CHECK(kind_of([&] { rank_k_approximation(map, 9); }) == ErrorKind::domain);
    Matrix bad = map;
    bad(0, 0) = std::nan("");
    CHECK(kind_of([&] { rank_k_approximation(bad, 1); }) == ErrorKind::numeric);
}

TEST_CASE("ablation endpoints") {
    const auto toy = fixture::toy(8);
    const auto prompt = fixture::prompt("a white cat on grass", "white cat");
    const AblationInputs inputs{gaussian_latent(toy.latent_shape(), 1), prompt, prompt};
    const auto report = ablation_sweep(SwapAxis::lambda_M, {0, 4, 8, 12}, fixture::config(8, {0, 0, 0}), inputs, toy);
    REQUIRE(report.rows.size() == 4);
    CHECK(report.rows.back().value == 8);
    CHECK(report.endpoints_passed());
    CHECK(report.rows[0].endpoint == std::optional<std::string>("no-swap"));
    CHECK(report.rows[2].endpoint == std::optional<std::string>("full-swap"));
    CHECK(report.rows[0].mse_to_vanilla < kAblationEndpointTolerance);
    CHECK(report.rows[2].mse_to_source < kAblationEndpointTolerance);
    CHECK(!report.rows[1].endpoint);
    CHECK(report.table().find("lambda_M") != std::string::npos);
    CHECK(swap_axis_from_string("lambda_A") == SwapAxis::lambda_A);
    CHECK(kind_of([] { swap_axis_from_string("beta"); }) == ErrorKind::validation);
}

TEST_CASE("heat maps and html") {
    Matrix m(2, 3);
    m << 0, 1, 2, 3, 4, 5;
    const auto img = render_heatmap(m, 4);
    CHECK(img.width == 12);
    CHECK(img.height == 8);
    const auto* lo = img.pixel(0, 0);
    const auto* hi = img.pixel(11, 7);
    CHECK(int(lo[0]) + lo[1] + lo[2] < int(hi[0]) + hi[1] + hi[2]);
    const std::string page = html_grid("a<b", {{"x.png", "y.png"}}, {"row&1"});
    CHECK(page.find("a&lt;b") != std::string::npos);
    CHECK(page.find("row&amp;1") != std::string::npos);
    CHECK(page.find("x.png") != std::string::npos);
}

}
