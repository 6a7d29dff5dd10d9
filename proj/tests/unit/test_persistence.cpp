// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "subjswap/error.hpp"
#include "subjswap/persistence.hpp"
#include "subjswap/rng.hpp"
#include "subjswap/store.hpp"

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

void flip_byte(const std::filesystem::path& file, std::size_t offset) {
    std::fstream f(file, std::ios::in | std::ios::out | std::ios::binary);
    f.seekg(static_cast<std::streamoff>(offset));
    char c = 0;
    f.read(&c, 1);
    c = static_cast<char>(c ^ 0x5a);
    f.seekp(static_cast<std::streamoff>(offset));
    f.write(&c, 1);
}

AttentionBank small_bank() {
    const auto toy = fixture::toy(6);
    return generate_with_capture(gaussian_latent(toy.latent_shape(), 1),
                                 fixture::prompt("a white cat on grass", "white cat"), fixture::config(6, {1, 3, 2}),
                                 toy)
        .bank;
}

}  // namespace

TEST_SUITE("persistence") {

TEST_CASE("bank round trip is bit-exact") {
    fixture::TempDir tmp("bank");
    const auto bank = small_bank();
    save_bank(bank, tmp / "bank");
    const auto loaded = load_bank(tmp / "bank");
    CHECK(loaded == bank);
    CHECK(loaded.schedule() == bank.schedule());
    CHECK(loaded.layout() == bank.layout());
    CHECK(loaded.branches() == bank.branches());
    CHECK(!loaded.capturing());
    for (const auto& key : bank.keys())
        CHECK(*loaded.fetch(key) == *bank.fetch(key));
}

TEST_CASE("banks load into a spilling bank") {
    fixture::TempDir tmp("bank-spill");
    const auto bank = small_bank();
    save_bank(bank, tmp / "bank");
    const auto loaded = load_bank(tmp / "bank", BankOptions{0, tmp / "spill"});
    CHECK(loaded.spilled_count() == bank.size());
    CHECK(loaded == bank);
}

TEST_CASE("corrupted banks fail closed") {
    fixture::TempDir tmp("bank-corrupt");
    const auto bank = small_bank();
    save_bank(bank, tmp / "bank");
    SUBCASE("flipped blob byte") {
        std::filesystem::path blob;
        for (const auto& e : std::filesystem::directory_iterator(tmp / "bank"))
            if (e.path().extension() == ".bin")
                blob = e.path();
        flip_byte(blob, 3);
        CHECK(kind_of([&] { load_bank(tmp / "bank"); }) == ErrorKind::corruption);
    }
    SUBCASE("missing blob") {
        for (const auto& e : std::filesystem::directory_iterator(tmp / "bank"))
            if (e.path().extension() == ".bin") {
                std::filesystem::remove(e.path());
                break;
            }
        CHECK(classify(kind_of([&] { load_bank(tmp / "bank"); })) == ErrorClass::io);
    }
    SUBCASE("wrong kind") {
        save_latent(gaussian_latent({4, 8, 8}, 1), tmp / "latent");
        CHECK(classify(kind_of([&] { load_bank(tmp / "latent"); })) == ErrorClass::io);
    }
    SUBCASE("missing directory") {
        CHECK(kind_of([&] { load_bank(tmp / "absent"); }) == ErrorKind::io);
    }
}

TEST_CASE("a bank still capturing cannot be saved") {
    fixture::TempDir tmp("bank-open");
    AttentionBank bank;
    bank.begin_capture(2, SwapSchedule{1, 1, 1}, {TapInfo{"x", AttentionKind::self_attention, 1, 1, 1, 1}},
                       {Branch::conditional});
    CHECK(kind_of([&] { save_bank(bank, tmp / "bank"); }) == ErrorKind::contract);
}

TEST_CASE("latent round trip with metadata") {
    fixture::TempDir tmp("latent");
    const LatentGrid z = gaussian_latent({3, 5, 7}, 9);
    save_latent(z, tmp / "z", {{"seed", 9}});
    nlohmann::json meta;
    CHECK(load_latent(tmp / "z", &meta) == z);
    CHECK(meta.at("seed") == 9);
    flip_byte(tmp / "z" / "latent.bin", 10);
    CHECK(kind_of([&] { load_latent(tmp / "z"); }) == ErrorKind::corruption);
}

TEST_CASE("trajectory, null-text and concept round trips") {
    fixture::TempDir tmp("misc");
    const auto toy = fixture::toy(4);
    const auto traj = generate(gaussian_latent(toy.latent_shape(), 2), fixture::prompt("a cat", "cat"),
                               fixture::config(4), toy);
    save_trajectory(traj, tmp / "traj");
    CHECK(load_trajectory(tmp / "traj") == traj);

    NullTextBank nb;
    for (int i = 0; i < 4; ++i)
        nb.per_step.push_back(Matrix::Constant(8, 32, 0.1 * i));
    save_null_bank(nb, tmp / "null");
    CHECK(load_null_bank(tmp / "null") == nb);

    const ConceptEmbedding c{"<sks>", 7, Vector::LinSpaced(32, -1, 1)};
    save_concept(c, tmp / "concept");
    const auto lc = load_concept(tmp / "concept");
    CHECK(lc.word == c.word);
    CHECK(lc.token == c.token);
    CHECK(lc.embedding == c.embedding);
}

}
