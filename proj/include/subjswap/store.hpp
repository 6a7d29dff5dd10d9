// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "subjswap/latent.hpp"

namespace subjswap {

// On-disk layout shared by attention banks, latents, null-text banks and
// model weights: a directory holding a `manifest` (JSON text) and one raw
// little-endian blob per entry.
inline constexpr int kStoreFormatVersion = 1;

enum class Dtype { float32, float64 };

std::string_view to_string(Dtype dtype);
Dtype dtype_from_string(std::string_view name);
std::size_t dtype_size(Dtype dtype);

struct BlobInfo {
    std::string file;
    std::vector<std::int64_t> shape;
    Dtype dtype = Dtype::float64;
    std::uint64_t bytes = 0;
    std::uint64_t checksum = 0;
};

std::uint64_t fnv1a64(std::span<const unsigned char> bytes);

void write_file_atomic(const std::filesystem::path& path, std::span<const unsigned char> bytes);
void write_text_atomic(const std::filesystem::path& path, std::string_view text);
std::vector<unsigned char> read_file(const std::filesystem::path& path);

class StoreWriter {
public:
    StoreWriter(std::filesystem::path destination, std::string kind);
    ~StoreWriter();

    StoreWriter(const StoreWriter&) = delete;
    StoreWriter& operator=(const StoreWriter&) = delete;

    void put(const std::string& file, std::span<const double> values, std::vector<std::int64_t> shape,
             Dtype dtype = Dtype::float64);
    // Row-major flattening.
    void put_matrix(const std::string& file, const Matrix& matrix, Dtype dtype = Dtype::float64);

    nlohmann::json& metadata() { return m_metadata; }

    // Publishes the directory with a rename; nothing is visible before this.
    void commit();

private:
    std::filesystem::path m_destination;
    std::filesystem::path m_staging;
    std::string m_kind;
    nlohmann::json m_metadata = nlohmann::json::object();
    std::vector<BlobInfo> m_blobs;
    bool m_committed = false;
};

class StoreReader {
public:
    // Validates the manifest and every blob (size and checksum) up front.
    StoreReader(const std::filesystem::path& directory, std::string_view expected_kind);

    const nlohmann::json& metadata() const { return m_metadata; }
    bool contains(const std::string& file) const { return m_blobs.count(file) != 0; }
    const BlobInfo& info(const std::string& file) const;
    std::vector<std::string> files() const;

    std::vector<double> values(const std::string& file) const;
    Matrix matrix(const std::string& file) const;

private:
    nlohmann::json m_metadata;
    std::map<std::string, BlobInfo> m_blobs;
    std::map<std::string, std::vector<unsigned char>> m_bytes;
};

// Encodes/decodes raw blobs; used directly by the spill path of AttentionBank.
std::vector<unsigned char> encode_blob(std::span<const double> values, Dtype dtype);
std::vector<double> decode_blob(std::span<const unsigned char> bytes, Dtype dtype);

}  // namespace subjswap
