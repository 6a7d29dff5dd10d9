// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include "subjswap/store.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstring>
#include <fstream>
#include <unistd.h>

#include "subjswap/error.hpp"

namespace fs = std::filesystem;

namespace subjswap {

namespace {

constexpr const char* kManifestName = "manifest";

std::string unique_suffix() {
    static std::atomic<std::uint64_t> counter{0};
    return std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1));
}

template <typename Word>
void append_le(std::vector<unsigned char>& out, Word word) {
    for (std::size_t i = 0; i < sizeof(Word); ++i)
        out.push_back(static_cast<unsigned char>((word >> (8 * i)) & 0xFF));
}

template <typename Word>
Word read_le(const unsigned char* bytes) {
    Word word = 0;
    for (std::size_t i = 0; i < sizeof(Word); ++i)
        word |= static_cast<Word>(bytes[i]) << (8 * i);
    return word;
}

std::uint64_t element_count(const std::vector<std::int64_t>& shape) {
    std::uint64_t count = 1;
    for (auto d : shape) {
        require(d >= 0, ErrorKind::corruption, "negative dimension in blob shape");
        count *= static_cast<std::uint64_t>(d);
    }
    return count;
}

}  // namespace

std::string_view to_string(Dtype dtype) {
    return dtype == Dtype::float32 ? "float32" : "float64";
}

Dtype dtype_from_string(std::string_view name) {
    if (name == "float32")
        return Dtype::float32;
    if (name == "float64")
        return Dtype::float64;
    fail(ErrorKind::corruption, "unsupported dtype '" + std::string(name) + "'");
}

std::size_t dtype_size(Dtype dtype) { return dtype == Dtype::float32 ? 4 : 8; }

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char b : bytes) {
        hash ^= b;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::vector<unsigned char> encode_blob(std::span<const double> values, Dtype dtype) {
    std::vector<unsigned char> out;
    out.reserve(values.size() * dtype_size(dtype));
    for (double v : values) {
        if (dtype == Dtype::float64)
            append_le(out, std::bit_cast<std::uint64_t>(v));
        else
            append_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
    return out;
}

std::vector<double> decode_blob(std::span<const unsigned char> bytes, Dtype dtype) {
    const std::size_t width = dtype_size(dtype);
    require(bytes.size() % width == 0, ErrorKind::corruption, "blob size is not a multiple of the element size");
    std::vector<double> out(bytes.size() / width);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const unsigned char* p = bytes.data() + i * width;
        if (dtype == Dtype::float64)
            out[i] = std::bit_cast<double>(read_le<std::uint64_t>(p));
        else
            out[i] = static_cast<double>(std::bit_cast<float>(read_le<std::uint32_t>(p)));
    }
    return out;
}

void write_file_atomic(const fs::path& path, std::span<const unsigned char> bytes) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    const fs::path temp = path.string() + ".tmp-" + unique_suffix();
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        require(static_cast<bool>(out), ErrorKind::io, "cannot open " + temp.string() + " for writing");
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        require(static_cast<bool>(out), ErrorKind::io, "write failed for " + temp.string());
    }
    std::error_code ec;
    fs::rename(temp, path, ec);
    if (ec) {
        fs::remove(temp);
        fail(ErrorKind::io, "cannot rename into " + path.string() + ": " + ec.message());
    }
}

void write_text_atomic(const fs::path& path, std::string_view text) {
    write_file_atomic(path, std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
}

std::vector<unsigned char> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::io, "cannot open " + path.string());
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

StoreWriter::StoreWriter(fs::path destination, std::string kind)
    : m_destination(std::move(destination)), m_kind(std::move(kind)) {
    const fs::path parent = m_destination.has_parent_path() ? m_destination.parent_path() : fs::path(".");
    std::error_code ec;
    fs::create_directories(parent, ec);
    m_staging = parent / ("." + m_destination.filename().string() + ".staging-" + unique_suffix());
    fs::create_directories(m_staging, ec);
    require(!ec, ErrorKind::io, "cannot create staging directory " + m_staging.string() + ": " + ec.message());
}

StoreWriter::~StoreWriter() {
    if (!m_committed) {
        std::error_code ec;
        fs::remove_all(m_staging, ec);
    }
}

void StoreWriter::put(const std::string& file, std::span<const double> values, std::vector<std::int64_t> shape,
                      Dtype dtype) {
    require(element_count(shape) == values.size(), ErrorKind::shape, "blob " + file + " shape/value count mismatch");
    const auto bytes = encode_blob(values, dtype);
    std::ofstream out(m_staging / file, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::io, "cannot write blob " + file);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), ErrorKind::io, "write failed for blob " + file);
    m_blobs.push_back(BlobInfo{file, std::move(shape), dtype, bytes.size(), fnv1a64(bytes)});
}

void StoreWriter::put_matrix(const std::string& file, const Matrix& matrix, Dtype dtype) {
    std::vector<double> flat(static_cast<std::size_t>(matrix.size()));
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < matrix.rows(); ++r)
        for (Eigen::Index c = 0; c < matrix.cols(); ++c)
            flat[i++] = matrix(r, c);
    put(file, flat, {matrix.rows(), matrix.cols()}, dtype);
}

void StoreWriter::commit() {
    require(!m_committed, ErrorKind::contract, "store already committed");
    nlohmann::json manifest;
    manifest["format"] = "subjswap-store";
    manifest["version"] = kStoreFormatVersion;
    manifest["kind"] = m_kind;
    manifest["endianness"] = "little";
    manifest["metadata"] = m_metadata;
    nlohmann::json blobs = nlohmann::json::array();
    for (const auto& blob : m_blobs) {
        blobs.push_back({{"file", blob.file},
                         {"shape", blob.shape},
                         {"dtype", to_string(blob.dtype)},
                         {"bytes", blob.bytes},
                         {"checksum", blob.checksum}});
    }
    manifest["blobs"] = std::move(blobs);
    {
        std::ofstream out(m_staging / kManifestName, std::ios::trunc);
        require(static_cast<bool>(out), ErrorKind::io, "cannot write manifest");
        out << manifest.dump(2) << '\n';
        require(static_cast<bool>(out), ErrorKind::io, "manifest write failed");
    }

    std::error_code ec;
    fs::path displaced;
    if (fs::exists(m_destination)) {
        displaced = m_destination.string() + ".old-" + unique_suffix();
        fs::rename(m_destination, displaced, ec);
        require(!ec, ErrorKind::io, "cannot move aside " + m_destination.string() + ": " + ec.message());
    }
    fs::rename(m_staging, m_destination, ec);
    if (ec) {
        if (!displaced.empty())
            fs::rename(displaced, m_destination);
        fail(ErrorKind::io, "cannot publish " + m_destination.string() + ": " + ec.message());
    }
    if (!displaced.empty())
        fs::remove_all(displaced, ec);
    m_committed = true;
}

StoreReader::StoreReader(const fs::path& directory, std::string_view expected_kind) {
    const fs::path manifest_path = directory / kManifestName;
    require(fs::exists(manifest_path), ErrorKind::io, "no manifest in " + directory.string());
    const auto text = read_file(manifest_path);
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::corruption, "unparseable manifest in " + directory.string() + ": " + e.what());
    }

    try {
        require(manifest.at("format").get<std::string>() == "subjswap-store", ErrorKind::corruption,
                "not a subjswap store: " + directory.string());
        const int version = manifest.at("version").get<int>();
        require(version == kStoreFormatVersion, ErrorKind::format_version,
                "store format version " + std::to_string(version) + " is not supported (expected " +
                    std::to_string(kStoreFormatVersion) + ")");
        const auto kind = manifest.at("kind").get<std::string>();
        require(kind == expected_kind, ErrorKind::corruption,
                "store kind '" + kind + "' where '" + std::string(expected_kind) + "' was expected");
        require(manifest.at("endianness").get<std::string>() == "little", ErrorKind::corruption,
                "only little-endian stores are supported");
        m_metadata = manifest.at("metadata");

        for (const auto& entry : manifest.at("blobs")) {
            BlobInfo blob;
            blob.file = entry.at("file").get<std::string>();
            blob.shape = entry.at("shape").get<std::vector<std::int64_t>>();
            blob.dtype = dtype_from_string(entry.at("dtype").get<std::string>());
            blob.bytes = entry.at("bytes").get<std::uint64_t>();
            blob.checksum = entry.at("checksum").get<std::uint64_t>();
            require(blob.file.find('/') == std::string::npos && blob.file.find("..") == std::string::npos,
                    ErrorKind::corruption, "illegal blob name " + blob.file);
            require(element_count(blob.shape) * dtype_size(blob.dtype) == blob.bytes, ErrorKind::corruption,
                    "manifest size for " + blob.file + " disagrees with its shape");

            const fs::path blob_path = directory / blob.file;
            require(fs::exists(blob_path), ErrorKind::corruption, "missing blob " + blob.file);
            auto bytes = read_file(blob_path);
            require(bytes.size() == blob.bytes, ErrorKind::corruption,
                    "blob " + blob.file + " has " + std::to_string(bytes.size()) + " bytes, manifest declares " +
                        std::to_string(blob.bytes));
            require(fnv1a64(bytes) == blob.checksum, ErrorKind::corruption, "checksum mismatch for blob " + blob.file);
            m_bytes.emplace(blob.file, std::move(bytes));
            m_blobs.emplace(blob.file, std::move(blob));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::corruption, "malformed manifest in " + directory.string() + ": " + e.what());
    }
}

const BlobInfo& StoreReader::info(const std::string& file) const {
    auto it = m_blobs.find(file);
    require(it != m_blobs.end(), ErrorKind::corruption, "manifest has no blob " + file);
    return it->second;
}

std::vector<std::string> StoreReader::files() const {
    std::vector<std::string> names;
    for (const auto& [name, _] : m_blobs)
        names.push_back(name);
    return names;
}

std::vector<double> StoreReader::values(const std::string& file) const {
    const auto& blob = info(file);
    return decode_blob(m_bytes.at(file), blob.dtype);
}

Matrix StoreReader::matrix(const std::string& file) const {
    const auto& blob = info(file);
    require(blob.shape.size() == 2, ErrorKind::corruption, "blob " + file + " is not a matrix");
    const auto flat = values(file);
    Matrix m(blob.shape[0], blob.shape[1]);
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            m(r, c) = flat[i++];
    return m;
}

}  // namespace subjswap
