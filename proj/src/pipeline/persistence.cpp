// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include "subjswap/persistence.hpp"

#include "subjswap/error.hpp"
#include "subjswap/store.hpp"

namespace subjswap {

namespace {

using nlohmann::json;

std::string blob_name(const RecordKey& key, const char* field) {
    return "s" + std::to_string(key.step) + "_b" + std::to_string(static_cast<int>(key.branch)) + "_" +
           key.layer_id + "_" + std::to_string(key.head) + "_" + std::string(to_string(key.kind)) + "_" + field +
           ".bin";
}

template <typename F>
auto parse_or_corrupt(const std::filesystem::path& dir, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        fail(ErrorKind::corruption, dir.string() + ": malformed manifest metadata: " + e.what());
    } catch (const Error& e) {
        if (classify(e.kind()) == ErrorClass::io)
            throw;
        fail(ErrorKind::corruption, dir.string() + ": " + e.what());
    }
}

Branch branch_from_int(int value) {
    require(value == 0 || value == 1, ErrorKind::corruption, "branch must be 0 or 1");
    return static_cast<Branch>(value);
}

std::span<const double> flatten(const LatentGrid& latent) { return latent.values(); }

std::vector<std::int64_t> latent_dims(const LatentShape& shape) {
    return {shape.channels, shape.height, shape.width};
}

LatentShape shape_from_dims(const std::vector<std::int64_t>& dims) {
    require(dims.size() == 3, ErrorKind::corruption, "latent blob must be 3-dimensional");
    return LatentShape{static_cast<int>(dims[0]), static_cast<int>(dims[1]), static_cast<int>(dims[2])};
}

}  // namespace

void save_bank(const AttentionBank& bank, const std::filesystem::path& directory) {
    require(!bank.capturing(), ErrorKind::contract, "cannot save a bank that is still capturing");
    StoreWriter writer(directory, "attention_bank");
    json& meta = writer.metadata();
    meta["total_steps"] = bank.total_steps();
    meta["lambda_phi"] = bank.schedule().self_output_steps;
    meta["lambda_M"] = bank.schedule().self_map_steps;
    meta["lambda_A"] = bank.schedule().cross_map_steps;
    meta["window"] = bank.window();
    json layers = json::array();
    for (const auto& tap : bank.layout())
        layers.push_back({{"layer_id", tap.layer_id},
                          {"kind", to_string(tap.kind)},
                          {"heads", tap.heads},
                          {"query_height", tap.query_height},
                          {"query_width", tap.query_width},
                          {"key_count", tap.key_count}});
    meta["layers"] = std::move(layers);
    json branches = json::array();
    for (Branch b : bank.branches())
        branches.push_back(static_cast<int>(b));
    meta["branches"] = std::move(branches);

    json records = json::array();
    for (const auto& key : bank.keys()) {
        const auto record = bank.fetch(key);
        json entry{{"step", key.step},
                   {"branch", static_cast<int>(key.branch)},
                   {"layer_id", key.layer_id},
                   {"head", key.head},
                   {"kind", to_string(key.kind)},
                   {"map", blob_name(key, "map")}};
        writer.put_matrix(blob_name(key, "map"), record->map);
        if (record->output) {
            entry["output"] = blob_name(key, "output");
            writer.put_matrix(blob_name(key, "output"), *record->output);
        }
        records.push_back(std::move(entry));
    }
    meta["record_count"] = records.size();
    meta["records"] = std::move(records);
    writer.commit();
}

AttentionBank load_bank(const std::filesystem::path& directory, BankOptions options) {
    StoreReader reader(directory, "attention_bank");
    return parse_or_corrupt(directory, [&] {
        const json& meta = reader.metadata();
        const int total_steps = meta.at("total_steps").get<int>();
        const SwapSchedule schedule{meta.at("lambda_phi").get<int>(), meta.at("lambda_M").get<int>(),
                                    meta.at("lambda_A").get<int>()};
        require(meta.at("window").get<int>() == schedule.capture_window(), ErrorKind::corruption,
                "window disagrees with the stored schedule");
        std::vector<TapInfo> layout;
        for (const auto& layer : meta.at("layers"))
            layout.push_back(TapInfo{layer.at("layer_id").get<std::string>(),
                                     attention_kind_from_string(layer.at("kind").get<std::string>()),
                                     layer.at("heads").get<int>(), layer.at("query_height").get<int>(),
                                     layer.at("query_width").get<int>(), layer.at("key_count").get<int>()});
        std::vector<Branch> branches;
        for (const auto& b : meta.at("branches"))
            branches.push_back(branch_from_int(b.get<int>()));

        const json& records = meta.at("records");
        require(records.size() == meta.at("record_count").get<std::size_t>(), ErrorKind::corruption,
                "record_count disagrees with the record list");

        AttentionBank bank(std::move(options));
        bank.begin_capture(total_steps, schedule, layout, branches);
        for (const auto& entry : records) {
            RecordKey key{entry.at("step").get<int>(), branch_from_int(entry.at("branch").get<int>()),
                          entry.at("layer_id").get<std::string>(), entry.at("head").get<int>(),
                          attention_kind_from_string(entry.at("kind").get<std::string>())};
            const auto map_file = entry.at("map").get<std::string>();
            require(map_file == blob_name(key, "map"), ErrorKind::corruption, "unexpected blob name " + map_file);
            AttentionRecord record{key, reader.matrix(map_file), std::nullopt};
            if (entry.contains("output")) {
                const auto out_file = entry.at("output").get<std::string>();
                require(out_file == blob_name(key, "output"), ErrorKind::corruption,
                        "unexpected blob name " + out_file);
                record.output = reader.matrix(out_file);
            }
            bank.insert(std::move(record));
        }
        bank.finish_capture();
        bank.require_complete(bank.window(), branches);
        return bank;
    });
}

void save_latent(const LatentGrid& latent, const std::filesystem::path& directory, const nlohmann::json& metadata) {
    StoreWriter writer(directory, "latent");
    writer.metadata() = metadata.is_object() ? metadata : json::object();
    const auto values = flatten(latent);
    writer.put("latent.bin", values, latent_dims(latent.shape()));
    writer.commit();
}

LatentGrid load_latent(const std::filesystem::path& directory, nlohmann::json* metadata) {
    StoreReader reader(directory, "latent");
    return parse_or_corrupt(directory, [&] {
        require(reader.contains("latent.bin"), ErrorKind::corruption, "missing latent.bin");
        const LatentShape shape = shape_from_dims(reader.info("latent.bin").shape);
        if (metadata)
            *metadata = reader.metadata();
        return LatentGrid(shape, reader.values("latent.bin"));
    });
}

void save_trajectory(const Trajectory& trajectory, const std::filesystem::path& directory) {
    require(!trajectory.by_time.empty(), ErrorKind::empty_input, "empty trajectory");
    StoreWriter writer(directory, "trajectory");
    writer.metadata()["direction"] =
        trajectory.direction == TrajectoryDirection::sampling ? "sampling" : "inversion";
    writer.metadata()["steps"] = trajectory.steps();
    for (int t = 0; t <= trajectory.steps(); ++t) {
        const auto& z = trajectory.at(t);
        writer.put("z" + std::to_string(t) + ".bin", flatten(z), latent_dims(z.shape()));
    }
    writer.commit();
}

Trajectory load_trajectory(const std::filesystem::path& directory) {
    StoreReader reader(directory, "trajectory");
    return parse_or_corrupt(directory, [&] {
        Trajectory trajectory;
        const auto direction = reader.metadata().at("direction").get<std::string>();
        require(direction == "sampling" || direction == "inversion", ErrorKind::corruption,
                "unknown direction " + direction);
        trajectory.direction =
            direction == "sampling" ? TrajectoryDirection::sampling : TrajectoryDirection::inversion;
        const int steps = reader.metadata().at("steps").get<int>();
        require(steps >= 0, ErrorKind::corruption, "negative step count");
        for (int t = 0; t <= steps; ++t) {
            const std::string file = "z" + std::to_string(t) + ".bin";
            require(reader.contains(file), ErrorKind::corruption, "missing " + file);
            trajectory.by_time.emplace_back(shape_from_dims(reader.info(file).shape), reader.values(file));
        }
        return trajectory;
    });
}

void save_null_bank(const NullTextBank& bank, const std::filesystem::path& directory) {
    StoreWriter writer(directory, "null_text");
    writer.metadata()["steps"] = bank.steps();
    for (int j = 1; j <= bank.steps(); ++j)
        writer.put_matrix("step" + std::to_string(j) + ".bin", bank.at_step(j));
    writer.commit();
}

NullTextBank load_null_bank(const std::filesystem::path& directory) {
    StoreReader reader(directory, "null_text");
    return parse_or_corrupt(directory, [&] {
        NullTextBank bank;
        const int steps = reader.metadata().at("steps").get<int>();
        require(steps >= 1, ErrorKind::corruption, "null-text bank needs at least one step");
        for (int j = 1; j <= steps; ++j) {
            const std::string file = "step" + std::to_string(j) + ".bin";
            require(reader.contains(file), ErrorKind::corruption, "missing " + file);
            bank.per_step.push_back(reader.matrix(file));
        }
        return bank;
    });
}

void save_concept(const ConceptEmbedding& concept_embedding, const std::filesystem::path& directory) {
    StoreWriter writer(directory, "concept_embedding");
    writer.metadata()["word"] = concept_embedding.word;
    writer.metadata()["token"] = concept_embedding.token;
    const Vector& e = concept_embedding.embedding;
    writer.put("embedding.bin", std::span<const double>(e.data(), static_cast<std::size_t>(e.size())), {e.size()});
    writer.commit();
}

ConceptEmbedding load_concept(const std::filesystem::path& directory) {
    StoreReader reader(directory, "concept_embedding");
    return parse_or_corrupt(directory, [&] {
        ConceptEmbedding out;
        out.word = reader.metadata().at("word").get<std::string>();
        out.token = reader.metadata().at("token").get<TokenId>();
        require(reader.contains("embedding.bin"), ErrorKind::corruption, "missing embedding.bin");
        const auto values = reader.values("embedding.bin");
        out.embedding = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
        return out;
    });
}

}  // namespace subjswap
