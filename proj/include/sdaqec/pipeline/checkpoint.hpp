// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "sdaqec/core/error.hpp"
#include "sdaqec/model/classifier.hpp"

namespace sdaqec {

inline constexpr int kCheckpointVersion = 1;

namespace detail {

inline nlohmann::json model_config_to_json(const ModelConfig &cfg) {
    nlohmann::json j;
    j["mode"] = cfg.mode == ModelConfig::InputMode::image ? "image" : "feature";
    j["feature_input_dim"] = cfg.feature_input_dim;
    j["use_quantum"] = cfg.use_quantum;
    j["extractor"]["in_channels"] = cfg.extractor.in_channels;
    j["extractor"]["in_h"] = cfg.extractor.in_h;
    j["extractor"]["in_w"] = cfg.extractor.in_w;
    j["extractor"]["stem_channels"] = cfg.extractor.stem_channels;
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto &b : cfg.extractor.blocks) {
        blocks.push_back({b.expansion, b.out_channels, b.stride});
    }
    j["extractor"]["blocks"] = blocks;
    j["extractor"]["feature_dim"] = cfg.extractor.feature_dim;
    j["extractor"]["reduced_dim"] = cfg.extractor.reduced_dim;
    j["quantum"]["n_qubits"] = cfg.quantum.n_qubits;
    j["quantum"]["n_layers"] = cfg.quantum.n_layers;
    j["quantum"]["measured_qubits"] = cfg.quantum.measured_qubits;
    return j;
}

inline ModelConfig model_config_from_json(const nlohmann::json &j) {
    ModelConfig cfg;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "image") {
        cfg.mode = ModelConfig::InputMode::image;
    } else if (mode == "feature") {
        cfg.mode = ModelConfig::InputMode::feature;
    } else {
        throw DataError("checkpoint: unknown model mode '" + mode + "'");
    }
    cfg.feature_input_dim = j.at("feature_input_dim").get<std::size_t>();
    cfg.use_quantum = j.at("use_quantum").get<bool>();
    const auto &e = j.at("extractor");
    cfg.extractor.in_channels = e.at("in_channels").get<std::size_t>();
    cfg.extractor.in_h = e.at("in_h").get<std::size_t>();
    cfg.extractor.in_w = e.at("in_w").get<std::size_t>();
    cfg.extractor.stem_channels = e.at("stem_channels").get<std::size_t>();
    cfg.extractor.blocks.clear();
    for (const auto &b : e.at("blocks")) {
        cfg.extractor.blocks.push_back(
            {b.at(0).get<std::size_t>(), b.at(1).get<std::size_t>(), b.at(2).get<std::size_t>()});
    }
    cfg.extractor.feature_dim = e.at("feature_dim").get<std::size_t>();
    cfg.extractor.reduced_dim = e.at("reduced_dim").get<std::size_t>();
    const auto &q = j.at("quantum");
    cfg.quantum.n_qubits = q.at("n_qubits").get<std::size_t>();
    cfg.quantum.n_layers = q.at("n_layers").get<std::size_t>();
    cfg.quantum.measured_qubits = q.at("measured_qubits").get<std::size_t>();
    return cfg;
}

} // namespace detail

/// Versioned JSON weight dump with config echo.
inline void save_checkpoint(const std::string &path, const HybridClassifier &model) {
    nlohmann::json j;
    j["format"] = "sdaqec-checkpoint";
    j["version"] = kCheckpointVersion;
    j["model"] = detail::model_config_to_json(model.config());
    for (const ParamBlock *p : model.param_blocks()) {
        if (j["params"].contains(p->name)) {
            throw DataError("duplicate parameter name '" + p->name + "' in model");
        }
        j["params"][p->name]["shape"] = p->shape;
        j["params"][p->name]["values"] = p->value;
    }
    if (model.config().mode == ModelConfig::InputMode::image) {
        nlohmann::json bn = nlohmann::json::array();
        for (const auto &state : model.extractor().bn_states()) {
            bn.push_back({{"mean", state.running_mean}, {"var", state.running_var}});
        }
        j["bn_running"] = bn;
    }
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write checkpoint: " + path);
    }
    out << j.dump(2) << "\n";
}

/// Load a checkpoint, validating format, version and every parameter shape.
inline HybridClassifier load_checkpoint(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open checkpoint: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw DataError("checkpoint parse error in " + path + ": " + e.what());
    }
    if (!j.contains("format") || j.at("format") != "sdaqec-checkpoint") {
        throw DataError("not a checkpoint file: " + path);
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
        throw DataError("unsupported checkpoint version in " + path);
    }

    HybridClassifier model(detail::model_config_from_json(j.at("model")));
    for (ParamBlock *p : model.param_blocks()) {
        if (!j.at("params").contains(p->name)) {
            throw DataError("checkpoint missing parameter '" + p->name + "'");
        }
        const auto &entry = j.at("params").at(p->name);
        const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
        if (shape != p->shape) {
            throw DataError("checkpoint parameter '" + p->name + "' has shape " +
                            shape_string(shape) + ", expected " + shape_string(p->shape));
        }
        const auto values = entry.at("values").get<std::vector<double>>();
        if (values.size() != p->size()) {
            throw DataError("checkpoint parameter '" + p->name + "' has wrong length");
        }
        p->value = values;
    }
    if (model.config().mode == ModelConfig::InputMode::image) {
        auto &states = model.extractor().bn_states();
        const auto &bn = j.at("bn_running");
        if (bn.size() != states.size()) {
            throw DataError("checkpoint batch-norm state count mismatch");
        }
        for (std::size_t i = 0; i < states.size(); ++i) {
            const auto mean = bn.at(i).at("mean").get<std::vector<double>>();
            const auto var = bn.at(i).at("var").get<std::vector<double>>();
            if (mean.size() != states[i].channels || var.size() != states[i].channels) {
                throw DataError("checkpoint batch-norm state size mismatch");
            }
            states[i].running_mean = mean;
            states[i].running_var = var;
        }
    }
    return model;
}

} // namespace sdaqec
