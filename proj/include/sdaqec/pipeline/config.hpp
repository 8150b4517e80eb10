// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdaqec/augment/augmentor.hpp"
#include "sdaqec/core/error.hpp"
#include "sdaqec/model/classifier.hpp"
#include "sdaqec/train/trainer.hpp"

namespace sdaqec {

/// Evaluation-stage knobs.
struct EvalConfig {
    std::size_t bootstrap_resamples = 500;
    std::size_t violin_resamples = 300;
};

/**
 * Unified run configuration: data location, augmentation, extractor and
 * quantum shapes, optimizer settings. Parsed strictly (unknown keys are
 * rejected) and echoed fully resolved into every run's output directory.
 */
struct RunConfig {
    std::uint64_t seed = 0;

    std::string data_root;     // directory of root/<label>/*.png
    std::string feature_file;  // alternative: CSV of precomputed features
    std::array<std::size_t, 2> target_size{64, 64}; // H, W
    std::array<double, 3> split{0.7, 0.15, 0.15};

    AugmentConfig augment;
    ExtractorConfig extractor;
    QuantumConfig quantum;
    TrainConfig train;
    EvalConfig eval;

    ModelConfig model_config() const {
        ModelConfig cfg;
        cfg.mode = feature_file.empty() ? ModelConfig::InputMode::image
                                        : ModelConfig::InputMode::feature;
        cfg.extractor = extractor;
        cfg.extractor.in_channels = 3;
        cfg.extractor.in_h = target_size[0];
        cfg.extractor.in_w = target_size[1];
        cfg.use_quantum = train.use_quantum;
        cfg.quantum = quantum;
        return cfg;
    }

    void validate() const {
        if (data_root.empty() && feature_file.empty()) {
            throw ConfigError("config: either data.root or data.features is required");
        }
        if (!data_root.empty() && !feature_file.empty()) {
            throw ConfigError("config: data.root and data.features are mutually exclusive");
        }
        if (target_size[0] < 8 || target_size[1] < 8) {
            throw ConfigError("config: target_size must be at least 8x8");
        }
        augment.validate();
        train.validate();
        if (eval.bootstrap_resamples == 0 || eval.violin_resamples == 0) {
            throw ConfigError("config: bootstrap iteration counts must be positive");
        }
        if (feature_file.empty()) {
            ModelConfig model = model_config();
            model.feature_input_dim = 1; // placeholder; image mode ignores it
            model.validate();
        }
    }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json &obj,
                                const std::vector<std::string> &known, const std::string &where) {
    for (const auto &item : obj.items()) {
        bool ok = false;
        for (const auto &key : known) {
            if (item.key() == key) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw ConfigError("config: unknown key '" + item.key() + "' in " + where);
        }
    }
}

template <typename T>
void read_if(const nlohmann::json &obj, const char *key, T &out) {
    if (obj.contains(key)) {
        try {
            out = obj.at(key).get<T>();
        } catch (const nlohmann::json::exception &) {
            throw ConfigError(std::string("config: bad value for '") + key + "'");
        }
    }
}

} // namespace detail

inline RunConfig parse_run_config(const nlohmann::json &j) {
    if (!j.is_object()) {
        throw ConfigError("config: top level must be an object");
    }
    detail::reject_unknown_keys(j, {"seed", "data", "augment", "extractor", "quantum", "train",
                                    "eval"},
                                "top level");
    RunConfig cfg;
    detail::read_if(j, "seed", cfg.seed);

    if (j.contains("data")) {
        const auto &d = j.at("data");
        detail::reject_unknown_keys(d, {"root", "features", "target_size", "split"}, "data");
        detail::read_if(d, "root", cfg.data_root);
        detail::read_if(d, "features", cfg.feature_file);
        detail::read_if(d, "target_size", cfg.target_size);
        detail::read_if(d, "split", cfg.split);
    }

    if (j.contains("augment")) {
        const auto &a = j.at("augment");
        detail::reject_unknown_keys(
            a, {"balance_target", "timesteps", "beta_start", "beta_end", "blur_sigma",
                "brightness"},
            "augment");
        detail::read_if(a, "balance_target", cfg.augment.balance_target);
        std::size_t timesteps = cfg.augment.schedule.timesteps;
        double beta_start = cfg.augment.schedule.beta_start;
        double beta_end = cfg.augment.schedule.beta_end;
        detail::read_if(a, "timesteps", timesteps);
        detail::read_if(a, "beta_start", beta_start);
        detail::read_if(a, "beta_end", beta_end);
        cfg.augment.schedule = linear_beta_schedule(timesteps, beta_start, beta_end);
        detail::read_if(a, "blur_sigma", cfg.augment.blur_sigma);
        std::array<double, 2> brightness{cfg.augment.brightness_lo, cfg.augment.brightness_hi};
        detail::read_if(a, "brightness", brightness);
        cfg.augment.brightness_lo = brightness[0];
        cfg.augment.brightness_hi = brightness[1];
    }

    if (j.contains("extractor")) {
        const auto &e = j.at("extractor");
        detail::reject_unknown_keys(
            e, {"stem_channels", "blocks", "feature_dim", "reduced_dim"}, "extractor");
        detail::read_if(e, "stem_channels", cfg.extractor.stem_channels);
        if (e.contains("blocks")) {
            cfg.extractor.blocks.clear();
            for (const auto &b : e.at("blocks")) {
                if (!b.is_array() || b.size() != 3) {
                    throw ConfigError("config: each block must be [expansion, out_channels, stride]");
                }
                BlockSpec spec;
                spec.expansion = b.at(0).get<std::size_t>();
                spec.out_channels = b.at(1).get<std::size_t>();
                spec.stride = b.at(2).get<std::size_t>();
                cfg.extractor.blocks.push_back(spec);
            }
        }
        detail::read_if(e, "feature_dim", cfg.extractor.feature_dim);
        detail::read_if(e, "reduced_dim", cfg.extractor.reduced_dim);
    }

    if (j.contains("quantum")) {
        const auto &q = j.at("quantum");
        detail::reject_unknown_keys(q, {"n_qubits", "n_layers", "measured_qubits"}, "quantum");
        detail::read_if(q, "n_qubits", cfg.quantum.n_qubits);
        detail::read_if(q, "n_layers", cfg.quantum.n_layers);
        cfg.quantum.measured_qubits = cfg.quantum.n_qubits;
        detail::read_if(q, "measured_qubits", cfg.quantum.measured_qubits);
    }

    if (j.contains("train")) {
        const auto &t = j.at("train");
        detail::reject_unknown_keys(t,
                                    {"epochs", "batch_size", "lr", "adam_beta1", "adam_beta2",
                                     "adam_eps", "weight_decay", "patience", "use_diffusion",
                                     "use_quantum"},
                                    "train");
        detail::read_if(t, "epochs", cfg.train.epochs);
        detail::read_if(t, "batch_size", cfg.train.batch_size);
        detail::read_if(t, "lr", cfg.train.lr);
        detail::read_if(t, "adam_beta1", cfg.train.adam_beta1);
        detail::read_if(t, "adam_beta2", cfg.train.adam_beta2);
        detail::read_if(t, "adam_eps", cfg.train.adam_eps);
        detail::read_if(t, "weight_decay", cfg.train.weight_decay);
        detail::read_if(t, "patience", cfg.train.patience);
        detail::read_if(t, "use_diffusion", cfg.train.use_diffusion);
        detail::read_if(t, "use_quantum", cfg.train.use_quantum);
    }

    if (j.contains("eval")) {
        const auto &e = j.at("eval");
        detail::reject_unknown_keys(e, {"bootstrap_resamples", "violin_resamples"}, "eval");
        detail::read_if(e, "bootstrap_resamples", cfg.eval.bootstrap_resamples);
        detail::read_if(e, "violin_resamples", cfg.eval.violin_resamples);
    }

    cfg.train.seed = cfg.seed;
    cfg.augment.seed = cfg.seed;
    return cfg;
}

inline RunConfig load_run_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return parse_run_config(j);
}

/// Fully resolved echo (defaults included).
inline nlohmann::json run_config_to_json(const RunConfig &cfg) {
    nlohmann::json j;
    j["seed"] = cfg.seed;
    j["data"]["root"] = cfg.data_root;
    j["data"]["features"] = cfg.feature_file;
    j["data"]["target_size"] = cfg.target_size;
    j["data"]["split"] = cfg.split;
    j["augment"]["balance_target"] = cfg.augment.balance_target;
    j["augment"]["timesteps"] = cfg.augment.schedule.timesteps;
    j["augment"]["beta_start"] = cfg.augment.schedule.beta_start;
    j["augment"]["beta_end"] = cfg.augment.schedule.beta_end;
    j["augment"]["blur_sigma"] = cfg.augment.blur_sigma;
    j["augment"]["brightness"] = {cfg.augment.brightness_lo, cfg.augment.brightness_hi};
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
    j["train"]["epochs"] = cfg.train.epochs;
    j["train"]["batch_size"] = cfg.train.batch_size;
    j["train"]["lr"] = cfg.train.lr;
    j["train"]["adam_beta1"] = cfg.train.adam_beta1;
    j["train"]["adam_beta2"] = cfg.train.adam_beta2;
    j["train"]["adam_eps"] = cfg.train.adam_eps;
    j["train"]["weight_decay"] = cfg.train.weight_decay;
    j["train"]["patience"] = cfg.train.patience;
    j["train"]["use_diffusion"] = cfg.train.use_diffusion;
    j["train"]["use_quantum"] = cfg.train.use_quantum;
    j["eval"]["bootstrap_resamples"] = cfg.eval.bootstrap_resamples;
    j["eval"]["violin_resamples"] = cfg.eval.violin_resamples;
    return j;
}

} // namespace sdaqec
