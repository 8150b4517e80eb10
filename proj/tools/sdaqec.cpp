// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.
//
// Command-line front end for the imbalanced-image classification pipeline:
// forward-diffusion minority augmentation, a depthwise-separable extractor
// with a simulated quantum feature layer, and the bootstrap evaluation suite.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "sdaqec/pipeline/pipeline.hpp"
#include "sdaqec/synth/corpus.hpp"

namespace fs = std::filesystem;
using namespace sdaqec;

namespace {

RunConfig load_config_or_default(const std::string &path) {
    if (path.empty()) {
        return RunConfig{};
    }
    return load_run_config(path);
}

void echo_config(const RunConfig &cfg, const std::string &out_dir) {
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "resolved_config.json");
    if (!out) {
        throw DataError("cannot write resolved config in " + out_dir);
    }
    out << run_config_to_json(cfg).dump(2) << "\n";
}

int run_analyze(const std::string &root) {
    const auto counts = scan_class_counts(root);
    const std::size_t n0 = counts.at(0);
    const std::size_t n1 = counts.at(1);
    const std::size_t n_maj = std::max(n0, n1);
    const std::size_t n_min = std::min(n0, n1);
    std::printf("class 0: %zu, class 1: %zu, ratio %.2f\n", n0, n1,
                static_cast<double>(n_maj) / static_cast<double>(n_min));
    std::printf("minority class: %d (%zu samples)\n", n0 <= n1 ? 0 : 1, n_min);
    return 0;
}

int run_augment(const std::string &root, RunConfig cfg, const std::string &out_dir) {
    cfg.data_root = root;
    cfg.validate();
    echo_config(cfg, out_dir);

    const Dataset ds = load_dataset(root, cfg.target_size[0], cfg.target_size[1]);
    std::vector<SynthesisRecord> manifest;
    const Dataset augmented = augment_minority(ds, cfg.augment, &manifest);

    std::size_t written = 0;
    std::ofstream manifest_out(fs::path(out_dir) / "manifest.csv");
    manifest_out << "index,source_id,timestep,gamma\n";
    for (std::size_t i = ds.size(); i < augmented.size(); ++i) {
        const LabeledSample &s = augmented.samples[i];
        const fs::path dir = fs::path(out_dir) / std::to_string(s.label);
        fs::create_directories(dir);
        RawImage raw;
        raw.width = s.image.width;
        raw.height = s.image.height;
        raw.channels = 3;
        raw.pixels.resize(raw.width * raw.height * 3);
        for (std::size_t y = 0; y < raw.height; ++y) {
            for (std::size_t x = 0; x < raw.width; ++x) {
                for (std::size_t c = 0; c < 3; ++c) {
                    raw.pixels[(y * raw.width + x) * 3 + c] = static_cast<unsigned char>(
                        std::lround(s.image.at(c, y, x) * 255.0));
                }
            }
        }
        char name[32];
        std::snprintf(name, sizeof(name), "syn_%05zu.png", written);
        write_png((dir / name).string(), raw);
        const SynthesisRecord &rec = manifest[written];
        manifest_out << written << ',' << rec.source_id << ',' << rec.timestep << ','
                     << detail::csv_double(rec.gamma) << '\n';
        ++written;
    }
    std::printf("wrote %zu synthetic samples to %s\n", written, out_dir.c_str());
    return 0;
}

int run_train(RunConfig cfg, const std::string &out_dir) {
    cfg.validate();

    if (!cfg.feature_file.empty()) {
        const FeatureTable table = import_features(cfg.feature_file);
        // stratified row split by label, mirroring the image-path split
        FeatureTable parts[3];
        for (int label : {0, 1}) {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < table.size(); ++i) {
                if (table.labels[i] == label) {
                    idx.push_back(i);
                }
            }
            Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(label) + 101);
            for (std::size_t i = idx.size(); i > 1; --i) {
                std::swap(idx[i - 1], idx[rng.uniform_int(i)]);
            }
            std::size_t cursor = 0;
            for (std::size_t p = 0; p < 3; ++p) {
                const std::size_t take =
                    p == 2 ? idx.size() - cursor
                           : static_cast<std::size_t>(cfg.split[p] * static_cast<double>(idx.size()));
                for (std::size_t k = 0; k < take && cursor < idx.size(); ++k) {
                    parts[p].rows.push_back(table.rows[idx[cursor]]);
                    parts[p].labels.push_back(table.labels[idx[cursor]]);
                    ++cursor;
                }
            }
        }
        for (auto &part : parts) {
            part.dim = table.dim;
        }
        if (cfg.train.use_diffusion) {
            std::printf("note: diffusion augmentation does not apply to feature input; disabled\n");
            cfg.train.use_diffusion = false;
        }
        echo_config(cfg, out_dir);
        ModelConfig mcfg = cfg.model_config();
        TrainConfig tcfg = cfg.train;
        const TrainResult result = train_on_features(parts[0], parts[1], mcfg, tcfg);
        write_history_csv((fs::path(out_dir) / "history.csv").string(), result.history);
        save_checkpoint((fs::path(out_dir) / "best.ckpt").string(), result.model);
        save_checkpoint((fs::path(out_dir) / "last.ckpt").string(), result.last_model);
        std::printf("training done: %zu epochs, stop=%s, best epoch %zu\n",
                    result.history.epochs.size(), result.history.stop_reason.c_str(),
                    result.history.best_epoch);
        return 0;
    }

    const Dataset ds = load_dataset(cfg.data_root, cfg.target_size[0], cfg.target_size[1]);
    const auto parts = stratified_split(ds, cfg.split, cfg.seed);

    nlohmann::json split_manifest;
    const char *part_names[] = {"train", "val", "test"};
    for (std::size_t p = 0; p < 3; ++p) {
        nlohmann::json ids = nlohmann::json::array();
        for (const auto &s : parts[p].samples) {
            ids.push_back(s.source_id);
        }
        split_manifest[part_names[p]] = ids;
    }

    const TrainingRun run = run_training_pipeline(cfg, parts[0], parts[1], out_dir);
    {
        std::ofstream out(fs::path(out_dir) / "split.json");
        out << split_manifest.dump(2) << "\n";
    }
    std::printf("training done: %zu epochs, stop=%s, best epoch %zu\n",
                run.result.history.epochs.size(), run.result.history.stop_reason.c_str(),
                run.result.history.best_epoch);
    if (run.fd_ext >= 0.0) {
        std::printf("FD-ext (real vs synthetic minority features): %.6f\n", run.fd_ext);
    }
    return 0;
}

int run_eval(const std::string &model_path, const std::string &data_root,
             const std::string &feature_path, const std::string &out_dir, std::uint64_t seed,
             const std::string &name, std::size_t n_bootstrap, std::size_t n_violin) {
    HybridClassifier model = load_checkpoint(model_path);

    std::vector<double> scores;
    std::vector<int> labels;
    if (!feature_path.empty()) {
        if (model.config().mode != ModelConfig::InputMode::feature) {
            throw ConfigError("model expects images; use --data");
        }
        const FeatureTable table = import_features(feature_path);
        if (table.dim != model.config().feature_input_dim) {
            throw ConfigError("feature dimension does not match the model");
        }
        scores = predict_scores(model, table);
        labels = table.labels;
    } else if (!data_root.empty()) {
        if (model.config().mode != ModelConfig::InputMode::image) {
            throw ConfigError("model expects feature vectors; use --features");
        }
        const Dataset ds = load_dataset(data_root, model.config().extractor.in_h,
                                        model.config().extractor.in_w);
        scores = predict_scores(model, ds);
        labels.reserve(ds.size());
        for (const auto &s : ds.samples) {
            labels.push_back(s.label);
        }
    } else {
        throw ConfigError("eval requires --data or --features");
    }

    EvalConfig eval_cfg;
    eval_cfg.bootstrap_resamples = n_bootstrap;
    eval_cfg.violin_resamples = n_violin;
    {
        fs::create_directories(out_dir);
        nlohmann::json resolved = {{"model", model_path},   {"data", data_root},
                                   {"features", feature_path}, {"seed", seed},
                                   {"name", name},          {"bootstrap_resamples", n_bootstrap},
                                   {"violin_resamples", n_violin}};
        std::ofstream out(fs::path(out_dir) / "resolved_config.json");
        out << resolved.dump(2) << "\n";
    }
    const EvalReport report = run_eval_pipeline(scores, labels, eval_cfg, seed, out_dir, name);
    std::printf("accuracy %.4f  precision %.4f  recall %.4f  specificity %.4f  f1 %.4f  auc %.4f\n",
                report.metrics.accuracy, report.metrics.precision, report.metrics.recall,
                report.metrics.specificity, report.metrics.f1, report.metrics.auc);
    std::printf("reports written to %s\n", out_dir.c_str());
    return 0;
}

int run_compare(const std::vector<std::string> &files, const std::string &out_dir,
                const std::string &baseline_name) {
    std::vector<ComparisonEntry> entries;
    entries.reserve(files.size());
    for (const auto &f : files) {
        entries.push_back(read_metrics_json(f));
    }
    std::size_t baseline_index = 0;
    if (!baseline_name.empty()) {
        bool found = false;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (entries[i].name == baseline_name) {
                baseline_index = i;
                found = true;
                break;
            }
        }
        if (!found) {
            throw ConfigError("baseline '" + baseline_name + "' not among the inputs");
        }
    } else {
        for (std::size_t i = 1; i < entries.size(); ++i) {
            if (entries[i].metrics.at("accuracy") <
                entries[baseline_index].metrics.at("accuracy")) {
                baseline_index = i;
            }
        }
    }

    fs::create_directories(out_dir);
    write_heatmap_csv((fs::path(out_dir) / "heatmap.csv").string(), entries);
    write_improvement_csv((fs::path(out_dir) / "improvement.csv").string(), entries,
                          entries[baseline_index]);
    std::printf("baseline: %s\n", entries[baseline_index].name.c_str());
    for (const auto &entry : entries) {
        std::printf("%-20s accuracy %.4f (%+.1f%%)\n", entry.name.c_str(),
                    entry.metrics.at("accuracy"),
                    relative_improvement(entry.metrics.at("accuracy"),
                                         entries[baseline_index].metrics.at("accuracy")));
    }
    return 0;
}

int run_describe(const std::string &config_path, const std::string &model_path) {
    CircuitParams params;
    if (!model_path.empty()) {
        const HybridClassifier model = load_checkpoint(model_path);
        if (!model.config().use_quantum) {
            std::printf("model was trained with the quantum layer disabled\n");
            return 0;
        }
        params = model.circuit_params();
    } else {
        const RunConfig cfg = load_config_or_default(config_path);
        params.n_qubits = cfg.quantum.n_qubits;
        params.n_layers = cfg.quantum.n_layers;
        params.measured_qubits = cfg.quantum.measured_qubits;
        params.thetas.assign(params.n_layers * params.n_qubits, 0.0);
    }
    std::fputs(describe_circuit(params).c_str(), stdout);
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"diffusion-augmented quantum-enhanced binary image classifier"};
    app.require_subcommand(1);

    // analyze
    std::string analyze_root;
    auto *analyze = app.add_subcommand("analyze", "print class distribution of a corpus");
    analyze->add_option("data", analyze_root, "corpus root (root/<label>/*.png)")->required();

    // augment
    std::string augment_root, augment_config, augment_out;
    std::uint64_t augment_seed = 0;
    bool augment_seed_set = false;
    auto *augment = app.add_subcommand("augment", "synthesize minority-class samples");
    augment->add_option("data", augment_root, "corpus root")->required();
    augment->add_option("--config", augment_config, "run config JSON");
    augment->add_option("--out", augment_out, "output directory")->required();
    augment->add_option("--seed", augment_seed, "seed override")->each([&](const std::string &) {
        augment_seed_set = true;
    });

    // train
    std::string train_config, train_out, train_data;
    std::uint64_t train_seed = 0;
    bool train_seed_set = false, no_diffusion = false, no_quantum = false;
    auto *train = app.add_subcommand("train", "train the classifier");
    train->add_option("--config", train_config, "run config JSON")->required();
    train->add_option("--out", train_out, "output directory")->required();
    train->add_option("--data", train_data, "override data root from the config");
    train->add_option("--seed", train_seed, "seed override")->each([&](const std::string &) {
        train_seed_set = true;
    });
    train->add_flag("--no-diffusion", no_diffusion, "disable minority augmentation");
    train->add_flag("--no-quantum", no_quantum, "replace the quantum layer with a dense head");

    // eval
    std::string eval_model, eval_data, eval_features, eval_out, eval_name = "model";
    std::uint64_t eval_seed = 0;
    std::size_t eval_bootstrap = 500, eval_violin = 300;
    auto *eval = app.add_subcommand("eval", "evaluate a checkpoint on labeled data");
    eval->add_option("--model", eval_model, "checkpoint file")->required();
    eval->add_option("--data", eval_data, "labeled corpus root");
    eval->add_option("--features", eval_features, "labeled feature CSV");
    eval->add_option("--out", eval_out, "output directory")->required();
    eval->add_option("--seed", eval_seed, "bootstrap seed");
    eval->add_option("--name", eval_name, "model name recorded in metrics.json");
    eval->add_option("--bootstrap", eval_bootstrap, "bootstrap iterations for CIs");
    eval->add_option("--violin", eval_violin, "bootstrap iterations for distribution files");

    // compare
    std::vector<std::string> compare_files;
    std::string compare_out, compare_baseline;
    auto *compare = app.add_subcommand("compare", "relative improvements across metrics.json files");
    compare->add_option("metrics", compare_files, "metrics.json files")
        ->required()
        ->expected(-2);
    compare->add_option("--out", compare_out, "output directory")->required();
    compare->add_option("--baseline", compare_baseline,
                        "baseline model name (default: lowest accuracy)");

    // describe-circuit
    std::string describe_config, describe_model;
    auto *describe = app.add_subcommand("describe-circuit", "print the quantum gate sequence");
    describe->add_option("--config", describe_config, "run config JSON");
    describe->add_option("--model", describe_model, "checkpoint file (prints trained angles)");

    // gen-corpus
    std::string corpus_out;
    std::size_t corpus_n0 = 300, corpus_n1 = 60, corpus_side = 64;
    std::uint64_t corpus_seed = 0;
    auto *gen = app.add_subcommand("gen-corpus", "generate a synthetic two-texture corpus");
    gen->add_option("--out", corpus_out, "output directory")->required();
    gen->add_option("--n0", corpus_n0, "class 0 sample count");
    gen->add_option("--n1", corpus_n1, "class 1 sample count");
    gen->add_option("--size", corpus_side, "image side length");
    gen->add_option("--seed", corpus_seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (analyze->parsed()) {
            return run_analyze(analyze_root);
        }
        if (augment->parsed()) {
            RunConfig cfg = load_config_or_default(augment_config);
            if (augment_seed_set) {
                cfg.seed = augment_seed;
                cfg.train.seed = augment_seed;
                cfg.augment.seed = augment_seed;
            }
            return run_augment(augment_root, cfg, augment_out);
        }
        if (train->parsed()) {
            RunConfig cfg = load_run_config(train_config);
            if (!train_data.empty()) {
                cfg.data_root = train_data;
            }
            if (train_seed_set) {
                cfg.seed = train_seed;
                cfg.train.seed = train_seed;
                cfg.augment.seed = train_seed;
            }
            if (no_diffusion) {
                cfg.train.use_diffusion = false;
            }
            if (no_quantum) {
                cfg.train.use_quantum = false;
            }
            return run_train(cfg, train_out);
        }
        if (eval->parsed()) {
            return run_eval(eval_model, eval_data, eval_features, eval_out, eval_seed, eval_name,
                            eval_bootstrap, eval_violin);
        }
        if (compare->parsed()) {
            return run_compare(compare_files, compare_out, compare_baseline);
        }
        if (describe->parsed()) {
            return run_describe(describe_config, describe_model);
        }
        if (gen->parsed()) {
            write_texture_corpus(corpus_out, corpus_n0, corpus_n1, corpus_side, corpus_seed);
            std::printf("wrote %zu + %zu images to %s\n", corpus_n0, corpus_n1,
                        corpus_out.c_str());
            return 0;
        }
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
