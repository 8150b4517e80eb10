// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include "sdaqec/pipeline/pipeline.hpp"
#include "sdaqec/synth/corpus.hpp"
#include "support/tmpdir.hpp"

using namespace sdaqec;
using test_support::TmpDir;

TEST(RunConfig, DefaultsAreResolved) {
    const RunConfig cfg = parse_run_config(nlohmann::json::object());
    EXPECT_EQ(cfg.seed, 0u);
    EXPECT_EQ(cfg.target_size[0], 64u);
    EXPECT_DOUBLE_EQ(cfg.augment.balance_target, 0.7);
    EXPECT_EQ(cfg.augment.schedule.timesteps, 5u);
    EXPECT_DOUBLE_EQ(cfg.augment.schedule.beta_start, 1e-4);
    EXPECT_EQ(cfg.train.epochs, 30u);
    EXPECT_EQ(cfg.train.batch_size, 16u);
    EXPECT_DOUBLE_EQ(cfg.train.lr, 1e-4);
    EXPECT_DOUBLE_EQ(cfg.train.weight_decay, 1e-4);
    EXPECT_EQ(cfg.train.patience, 5u);
    EXPECT_EQ(cfg.quantum.n_qubits, 4u);
    EXPECT_EQ(cfg.extractor.reduced_dim, 16u);
    EXPECT_EQ(cfg.eval.bootstrap_resamples, 500u);
    EXPECT_EQ(cfg.eval.violin_resamples, 300u);
}

TEST(RunConfig, UnknownKeysRejectedEverywhere) {
    EXPECT_THROW(parse_run_config({{"sede", 3}}), ConfigError);
    EXPECT_THROW(parse_run_config({{"train", {{"epoch", 3}}}}), ConfigError);
    EXPECT_THROW(parse_run_config({{"quantum", {{"qubits", 3}}}}), ConfigError);
    EXPECT_THROW(parse_run_config({{"data", {{"path", "x"}}}}), ConfigError);
}

TEST(RunConfig, SeedPropagatesToStages) {
    const RunConfig cfg = parse_run_config({{"seed", 99}});
    EXPECT_EQ(cfg.train.seed, 99u);
    EXPECT_EQ(cfg.augment.seed, 99u);
}

TEST(RunConfig, ValidationCatchesContradictions) {
    RunConfig cfg = parse_run_config(nlohmann::json::object());
    EXPECT_THROW(cfg.validate(), ConfigError); // neither root nor features

    cfg.data_root = "a";
    cfg.feature_file = "b";
    EXPECT_THROW(cfg.validate(), ConfigError); // both

    cfg = parse_run_config({{"data", {{"root", "x"}}},
                            {"extractor", {{"reduced_dim", 8}}},
                            {"quantum", {{"n_qubits", 4}}}});
    EXPECT_THROW(cfg.validate(), ConfigError); // 8 != 2^4
}

TEST(RunConfig, EchoRoundTripsThroughParser) {
    nlohmann::json j = {{"seed", 7},
                        {"data", {{"root", "corpus"}, {"target_size", {32, 32}}}},
                        {"train", {{"epochs", 3}, {"lr", 0.01}}},
                        {"augment", {{"balance_target", 0.8}}}};
    const RunConfig cfg = parse_run_config(j);
    const nlohmann::json echo = run_config_to_json(cfg);
    const RunConfig back = parse_run_config(echo);
    EXPECT_EQ(back.seed, cfg.seed);
    EXPECT_EQ(back.data_root, cfg.data_root);
    EXPECT_EQ(back.target_size, cfg.target_size);
    EXPECT_EQ(back.train.epochs, cfg.train.epochs);
    EXPECT_DOUBLE_EQ(back.train.lr, cfg.train.lr);
    EXPECT_DOUBLE_EQ(back.augment.balance_target, cfg.augment.balance_target);
    EXPECT_EQ(run_config_to_json(back), echo);
}

TEST(RunConfig, WideEncodingModeValidates) {
    // 256-dimensional reduction encoded on 8 qubits, measuring the first 4
    const RunConfig cfg = parse_run_config(
        {{"data", {{"root", "x"}}},
         {"extractor", {{"reduced_dim", 256}}},
         {"quantum", {{"n_qubits", 8}, {"measured_qubits", 4}}}});
    EXPECT_NO_THROW(cfg.validate());
    const ModelConfig model = cfg.model_config();
    EXPECT_EQ(model.head_input_dim(), 4u);
    EXPECT_EQ(model.quantum.n_qubits, 8u);
}

TEST(RunConfig, BadJsonFileReported) {
    TmpDir dir("sdaqec_cfg");
    {
        std::ofstream out(dir.sub("bad.json"));
        out << "{ not json";
    }
    EXPECT_THROW(load_run_config(dir.sub("bad.json")), ConfigError);
    EXPECT_THROW(load_run_config(dir.sub("missing.json")), ConfigError);
}

namespace {

ModelConfig tiny_model() {
    ModelConfig cfg;
    cfg.extractor.in_h = 16;
    cfg.extractor.in_w = 16;
    cfg.extractor.stem_channels = 4;
    cfg.extractor.blocks = {{2, 6, 2}};
    cfg.extractor.feature_dim = 8;
    cfg.extractor.reduced_dim = 4;
    cfg.quantum.n_qubits = 2;
    cfg.quantum.n_layers = 2;
    cfg.quantum.measured_qubits = 2;
    return cfg;
}

} // namespace

TEST(Checkpoint, RoundTripPreservesPredictions) {
    TmpDir dir("sdaqec_ckpt");
    HybridClassifier model(tiny_model());
    model.init_params(5);

    const Dataset probe = generate_texture_dataset(3, 3, 16, 9);
    const std::vector<double> before = predict_scores(model, probe);

    save_checkpoint(dir.sub("m.ckpt"), model);
    HybridClassifier loaded = load_checkpoint(dir.sub("m.ckpt"));
    const std::vector<double> after = predict_scores(loaded, probe);
    ASSERT_EQ(before.size(), after.size());
    for (std::size_t i = 0; i < before.size(); ++i) {
        EXPECT_EQ(before[i], after[i]);
    }
}

TEST(Checkpoint, RejectsCorruptedShapes) {
    TmpDir dir("sdaqec_ckpt_bad");
    HybridClassifier model(tiny_model());
    model.init_params(5);
    save_checkpoint(dir.sub("m.ckpt"), model);

    nlohmann::json j;
    {
        std::ifstream in(dir.sub("m.ckpt"));
        in >> j;
    }
    j["params"]["out.w"]["shape"] = {3, 2};
    {
        std::ofstream out(dir.sub("bad.ckpt"));
        out << j.dump();
    }
    EXPECT_THROW(load_checkpoint(dir.sub("bad.ckpt")), DataError);

    j["params"].erase("out.w");
    {
        std::ofstream out(dir.sub("missing.ckpt"));
        out << j.dump();
    }
    EXPECT_THROW(load_checkpoint(dir.sub("missing.ckpt")), DataError);
}

TEST(Checkpoint, RejectsWrongFormatOrVersion) {
    TmpDir dir("sdaqec_ckpt_fmt");
    {
        std::ofstream out(dir.sub("x.ckpt"));
        out << R"({"format":"something-else","version":1})";
    }
    EXPECT_THROW(load_checkpoint(dir.sub("x.ckpt")), DataError);
    {
        std::ofstream out(dir.sub("y.ckpt"));
        out << R"({"format":"sdaqec-checkpoint","version":99})";
    }
    EXPECT_THROW(load_checkpoint(dir.sub("y.ckpt")), DataError);
}

TEST(TextureCorpus, DeterministicAndInRange) {
    const Dataset a = generate_texture_dataset(4, 3, 16, 42);
    const Dataset b = generate_texture_dataset(4, 3, 16, 42);
    ASSERT_EQ(a.size(), 7u);
    EXPECT_EQ(a.count(0), 4u);
    EXPECT_EQ(a.count(1), 3u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a.samples[i].image.data, b.samples[i].image.data);
        EXPECT_TRUE(a.samples[i].image.values_in_unit_range());
    }
    const Dataset c = generate_texture_dataset(4, 3, 16, 43);
    EXPECT_NE(a.samples[0].image.data, c.samples[0].image.data);
}

TEST(TextureCorpus, WrittenCorpusLoadsBack) {
    TmpDir dir("sdaqec_corpus");
    write_texture_corpus(dir.str(), 5, 3, 16, 7);
    const Dataset ds = load_dataset(dir.str(), 16, 16);
    EXPECT_EQ(ds.count(0), 5u);
    EXPECT_EQ(ds.count(1), 3u);
}

TEST(EvaluatePredictions, ProducesCoherentReport) {
    Rng rng(12);
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) {
        labels.push_back(i % 2);
        const double base = labels.back() == 1 ? 0.7 : 0.3;
        scores.push_back(std::clamp(base + 0.25 * rng.normal(), 0.0, 1.0));
    }
    const EvalReport report = evaluate_predictions(scores, labels, 100, 3, "probe");
    EXPECT_EQ(report.n_test, 60u);
    EXPECT_EQ(report.confusion_matrix.total(), 60u);
    EXPECT_TRUE(report.metrics.auc_defined);
    EXPECT_GT(report.metrics.auc, 0.5);
    EXPECT_EQ(report.bootstrap.size(), 6u);
    for (const auto &[name, b] : report.bootstrap) {
        EXPECT_LE(b.ci_lo, b.ci_hi) << name;
    }

    const nlohmann::json j = report_to_json(report);
    EXPECT_EQ(j.at("name"), "probe");
    EXPECT_TRUE(j.at("metrics").contains("sensitivity"));
    EXPECT_TRUE(j.at("bootstrap").contains("auc"));
}

TEST(Reports, FilesAreWrittenAndReadable) {
    TmpDir dir("sdaqec_reports");
    std::vector<double> scores{0.9, 0.8, 0.3, 0.2, 0.7, 0.1};
    std::vector<int> labels{1, 1, 0, 0, 1, 0};
    EvalConfig eval_cfg;
    eval_cfg.bootstrap_resamples = 50;
    eval_cfg.violin_resamples = 30;
    const EvalReport report =
        run_eval_pipeline(scores, labels, eval_cfg, 9, dir.str(), "unit");

    EXPECT_TRUE(std::filesystem::exists(dir.sub("metrics.json")));
    EXPECT_TRUE(std::filesystem::exists(dir.sub("roc.csv")));
    EXPECT_TRUE(std::filesystem::exists(dir.sub("roc.svg")));
    EXPECT_TRUE(std::filesystem::exists(dir.sub("bootstrap_accuracy.csv")));
    EXPECT_TRUE(std::filesystem::exists(dir.sub("bootstrap_auc.csv")));
    EXPECT_TRUE(std::filesystem::exists(dir.sub("bootstrap_f1.csv")));

    const ComparisonEntry entry = read_metrics_json(dir.sub("metrics.json"));
    EXPECT_EQ(entry.name, "unit");
    EXPECT_DOUBLE_EQ(entry.metrics.at("accuracy"), report.metrics.accuracy);

    std::ifstream roc(dir.sub("roc.csv"));
    std::string header;
    std::getline(roc, header);
    EXPECT_EQ(header, "threshold,fpr,tpr");

    // violin file has the requested number of raw samples
    std::ifstream violin(dir.sub("bootstrap_accuracy.csv"));
    std::string line;
    std::getline(violin, line);
    EXPECT_EQ(line, "accuracy");
    std::size_t rows = 0;
    while (std::getline(violin, line)) {
        if (!line.empty()) {
            ++rows;
        }
    }
    EXPECT_EQ(rows, 30u);
}

TEST(Reports, ImprovementTableMatchesFormula) {
    TmpDir dir("sdaqec_cmp");
    ComparisonEntry strong{"strong", {{"accuracy", 0.9833}, {"auc", 0.9878},
                                      {"specificity", 0.9833}}};
    ComparisonEntry weak{"weak", {{"accuracy", 0.6083}, {"auc", 0.8119},
                                  {"specificity", 0.2167}}};
    write_improvement_csv(dir.sub("improvement.csv"), {strong, weak}, weak);

    std::ifstream in(dir.sub("improvement.csv"));
    std::string header, strong_row;
    std::getline(in, header);
    std::getline(in, strong_row);
    EXPECT_NE(strong_row.find("strong"), std::string::npos);
    // accuracy column carries (0.9833-0.6083)/0.6083*100
    const double expected = relative_improvement(0.9833, 0.6083);
    EXPECT_NE(strong_row.find(std::to_string(expected).substr(0, 5)), std::string::npos);
}

TEST(TrainingPipeline, WritesAllArtifacts) {
    TmpDir dir("sdaqec_trainrun");
    const Dataset pool = generate_texture_dataset(24, 12, 16, 21);
    const auto parts = stratified_split(pool, {0.6, 0.2, 0.2}, 3);

    RunConfig cfg = parse_run_config(nlohmann::json::object());
    cfg.data_root = "unused";
    cfg.seed = 3;
    cfg.target_size = {16, 16};
    cfg.extractor = tiny_model().extractor;
    cfg.quantum = tiny_model().quantum;
    cfg.train.epochs = 2;
    cfg.train.patience = 2;
    cfg.train.batch_size = 8;
    cfg.train.seed = 3;
    cfg.augment.seed = 3;
    cfg.augment.balance_target = 0.9;

    const TrainingRun run = run_training_pipeline(cfg, parts[0], parts[1], dir.str());
    for (const char *f : {"resolved_config.json", "history.csv", "best.ckpt", "last.ckpt",
                          "train_report.json"}) {
        EXPECT_TRUE(std::filesystem::exists(dir.sub(f))) << f;
    }
    EXPECT_GE(run.fd_ext, 0.0);
    HybridClassifier reloaded = load_checkpoint(dir.sub("best.ckpt"));
    EXPECT_EQ(reloaded.parameter_count(), run.result.model.parameter_count());

    std::ifstream report_in(dir.sub("train_report.json"));
    nlohmann::json report;
    report_in >> report;
    EXPECT_TRUE(report.contains("fd_ext"));
    EXPECT_GT(report.at("synthetic_samples").get<std::size_t>(), 0u);
}

TEST(FrechetExtractor, NoSyntheticsMeansNotApplicable) {
    HybridClassifier model(tiny_model());
    model.init_params(5);
    const Dataset plain = generate_texture_dataset(4, 4, 16, 31);
    EXPECT_LT(frechet_extractor_distance(model, plain), 0.0);
}

TEST(Concurrency, PureOperationsAreSafeOnDistinctInputs) {
    // library calls on distinct data race-free: parallel invocations must
    // reproduce the serial results exactly
    const Dataset ds_a = generate_texture_dataset(8, 4, 16, 61);
    const Dataset ds_b = generate_texture_dataset(6, 6, 16, 62);
    AugmentConfig cfg_a, cfg_b;
    cfg_a.seed = 1;
    cfg_b.seed = 2;
    cfg_b.balance_target = 1.0;

    const Dataset serial_a = augment_minority(ds_a, cfg_a);
    const Dataset serial_b = augment_minority(ds_b, cfg_b);

    Dataset parallel_a, parallel_b;
    std::thread t1([&] { parallel_a = augment_minority(ds_a, cfg_a); });
    std::thread t2([&] { parallel_b = augment_minority(ds_b, cfg_b); });
    t1.join();
    t2.join();

    ASSERT_EQ(parallel_a.size(), serial_a.size());
    ASSERT_EQ(parallel_b.size(), serial_b.size());
    for (std::size_t i = 0; i < serial_a.size(); ++i) {
        EXPECT_EQ(parallel_a.samples[i].image.data, serial_a.samples[i].image.data);
    }

    // inference on a shared immutable model from two threads
    HybridClassifier model(tiny_model());
    model.init_params(9);
    const std::vector<double> serial_scores_a = predict_scores(model, ds_a);
    const std::vector<double> serial_scores_b = predict_scores(model, ds_b);
    std::vector<double> scores_a, scores_b;
    HybridClassifier copy_a = model, copy_b = model;
    std::thread t3([&] { scores_a = predict_scores(copy_a, ds_a); });
    std::thread t4([&] { scores_b = predict_scores(copy_b, ds_b); });
    t3.join();
    t4.join();
    EXPECT_EQ(scores_a, serial_scores_a);
    EXPECT_EQ(scores_b, serial_scores_b);
}
