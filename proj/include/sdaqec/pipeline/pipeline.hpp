// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sdaqec/eval/frechet.hpp"
#include "sdaqec/pipeline/checkpoint.hpp"
#include "sdaqec/pipeline/config.hpp"
#include "sdaqec/pipeline/reports.hpp"
#include "sdaqec/train/trainer.hpp"

namespace sdaqec {

/// Reduced features (inference mode) for a list of images.
inline std::vector<std::vector<double>> reduced_features(HybridClassifier &model,
                                                         const std::vector<const ImageTensor *> &images,
                                                         std::size_t batch_size = 64) {
    std::vector<std::vector<double>> rows;
    rows.reserve(images.size());
    for (std::size_t start = 0; start < images.size(); start += batch_size) {
        const std::size_t end = std::min(images.size(), start + batch_size);
        std::vector<const ImageTensor *> chunk(images.begin() + start, images.begin() + end);
        HybridClassifier::Cache cache;
        model.forward(images_to_batch(chunk), false, cache);
        const std::size_t d = cache.reduced.dim(1);
        for (std::size_t i = 0; i < chunk.size(); ++i) {
            rows.emplace_back(cache.reduced.data.begin() + i * d,
                              cache.reduced.data.begin() + (i + 1) * d);
        }
    }
    return rows;
}

/**
 * Fréchet distance between the trained extractor's feature distributions of
 * real minority samples and synthetic samples ("FD-ext"). Returns -1 when the
 * dataset has no synthetics or either side is too small for a Gaussian fit.
 */
inline double frechet_extractor_distance(HybridClassifier &model, const Dataset &augmented) {
    std::vector<const ImageTensor *> real_minority, synthetic;
    int minority_label = 1;
    for (const auto &s : augmented.samples) {
        if (s.origin == SampleOrigin::synthetic) {
            minority_label = s.label;
        }
    }
    for (const auto &s : augmented.samples) {
        if (s.origin == SampleOrigin::synthetic) {
            synthetic.push_back(&s.image);
        } else if (s.label == minority_label) {
            real_minority.push_back(&s.image);
        }
    }
    if (synthetic.size() < 2 || real_minority.size() < 2) {
        return -1.0;
    }
    const auto real_rows = reduced_features(model, real_minority);
    const auto synth_rows = reduced_features(model, synthetic);
    std::vector<double> mu_real, cov_real, mu_synth, cov_synth;
    fit_gaussian(real_rows, mu_real, cov_real);
    fit_gaussian(synth_rows, mu_synth, cov_synth);
    return frechet_distance(mu_real, cov_real, mu_synth, cov_synth);
}

struct TrainingRun {
    TrainResult result;
    double fd_ext = -1.0;
};

/**
 * Run training with artifacts: echoes the resolved config before any work,
 * then writes history.csv, best.ckpt, last.ckpt and train_report.json into
 * `out_dir`.
 */
inline TrainingRun run_training_pipeline(const RunConfig &cfg, const Dataset &train,
                                         const Dataset &val, const std::string &out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    {
        auto out = detail::open_out((fs::path(out_dir) / "resolved_config.json").string());
        out << run_config_to_json(cfg).dump(2) << "\n";
    }

    // history rows are appended as epochs complete, so a partial run still
    // leaves a usable log
    std::ofstream history_out((fs::path(out_dir) / "history.csv").string());
    if (!history_out) {
        throw DataError("cannot write history.csv in " + out_dir);
    }
    history_out << "epoch,train_loss,val_loss,val_accuracy\n";
    const auto append_epoch = [&history_out](std::size_t epoch, const EpochStats &stats) {
        history_out << epoch << ',' << detail::csv_double(stats.train_loss) << ','
                    << detail::csv_double(stats.val_loss) << ','
                    << detail::csv_double(stats.val_accuracy) << '\n';
        history_out.flush();
    };

    TrainingRun run;
    run.result =
        train_classifier(train, val, cfg.model_config(), cfg.train, cfg.augment, append_epoch);
    history_out.close();

    save_checkpoint((fs::path(out_dir) / "best.ckpt").string(), run.result.model);
    save_checkpoint((fs::path(out_dir) / "last.ckpt").string(), run.result.last_model);

    run.fd_ext = frechet_extractor_distance(run.result.model, run.result.augmented_train);

    nlohmann::json report;
    report["stop_reason"] = run.result.history.stop_reason;
    report["best_epoch"] = run.result.history.best_epoch;
    report["epochs_run"] = run.result.history.epochs.size();
    report["train_samples"] = run.result.augmented_train.size();
    std::size_t synthetic = 0;
    for (const auto &s : run.result.augmented_train.samples) {
        if (s.origin == SampleOrigin::synthetic) {
            ++synthetic;
        }
    }
    report["synthetic_samples"] = synthetic;
    if (run.fd_ext >= 0.0) {
        report["fd_ext"] = run.fd_ext;
    }
    {
        auto out = detail::open_out((fs::path(out_dir) / "train_report.json").string());
        out << report.dump(2) << "\n";
    }
    return run;
}

/**
 * Evaluate a model on a labeled test set and write metrics.json, roc.csv,
 * roc.svg and the violin-resolution bootstrap sample files.
 */
inline EvalReport run_eval_pipeline(const std::vector<double> &scores,
                                    const std::vector<int> &labels, const EvalConfig &eval_cfg,
                                    std::uint64_t seed, const std::string &out_dir,
                                    const std::string &name) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    EvalReport report =
        evaluate_predictions(scores, labels, eval_cfg.bootstrap_resamples, seed, name);
    write_metrics_json((fs::path(out_dir) / "metrics.json").string(), report);
    write_roc_csv((fs::path(out_dir) / "roc.csv").string(), report.roc);
    write_roc_svg((fs::path(out_dir) / "roc.svg").string(), report.roc);

    // raw bootstrap distributions at violin resolution
    std::vector<int> preds(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        preds[i] = scores[i] >= 0.5 ? 1 : 0;
    }
    const MetricSelector violin_metrics[] = {MetricSelector::accuracy, MetricSelector::auc,
                                             MetricSelector::f1};
    for (MetricSelector sel : violin_metrics) {
        const BootstrapResult b = bootstrap_metric(scores, preds, labels, sel,
                                                   eval_cfg.violin_resamples, seed + 104729);
        write_bootstrap_csv(
            (fs::path(out_dir) / ("bootstrap_" + std::string(metric_name(sel)) + ".csv")).string(),
            b);
    }
    return report;
}

} // namespace sdaqec
