// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sdaqec/augment/augmentor.hpp"
#include "sdaqec/core/error.hpp"
#include "sdaqec/core/rng.hpp"
#include "sdaqec/io/dataset.hpp"
#include "sdaqec/io/features.hpp"
#include "sdaqec/model/classifier.hpp"
#include "sdaqec/train/loss.hpp"
#include "sdaqec/train/optimizer.hpp"

namespace sdaqec {

struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 16;
    double lr = 1e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double weight_decay = 1e-4;
    std::size_t patience = 5;
    std::uint64_t seed = 0;
    bool use_diffusion = true;
    bool use_quantum = true;

    void validate() const {
        if (epochs == 0 || batch_size == 0) {
            throw ConfigError("epochs and batch_size must be positive");
        }
        if (!(lr > 0.0) || !(adam_beta1 > 0.0) || !(adam_beta2 > 0.0) || !(adam_eps > 0.0)) {
            throw ConfigError("optimizer constants must be positive");
        }
        if (weight_decay < 0.0) {
            throw ConfigError("weight_decay must be >= 0");
        }
        if (patience == 0 || patience > epochs) {
            throw ConfigError("patience must be in [1, epochs]");
        }
    }
};

struct EpochStats {
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    std::size_t best_epoch = 0;
    std::string stop_reason; // "early_stop", "max_epochs", "diverged"
};

/// Early stopping on validation loss. "Improvement" means strictly lower than
/// the best value seen so far; after `patience` consecutive non-improving
/// epochs, training stops.
class EarlyStopper {
  public:
    explicit EarlyStopper(std::size_t patience) : patience_(patience) {}

    /// Returns true when training should stop after this epoch.
    bool observe(double val_loss, std::size_t epoch) {
        if (val_loss < best_loss_) {
            best_loss_ = val_loss;
            best_epoch_ = epoch;
            counter_ = 0;
            return false;
        }
        ++counter_;
        return counter_ >= patience_;
    }

    double best_loss() const { return best_loss_; }
    std::size_t best_epoch() const { return best_epoch_; }

  private:
    std::size_t patience_;
    std::size_t counter_ = 0;
    std::size_t best_epoch_ = 0;
    double best_loss_ = std::numeric_limits<double>::infinity();
};

namespace detail {

/// Uniform view over image datasets and feature tables for the epoch loop.
struct BatchSource {
    std::size_t count = 0;
    // gather(indices) -> (inputs tensor, labels)
    std::function<std::pair<Tensor, std::vector<int>>(const std::vector<std::size_t> &)> gather;
};

inline BatchSource image_source(const Dataset &ds) {
    BatchSource src;
    src.count = ds.size();
    src.gather = [&ds](const std::vector<std::size_t> &idx) {
        std::vector<const ImageTensor *> images;
        std::vector<int> labels;
        images.reserve(idx.size());
        labels.reserve(idx.size());
        for (std::size_t i : idx) {
            images.push_back(&ds.samples[i].image);
            labels.push_back(ds.samples[i].label);
        }
        return std::make_pair(images_to_batch(images), std::move(labels));
    };
    return src;
}

inline BatchSource feature_source(const FeatureTable &table) {
    BatchSource src;
    src.count = table.size();
    src.gather = [&table](const std::vector<std::size_t> &idx) {
        Tensor batch({idx.size(), table.dim});
        std::vector<int> labels;
        labels.reserve(idx.size());
        for (std::size_t row = 0; row < idx.size(); ++row) {
            const auto &feats = table.rows[idx[row]];
            std::copy(feats.begin(), feats.end(), batch.data.begin() + row * table.dim);
            labels.push_back(table.labels[idx[row]]);
        }
        return std::make_pair(std::move(batch), std::move(labels));
    };
    return src;
}

/// Minibatch index plan for one epoch. A trailing single-sample batch is
/// folded into its predecessor so batch normalization always sees >= 2 rows.
inline std::vector<std::vector<std::size_t>> plan_batches(std::size_t count,
                                                          std::size_t batch_size, Rng &rng) {
    std::vector<std::size_t> order(count);
    for (std::size_t i = 0; i < count; ++i) {
        order[i] = i;
    }
    for (std::size_t i = count; i > 1; --i) {
        std::swap(order[i - 1], order[rng.uniform_int(i)]);
    }
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < count; start += batch_size) {
        const std::size_t end = std::min(count, start + batch_size);
        batches.emplace_back(order.begin() + start, order.begin() + end);
    }
    if (batches.size() > 1 && batches.back().size() == 1) {
        batches[batches.size() - 2].push_back(batches.back()[0]);
        batches.pop_back();
    }
    return batches;
}

struct EvalPass {
    double loss = 0.0;
    double accuracy = 0.0;
    std::vector<double> scores; // P(label = 1)
};

inline EvalPass evaluate_source(HybridClassifier &model, const BatchSource &src,
                                std::size_t batch_size = 64) {
    EvalPass out;
    out.scores.reserve(src.count);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < src.count; start += batch_size) {
        const std::size_t end = std::min(src.count, start + batch_size);
        std::vector<std::size_t> idx(end - start);
        for (std::size_t i = start; i < end; ++i) {
            idx[i - start] = i;
        }
        auto [inputs, batch_labels] = src.gather(idx);
        HybridClassifier::Cache cache;
        const Tensor logits = model.forward(inputs, false, cache);
        const BatchLoss batch_loss = cross_entropy_loss(logits, batch_labels);
        loss_sum += batch_loss.value * static_cast<double>(batch_labels.size());
        for (std::size_t i = 0; i < batch_labels.size(); ++i) {
            const std::array<double, 2> probs =
                softmax2({logits.data[i * 2], logits.data[i * 2 + 1]});
            out.scores.push_back(probs[1]);
            const int pred = probs[1] >= 0.5 ? 1 : 0;
            if (pred == batch_labels[i]) {
                ++correct;
            }
        }
    }
    out.loss = loss_sum / static_cast<double>(src.count);
    out.accuracy = static_cast<double>(correct) / static_cast<double>(src.count);
    return out;
}

struct CoreResult {
    HybridClassifier model;      // best-validation snapshot
    HybridClassifier last_model; // state after the final step
    TrainHistory history;
};

using EpochCallback = std::function<void(std::size_t, const EpochStats &)>;

inline CoreResult train_core(HybridClassifier model, const BatchSource &train_src,
                             const BatchSource &val_src, const TrainConfig &cfg,
                             const EpochCallback &on_epoch = {}) {
    cfg.validate();
    AdamOptimizer adam({cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps});
    EarlyStopper stopper(cfg.patience);
    TrainHistory history;
    HybridClassifier best_model = model;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng = Rng::substream(cfg.seed, 1000 + epoch);
        const auto batches = plan_batches(train_src.count, cfg.batch_size, shuffle_rng);

        double loss_sum = 0.0;
        bool diverged = false;
        for (const auto &batch_idx : batches) {
            auto [inputs, labels] = train_src.gather(batch_idx);
            model.zero_grads();
            HybridClassifier::Cache cache;
            Tensor logits;
            double batch_total = 0.0;
            try {
                logits = model.forward(inputs, true, cache);
                const BatchLoss batch_loss = cross_entropy_loss(logits, labels);
                model.backward(cache, batch_loss.d_logits);
                const double penalty = apply_l2_regularization(model, cfg.weight_decay);
                batch_total = batch_loss.value + penalty;
            } catch (const TrainingDiverged &) {
                diverged = true;
                break;
            }
            if (!std::isfinite(batch_total)) {
                diverged = true;
                break;
            }
            loss_sum += batch_total * static_cast<double>(batch_idx.size());
            auto params = model.param_blocks();
            adam.step(params);
        }
        if (diverged) {
            history.stop_reason = "diverged";
            break;
        }

        EpochStats stats;
        stats.train_loss = loss_sum / static_cast<double>(train_src.count);
        const EvalPass val = evaluate_source(model, val_src);
        stats.val_loss = val.loss;
        stats.val_accuracy = val.accuracy;
        history.epochs.push_back(stats);
        if (on_epoch) {
            on_epoch(epoch, stats);
        }

        const bool improved = val.loss < stopper.best_loss();
        const bool stop = stopper.observe(val.loss, epoch);
        if (improved) {
            best_model = model;
        }
        if (stop) {
            history.stop_reason = "early_stop";
            break;
        }
    }
    if (history.stop_reason.empty()) {
        history.stop_reason = "max_epochs";
    }
    history.best_epoch = stopper.best_epoch();
    // best_model starts as the untouched initial snapshot, so even a run that
    // diverged before the first validation pass hands back usable parameters.
    return {std::move(best_model), std::move(model), std::move(history)};
}

inline void require_both_classes(const Dataset &ds, const char *which) {
    if (ds.count(0) == 0 || ds.count(1) == 0) {
        throw DataError(std::string(which) + " split must contain both classes");
    }
}

} // namespace detail

struct TrainResult {
    HybridClassifier model;      // best-validation snapshot
    HybridClassifier last_model; // parameters after the final epoch
    TrainHistory history;
    Dataset augmented_train; // training set actually used (with synthetics)
};

/**
 * Full training run on image datasets: optional one-shot minority
 * augmentation, minibatched Adam on cross-entropy + L2, early stopping on
 * validation loss, returning the best-validation snapshot. Synthetic samples
 * are confined to the training split; a synthetic sample in `val` is an error.
 */
inline TrainResult train_classifier(const Dataset &train, const Dataset &val,
                                    const ModelConfig &model_cfg, const TrainConfig &cfg,
                                    const AugmentConfig &aug_cfg,
                                    const detail::EpochCallback &on_epoch = {}) {
    cfg.validate();
    detail::require_both_classes(train, "train");
    detail::require_both_classes(val, "val");
    for (const auto &s : val.samples) {
        if (s.origin == SampleOrigin::synthetic) {
            throw DataError("validation set must not contain synthetic samples");
        }
    }

    ModelConfig effective = model_cfg;
    effective.use_quantum = cfg.use_quantum;
    effective.validate();

    TrainResult result;
    result.augmented_train = cfg.use_diffusion ? augment_minority(train, aug_cfg) : train;

    HybridClassifier model(effective);
    model.init_params(cfg.seed);

    auto core = detail::train_core(std::move(model), detail::image_source(result.augmented_train),
                                   detail::image_source(val), cfg, on_epoch);
    result.model = std::move(core.model);
    result.last_model = std::move(core.last_model);
    result.history = std::move(core.history);
    return result;
}

/// Training on imported feature vectors (no image extractor, no diffusion).
inline TrainResult train_on_features(const FeatureTable &train, const FeatureTable &val,
                                     const ModelConfig &model_cfg, const TrainConfig &cfg,
                                     const detail::EpochCallback &on_epoch = {}) {
    cfg.validate();
    if (cfg.use_diffusion) {
        throw ConfigError("diffusion augmentation requires image data");
    }
    ModelConfig effective = model_cfg;
    effective.mode = ModelConfig::InputMode::feature;
    effective.feature_input_dim = train.dim;
    effective.use_quantum = cfg.use_quantum;
    effective.validate();

    HybridClassifier model(effective);
    model.init_params(cfg.seed);

    TrainResult result;
    auto core = detail::train_core(std::move(model), detail::feature_source(train),
                                   detail::feature_source(val), cfg, on_epoch);
    result.model = std::move(core.model);
    result.last_model = std::move(core.last_model);
    result.history = std::move(core.history);
    return result;
}

/// P(label = 1) for every sample, inference mode.
inline std::vector<double> predict_scores(HybridClassifier &model, const Dataset &data) {
    const auto src = detail::image_source(data);
    return detail::evaluate_source(model, src).scores;
}

inline std::vector<double> predict_scores(HybridClassifier &model, const FeatureTable &data) {
    const auto src = detail::feature_source(data);
    return detail::evaluate_source(model, src).scores;
}

} // namespace sdaqec
