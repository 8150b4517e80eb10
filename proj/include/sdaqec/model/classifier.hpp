// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sdaqec/core/error.hpp"
#include "sdaqec/core/image.hpp"
#include "sdaqec/core/rng.hpp"
#include "sdaqec/core/tensor.hpp"
#include "sdaqec/nn/extractor.hpp"
#include "sdaqec/nn/params.hpp"
#include "sdaqec/quantum/layer.hpp"

namespace sdaqec {

struct QuantumConfig {
    std::size_t n_qubits = 4;
    std::size_t n_layers = 2;
    std::size_t measured_qubits = 4;
};

struct ModelConfig {
    enum class InputMode { image, feature };

    InputMode mode = InputMode::image;
    ExtractorConfig extractor;
    std::size_t feature_input_dim = 0; // only for feature mode
    bool use_quantum = true;
    QuantumConfig quantum;

    std::size_t reduced_dim() const { return extractor.reduced_dim; }

    std::size_t head_input_dim() const {
        return use_quantum ? quantum.measured_qubits : reduced_dim();
    }

    void validate() const {
        extractor.validate();
        if (mode == InputMode::feature && feature_input_dim == 0) {
            throw ConfigError("feature mode requires feature_input_dim > 0");
        }
        if (use_quantum) {
            if (quantum.n_qubits == 0 || quantum.n_qubits > 12) {
                throw ConfigError("n_qubits must be in [1, 12]");
            }
            if (quantum.measured_qubits == 0 || quantum.measured_qubits > quantum.n_qubits) {
                throw ConfigError("measured_qubits must be in [1, n_qubits]");
            }
            const std::size_t expected = static_cast<std::size_t>(1) << quantum.n_qubits;
            if (reduced_dim() != expected) {
                throw ConfigError("reduced_dim (" + std::to_string(reduced_dim()) +
                                  ") must equal 2^n_qubits (" + std::to_string(expected) +
                                  ") for amplitude encoding");
            }
        }
    }
};

/**
 * End-to-end binary classifier: convolutional extractor (or linear reducer
 * for imported feature vectors), optional quantum feature map, linear head.
 * Owns every trainable parameter; gradients accumulate into the parameter
 * registry during `backward`.
 */
class HybridClassifier {
  public:
    struct Cache {
        bool training = false;
        FeatureExtractor::Cache extractor;
        FeatureReducer::Cache reducer;
        Tensor reduced; // [N, reduced_dim]
        std::vector<QuantumForward> quantum;
        Tensor head_in; // dense-head path only
        Tensor logits;  // [N, 2]
    };

    HybridClassifier() = default;

    explicit HybridClassifier(const ModelConfig &cfg) : cfg_(cfg) {
        cfg_.validate();
        if (cfg_.mode == ModelConfig::InputMode::image) {
            extractor_ = FeatureExtractor(cfg_.extractor);
        } else {
            reducer_ = FeatureReducer(cfg_.feature_input_dim, cfg_.reduced_dim());
        }
        if (cfg_.use_quantum) {
            thetas_ = ParamBlock("quantum.thetas", ParamKind::angle,
                                 {cfg_.quantum.n_layers, cfg_.quantum.n_qubits});
        }
        const std::size_t head_in = cfg_.head_input_dim();
        head_w_ = ParamBlock("out.w", ParamKind::weight, {2, head_in});
        head_b_ = ParamBlock("out.b", ParamKind::bias, {2});
    }

    const ModelConfig &config() const { return cfg_; }

    void init_params(std::uint64_t seed) {
        Rng front_rng = Rng::substream(seed, 1);
        if (cfg_.mode == ModelConfig::InputMode::image) {
            extractor_.init_params(front_rng);
        } else {
            reducer_.init_params(front_rng);
        }
        Rng head_rng = Rng::substream(seed, 2);
        if (cfg_.use_quantum) {
            for (double &t : thetas_.value) {
                t = head_rng.uniform(-0.39269908169872414, 0.39269908169872414); // pi/8
            }
        }
        const double bound = std::sqrt(1.0 / static_cast<double>(cfg_.head_input_dim()));
        for (double &w : head_w_.value) {
            w = head_rng.uniform(-bound, bound);
        }
        std::fill(head_b_.value.begin(), head_b_.value.end(), 0.0);
    }

    CircuitParams circuit_params() const {
        CircuitParams params;
        params.n_qubits = cfg_.quantum.n_qubits;
        params.n_layers = cfg_.quantum.n_layers;
        params.measured_qubits = cfg_.quantum.measured_qubits;
        params.thetas = thetas_.value;
        return params;
    }

    HeadParams head_params() const {
        HeadParams head;
        head.in_dim = cfg_.head_input_dim();
        head.w = head_w_.value;
        head.b = head_b_.value;
        return head;
    }

    /// Forward a batch. Image mode expects [N,C,H,W]; feature mode [N,D].
    Tensor forward(const Tensor &batch, bool training, Cache &cache) {
        cache.training = training;
        if (cfg_.mode == ModelConfig::InputMode::image) {
            cache.reduced = extractor_.forward(batch, training, cache.extractor);
        } else {
            cache.reduced = reducer_.forward(batch, cache.reducer);
        }
        const std::size_t n = cache.reduced.dim(0);
        Tensor logits({n, 2});

        if (cfg_.use_quantum) {
            const CircuitParams circuit = circuit_params();
            const HeadParams head = head_params();
            cache.quantum.clear();
            cache.quantum.reserve(n);
            const std::size_t d = cache.reduced.dim(1);
            for (std::size_t i = 0; i < n; ++i) {
                std::vector<double> features(cache.reduced.data.begin() + i * d,
                                             cache.reduced.data.begin() + (i + 1) * d);
                QuantumForward fwd = quantum_forward(features, circuit, head);
                logits.data[i * 2] = fwd.logits[0];
                logits.data[i * 2 + 1] = fwd.logits[1];
                cache.quantum.push_back(std::move(fwd));
            }
        } else {
            cache.head_in = cache.reduced;
            logits = nn::linear_forward(cache.reduced, head_w_.value, head_b_.value, 2);
        }
        cache.logits = logits;
        return logits;
    }

    /// Backprop d(loss)/d(logits) [N,2] into all parameter gradients.
    void backward(const Cache &cache, const Tensor &g_logits) {
        const std::size_t n = cache.reduced.dim(0);
        Tensor g_reduced(cache.reduced.shape);

        if (cfg_.use_quantum) {
            const CircuitParams circuit = circuit_params();
            const HeadParams head = head_params();
            const std::size_t d = cache.reduced.dim(1);
            for (std::size_t i = 0; i < n; ++i) {
                const std::array<double, 2> upstream{g_logits.data[i * 2],
                                                     g_logits.data[i * 2 + 1]};
                const QuantumGradients grads =
                    quantum_backward(cache.quantum[i], circuit, head, upstream);
                for (std::size_t j = 0; j < grads.d_thetas.size(); ++j) {
                    thetas_.grad[j] += grads.d_thetas[j];
                }
                for (std::size_t j = 0; j < grads.d_head_w.size(); ++j) {
                    head_w_.grad[j] += grads.d_head_w[j];
                }
                head_b_.grad[0] += grads.d_head_b[0];
                head_b_.grad[1] += grads.d_head_b[1];
                for (std::size_t j = 0; j < d; ++j) {
                    g_reduced.data[i * d + j] = grads.d_features[j];
                }
            }
        } else {
            nn::linear_backward(cache.head_in, head_w_.value, g_logits, 2, g_reduced,
                                head_w_.grad, head_b_.grad);
        }

        if (cfg_.mode == ModelConfig::InputMode::image) {
            extractor_.backward(cache.extractor, g_reduced);
        } else {
            reducer_.backward(cache.reducer, g_reduced);
        }
    }

    /// Stable-order access to every trainable block.
    std::vector<ParamBlock *> param_blocks() {
        std::vector<ParamBlock *> blocks;
        auto &front = cfg_.mode == ModelConfig::InputMode::image ? extractor_.params()
                                                                 : reducer_.params();
        for (auto &p : front) {
            blocks.push_back(&p);
        }
        if (cfg_.use_quantum) {
            blocks.push_back(&thetas_);
        }
        blocks.push_back(&head_w_);
        blocks.push_back(&head_b_);
        return blocks;
    }

    std::vector<const ParamBlock *> param_blocks() const {
        auto *self = const_cast<HybridClassifier *>(this);
        std::vector<const ParamBlock *> blocks;
        for (auto *p : self->param_blocks()) {
            blocks.push_back(p);
        }
        return blocks;
    }

    void zero_grads() {
        for (auto *p : param_blocks()) {
            p->zero_grad();
        }
    }

    std::size_t parameter_count() const {
        std::size_t total = 0;
        for (const auto *p : param_blocks()) {
            total += p->size();
        }
        return total;
    }

    /// Circuit angles plus head weights/bias (the classifier sitting on top of
    /// the extractor features).
    std::size_t classifier_head_parameter_count() const {
        std::size_t total = head_w_.size() + head_b_.size();
        if (cfg_.use_quantum) {
            total += thetas_.size();
        }
        return total;
    }

    FeatureExtractor &extractor() { return extractor_; }
    const FeatureExtractor &extractor() const { return extractor_; }
    FeatureReducer &reducer() { return reducer_; }

    ParamBlock &thetas() { return thetas_; }
    ParamBlock &head_w() { return head_w_; }
    ParamBlock &head_b() { return head_b_; }

  private:
    ModelConfig cfg_;
    FeatureExtractor extractor_;
    FeatureReducer reducer_;
    ParamBlock thetas_;
    ParamBlock head_w_;
    ParamBlock head_b_;
};

/// Batch of reduced features for one dataset pass in inference mode.
inline Tensor images_to_batch(const std::vector<const ImageTensor *> &images) {
    if (images.empty()) {
        throw DataError("empty image batch");
    }
    const ImageTensor &first = *images[0];
    Tensor batch({images.size(), first.channels, first.height, first.width});
    const std::size_t sample_size = first.size();
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (images[i]->size() != sample_size) {
            throw DataError("inconsistent image dimensions in batch");
        }
        std::copy(images[i]->data.begin(), images[i]->data.end(),
                  batch.data.begin() + i * sample_size);
    }
    return batch;
}

} // namespace sdaqec
