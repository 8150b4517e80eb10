// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "sdaqec/core/error.hpp"
#include "sdaqec/core/tensor.hpp"
#include "sdaqec/model/classifier.hpp"
#include "sdaqec/quantum/layer.hpp"

namespace sdaqec {

struct BatchLoss {
    double value = 0.0; // mean cross-entropy over the batch
    Tensor d_logits;    // [N, 2], already scaled by 1/N
};

/**
 * Mean cross-entropy for two-class logits. Probabilities come from the
 * max-subtracted softmax and are clamped to [1e-7, 1 - 1e-7] before the log,
 * so a perfect prediction reports a small positive loss instead of -0.
 */
inline BatchLoss cross_entropy_loss(const Tensor &logits, const std::vector<int> &labels) {
    if (logits.shape.size() != 2 || logits.dim(1) != 2 || logits.dim(0) != labels.size() ||
        labels.empty()) {
        throw std::invalid_argument("cross_entropy_loss: logits [N,2] and N labels required");
    }
    const std::size_t n = labels.size();
    const double inv_n = 1.0 / static_cast<double>(n);

    BatchLoss out;
    out.d_logits = Tensor({n, 2});
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int y = labels[i];
        if (y != 0 && y != 1) {
            throw DataError("labels must be 0 or 1");
        }
        const std::array<double, 2> z{logits.data[i * 2], logits.data[i * 2 + 1]};
        const std::array<double, 2> p = softmax2(z);
        const double p_true = std::clamp(p[static_cast<std::size_t>(y)], 1e-7, 1.0 - 1e-7);
        total += -std::log(p_true);
        out.d_logits.data[i * 2] = (p[0] - (y == 0 ? 1.0 : 0.0)) * inv_n;
        out.d_logits.data[i * 2 + 1] = (p[1] - (y == 1 ? 1.0 : 0.0)) * inv_n;
    }
    out.value = total * inv_n;
    if (!std::isfinite(out.value)) {
        throw TrainingDiverged("non-finite cross-entropy loss");
    }
    return out;
}

/// L2 penalty lambda * sum(w^2) over weight-kind parameters only (biases,
/// batch-norm affine terms and circuit angles are exempt). Adds the 2*lambda*w
/// gradient term in place and returns the penalty value.
inline double apply_l2_regularization(HybridClassifier &model, double lambda) {
    if (lambda == 0.0) {
        return 0.0;
    }
    double penalty = 0.0;
    for (ParamBlock *p : model.param_blocks()) {
        if (p->kind != ParamKind::weight) {
            continue;
        }
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            penalty += p->value[i] * p->value[i];
            p->grad[i] += 2.0 * lambda * p->value[i];
        }
    }
    return lambda * penalty;
}

/// Penalty value alone (no gradient side effect), for loss reporting.
inline double l2_penalty(const HybridClassifier &model, double lambda) {
    if (lambda == 0.0) {
        return 0.0;
    }
    double penalty = 0.0;
    for (const ParamBlock *p : model.param_blocks()) {
        if (p->kind != ParamKind::weight) {
            continue;
        }
        for (double v : p->value) {
            penalty += v * v;
        }
    }
    return lambda * penalty;
}

} // namespace sdaqec
