// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdaqec/core/error.hpp"

namespace sdaqec {

/// Counts for the positive class = label 1 (disease).
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
};

inline ConfusionMatrix confusion(const std::vector<int> &preds, const std::vector<int> &labels) {
    if (preds.size() != labels.size()) {
        throw std::invalid_argument("confusion: predictions and labels differ in length (" +
                                    std::to_string(preds.size()) + " vs " +
                                    std::to_string(labels.size()) + ")");
    }
    if (preds.empty()) {
        throw std::invalid_argument("confusion: empty input");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (labels[i] == 1) {
            preds[i] == 1 ? ++cm.tp : ++cm.fn;
        } else {
            preds[i] == 1 ? ++cm.fp : ++cm.tn;
        }
    }
    return cm;
}

/// The seven-metric panel. Ratios with a zero denominator report 0 with the
/// matching `*_defined` flag cleared, so report files stay loadable.
struct MetricSet {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double sensitivity = 0.0; // identical to recall by definition
    double specificity = 0.0;
    double f1 = 0.0;
    double auc = 0.0;
    bool precision_defined = true;
    bool recall_defined = true;
    bool specificity_defined = true;
    bool f1_defined = true;
    bool auc_defined = false; // filled in by the ROC path
};

inline MetricSet metrics_from_confusion(const ConfusionMatrix &cm) {
    if (cm.total() == 0) {
        throw std::invalid_argument("metrics_from_confusion: empty confusion matrix");
    }
    MetricSet m;
    const auto ratio = [](std::size_t num, std::size_t den, double &out, bool &defined) {
        if (den == 0) {
            out = 0.0;
            defined = false;
        } else {
            out = static_cast<double>(num) / static_cast<double>(den);
            defined = true;
        }
    };
    m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    ratio(cm.tp, cm.tp + cm.fp, m.precision, m.precision_defined);
    ratio(cm.tp, cm.tp + cm.fn, m.recall, m.recall_defined);
    ratio(cm.tp, cm.tp + cm.fn, m.sensitivity, m.recall_defined);
    ratio(cm.tn, cm.tn + cm.fp, m.specificity, m.specificity_defined);
    if (m.precision + m.recall > 0.0) {
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
        m.f1_defined = true;
    } else {
        m.f1 = 0.0;
        m.f1_defined = false;
    }
    return m;
}

/// (score - baseline) / baseline * 100.
inline double relative_improvement(double score, double baseline) {
    if (!(baseline > 0.0)) {
        throw std::invalid_argument("relative_improvement: baseline must be > 0");
    }
    return (score - baseline) / baseline * 100.0;
}

} // namespace sdaqec
