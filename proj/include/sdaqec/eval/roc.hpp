// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sdaqec/core/error.hpp"

namespace sdaqec {

struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

/**
 * ROC curve by descending score threshold. All samples sharing a score move
 * together, so the curve is the step-with-diagonal form whose trapezoidal
 * area equals the Mann-Whitney statistic with half credit for ties. The
 * curve starts at (0,0) with an above-maximum threshold and ends at (1,1).
 */
inline std::vector<RocPoint> roc_curve(const std::vector<double> &scores,
                                       const std::vector<int> &labels) {
    if (scores.size() != labels.size() || scores.empty()) {
        throw std::invalid_argument("roc_curve: scores and labels must be nonempty and equal");
    }
    std::size_t n_pos = 0, n_neg = 0;
    for (int label : labels) {
        label == 1 ? ++n_pos : ++n_neg;
    }
    if (n_pos == 0 || n_neg == 0) {
        throw DataError("roc_curve: both classes must be present");
    }

    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(),
              [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<RocPoint> curve;
    curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});

    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double threshold = scores[order[i]];
        while (i < order.size() && scores[order[i]] == threshold) {
            labels[order[i]] == 1 ? ++tp : ++fp;
            ++i;
        }
        curve.push_back({threshold, static_cast<double>(fp) / static_cast<double>(n_neg),
                         static_cast<double>(tp) / static_cast<double>(n_pos)});
    }
    return curve;
}

/// Trapezoidal area under an ROC curve.
inline double auc(const std::vector<RocPoint> &curve) {
    if (curve.size() < 2) {
        throw std::invalid_argument("auc: curve needs at least two points");
    }
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) * 0.5;
    }
    return area;
}

inline double auc_from_scores(const std::vector<double> &scores, const std::vector<int> &labels) {
    return auc(roc_curve(scores, labels));
}

} // namespace sdaqec
