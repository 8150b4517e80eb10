// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sdaqec/core/error.hpp"
#include "sdaqec/core/rng.hpp"
#include "sdaqec/eval/metrics.hpp"
#include "sdaqec/eval/roc.hpp"

namespace sdaqec {

enum class MetricSelector { accuracy, precision, recall, specificity, f1, auc };

inline const char *metric_name(MetricSelector m) {
    switch (m) {
    case MetricSelector::accuracy:
        return "accuracy";
    case MetricSelector::precision:
        return "precision";
    case MetricSelector::recall:
        return "recall";
    case MetricSelector::specificity:
        return "specificity";
    case MetricSelector::f1:
        return "f1";
    case MetricSelector::auc:
        return "auc";
    }
    return "unknown";
}

struct BootstrapResult {
    std::string metric;
    std::size_t n_resamples = 0;
    std::vector<double> samples;
    double mean = 0.0;
    double stddev = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t skipped = 0;
};

namespace detail {

/// Empirical percentile with linear interpolation between order statistics.
inline double percentile(std::vector<double> sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) {
        return sorted[0];
    }
    const double rank = p / 100.0 * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = std::min(lo + 1, n - 1);
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

} // namespace detail

/**
 * Percentile bootstrap of one metric: each iteration redraws the full test
 * set with replacement (unstratified). AUC iterations whose resample lacks a
 * class are skipped and counted. Deterministic for a fixed seed via
 * per-iteration RNG substreams.
 */
inline BootstrapResult bootstrap_metric(const std::vector<double> &scores,
                                        const std::vector<int> &preds,
                                        const std::vector<int> &labels, MetricSelector metric,
                                        std::size_t n_resamples, std::uint64_t seed) {
    if (n_resamples == 0) {
        throw ConfigError("bootstrap: n_resamples must be >= 1");
    }
    const std::size_t n = labels.size();
    if (n == 0 || preds.size() != n || (metric == MetricSelector::auc && scores.size() != n)) {
        throw std::invalid_argument("bootstrap: input size mismatch");
    }

    BootstrapResult out;
    out.metric = metric_name(metric);
    out.n_resamples = n_resamples;
    out.samples.reserve(n_resamples);

    std::vector<int> r_preds(n), r_labels(n);
    std::vector<double> r_scores(n);
    for (std::size_t iter = 0; iter < n_resamples; ++iter) {
        Rng rng = Rng::substream(seed, iter);
        bool has_pos = false, has_neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = rng.uniform_int(n);
            r_labels[i] = labels[j];
            r_preds[i] = preds[j];
            if (metric == MetricSelector::auc) {
                r_scores[i] = scores[j];
            }
            r_labels[i] == 1 ? has_pos = true : has_neg = true;
        }
        if (metric == MetricSelector::auc) {
            if (!has_pos || !has_neg) {
                ++out.skipped;
                continue;
            }
            out.samples.push_back(auc_from_scores(r_scores, r_labels));
            continue;
        }
        const MetricSet m = metrics_from_confusion(confusion(r_preds, r_labels));
        switch (metric) {
        case MetricSelector::accuracy:
            out.samples.push_back(m.accuracy);
            break;
        case MetricSelector::precision:
            out.samples.push_back(m.precision);
            break;
        case MetricSelector::recall:
            out.samples.push_back(m.recall);
            break;
        case MetricSelector::specificity:
            out.samples.push_back(m.specificity);
            break;
        case MetricSelector::f1:
            out.samples.push_back(m.f1);
            break;
        case MetricSelector::auc:
            break;
        }
    }
    if (out.samples.empty()) {
        throw DataError("bootstrap: every iteration was skipped");
    }

    double sum = 0.0;
    for (double v : out.samples) {
        sum += v;
    }
    out.mean = sum / static_cast<double>(out.samples.size());
    double var = 0.0;
    for (double v : out.samples) {
        var += (v - out.mean) * (v - out.mean);
    }
    out.stddev = out.samples.size() > 1
                     ? std::sqrt(var / static_cast<double>(out.samples.size() - 1))
                     : 0.0;

    std::vector<double> sorted = out.samples;
    std::sort(sorted.begin(), sorted.end());
    out.ci_lo = detail::percentile(sorted, 2.5);
    out.ci_hi = detail::percentile(std::move(sorted), 97.5);
    return out;
}

} // namespace sdaqec
