// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdaqec/core/error.hpp"
#include "sdaqec/eval/bootstrap.hpp"
#include "sdaqec/eval/metrics.hpp"
#include "sdaqec/eval/roc.hpp"
#include "sdaqec/train/trainer.hpp"

namespace sdaqec {

/// Everything `eval` computes for one model on one test set.
struct EvalReport {
    std::string name;
    std::size_t n_test = 0;
    ConfusionMatrix confusion_matrix;
    MetricSet metrics;
    std::vector<RocPoint> roc;
    std::map<std::string, BootstrapResult> bootstrap; // keyed by metric name
    double fd_ext = -1.0;                             // < 0 when not applicable
};

/// Compute the full metric suite from scores/labels at threshold 0.5.
inline EvalReport evaluate_predictions(const std::vector<double> &scores,
                                       const std::vector<int> &labels, std::size_t n_bootstrap,
                                       std::uint64_t seed, const std::string &name = "model") {
    if (scores.size() != labels.size() || scores.empty()) {
        throw std::invalid_argument("evaluate_predictions: size mismatch");
    }
    EvalReport report;
    report.name = name;
    report.n_test = labels.size();

    std::vector<int> preds(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        preds[i] = scores[i] >= 0.5 ? 1 : 0;
    }
    report.confusion_matrix = confusion(preds, labels);
    report.metrics = metrics_from_confusion(report.confusion_matrix);
    report.roc = roc_curve(scores, labels);
    report.metrics.auc = auc(report.roc);
    report.metrics.auc_defined = true;

    const MetricSelector selectors[] = {MetricSelector::accuracy,    MetricSelector::precision,
                                        MetricSelector::recall,      MetricSelector::specificity,
                                        MetricSelector::f1,          MetricSelector::auc};
    std::uint64_t stream = 1;
    for (MetricSelector sel : selectors) {
        report.bootstrap[metric_name(sel)] =
            bootstrap_metric(scores, preds, labels, sel, n_bootstrap,
                             seed + 7919 * stream++);
    }
    return report;
}

inline nlohmann::json report_to_json(const EvalReport &report) {
    nlohmann::json j;
    j["name"] = report.name;
    j["n_test"] = report.n_test;
    j["confusion"] = {{"tp", report.confusion_matrix.tp},
                      {"fp", report.confusion_matrix.fp},
                      {"tn", report.confusion_matrix.tn},
                      {"fn", report.confusion_matrix.fn}};
    j["metrics"] = {{"accuracy", report.metrics.accuracy},
                    {"precision", report.metrics.precision},
                    {"recall", report.metrics.recall},
                    {"sensitivity", report.metrics.sensitivity},
                    {"specificity", report.metrics.specificity},
                    {"f1", report.metrics.f1},
                    {"auc", report.metrics.auc}};
    nlohmann::json undefined = nlohmann::json::array();
    if (!report.metrics.precision_defined) {
        undefined.push_back("precision");
    }
    if (!report.metrics.recall_defined) {
        undefined.push_back("recall");
    }
    if (!report.metrics.specificity_defined) {
        undefined.push_back("specificity");
    }
    if (!report.metrics.f1_defined) {
        undefined.push_back("f1");
    }
    j["undefined_metrics"] = undefined;
    for (const auto &[name, b] : report.bootstrap) {
        j["bootstrap"][name] = {{"n_resamples", b.n_resamples},
                                {"mean", b.mean},
                                {"std", b.stddev},
                                {"ci95", {b.ci_lo, b.ci_hi}},
                                {"skipped", b.skipped}};
    }
    if (report.fd_ext >= 0.0) {
        j["fd_ext"] = report.fd_ext;
    }
    return j;
}

namespace detail {

inline std::ofstream open_out(const std::string &path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write file: " + path);
    }
    return out;
}

inline std::string csv_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

inline void write_metrics_json(const std::string &path, const EvalReport &report) {
    auto out = detail::open_out(path);
    out << report_to_json(report).dump(2) << "\n";
}

inline void write_roc_csv(const std::string &path, const std::vector<RocPoint> &curve) {
    auto out = detail::open_out(path);
    out << "threshold,fpr,tpr\n";
    for (const auto &p : curve) {
        out << detail::csv_double(p.threshold) << ',' << detail::csv_double(p.fpr) << ','
            << detail::csv_double(p.tpr) << '\n';
    }
}

/// Raw bootstrap samples, one per line, for violin rendering downstream.
inline void write_bootstrap_csv(const std::string &path, const BootstrapResult &result) {
    auto out = detail::open_out(path);
    out << result.metric << "\n";
    for (double v : result.samples) {
        out << detail::csv_double(v) << '\n';
    }
}

inline void write_history_csv(const std::string &path, const TrainHistory &history) {
    auto out = detail::open_out(path);
    out << "epoch,train_loss,val_loss,val_accuracy\n";
    for (std::size_t e = 0; e < history.epochs.size(); ++e) {
        out << e << ',' << detail::csv_double(history.epochs[e].train_loss) << ','
            << detail::csv_double(history.epochs[e].val_loss) << ','
            << detail::csv_double(history.epochs[e].val_accuracy) << '\n';
    }
}

/// Minimal standalone SVG of the ROC curve with the chance diagonal.
inline void write_roc_svg(const std::string &path, const std::vector<RocPoint> &curve) {
    const int size = 400, margin = 40;
    const auto px = [&](double fpr) { return margin + fpr * (size - 2 * margin); };
    const auto py = [&](double tpr) { return size - margin - tpr * (size - 2 * margin); };

    auto out = detail::open_out(path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << size << "' height='" << size
        << "'>\n";
    out << "<rect width='" << size << "' height='" << size << "' fill='white'/>\n";
    out << "<line x1='" << px(0) << "' y1='" << py(0) << "' x2='" << px(1) << "' y2='" << py(1)
        << "' stroke='#999' stroke-dasharray='4'/>\n";
    out << "<polyline fill='none' stroke='#1f77b4' stroke-width='2' points='";
    for (const auto &p : curve) {
        out << px(p.fpr) << ',' << py(p.tpr) << ' ';
    }
    out << "'/>\n";
    out << "<rect x='" << margin << "' y='" << margin << "' width='" << size - 2 * margin
        << "' height='" << size - 2 * margin << "' fill='none' stroke='black'/>\n";
    out << "<text x='" << size / 2 << "' y='" << size - 8
        << "' text-anchor='middle' font-size='14'>false positive rate</text>\n";
    out << "<text x='12' y='" << size / 2
        << "' text-anchor='middle' font-size='14' transform='rotate(-90 12 " << size / 2
        << ")'>true positive rate</text>\n";
    out << "</svg>\n";
}

// ---------------------------------------------------------------------------
// Cross-run comparison (the `compare` subcommand).
// ---------------------------------------------------------------------------

struct ComparisonEntry {
    std::string name;
    std::map<std::string, double> metrics;
};

inline ComparisonEntry read_metrics_json(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open metrics file: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw DataError("metrics parse error in " + path + ": " + e.what());
    }
    ComparisonEntry entry;
    entry.name = j.contains("name") ? j.at("name").get<std::string>()
                                    : std::filesystem::path(path).stem().string();
    for (const auto &item : j.at("metrics").items()) {
        entry.metrics[item.key()] = item.value().get<double>();
    }
    return entry;
}

/// Raw model-by-metric value matrix.
inline void write_heatmap_csv(const std::string &path,
                              const std::vector<ComparisonEntry> &entries) {
    static const char *columns[] = {"accuracy", "precision", "recall",  "sensitivity",
                                    "specificity", "f1",     "auc"};
    auto out = detail::open_out(path);
    out << "model";
    for (const char *c : columns) {
        out << ',' << c;
    }
    out << '\n';
    for (const auto &entry : entries) {
        out << entry.name;
        for (const char *c : columns) {
            const auto it = entry.metrics.find(c);
            out << ',' << (it == entry.metrics.end() ? "" : detail::csv_double(it->second));
        }
        out << '\n';
    }
}

/// Relative improvement of every model over the baseline, in percent.
inline void write_improvement_csv(const std::string &path,
                                  const std::vector<ComparisonEntry> &entries,
                                  const ComparisonEntry &baseline) {
    static const char *columns[] = {"accuracy", "precision", "recall",  "sensitivity",
                                    "specificity", "f1",     "auc"};
    auto out = detail::open_out(path);
    out << "model";
    for (const char *c : columns) {
        out << ',' << c << "_improvement_pct";
    }
    out << '\n';
    for (const auto &entry : entries) {
        out << entry.name;
        for (const char *c : columns) {
            const auto it = entry.metrics.find(c);
            const auto base = baseline.metrics.find(c);
            if (it == entry.metrics.end() || base == baseline.metrics.end() ||
                !(base->second > 0.0)) {
                out << ',';
            } else {
                out << ',' << detail::csv_double(relative_improvement(it->second, base->second));
            }
        }
        out << '\n';
    }
}

} // namespace sdaqec
