// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdaqec/core/error.hpp"
#include "sdaqec/core/image.hpp"
#include "sdaqec/core/rng.hpp"
#include "sdaqec/io/png_io.hpp"

namespace sdaqec {

enum class SampleOrigin { real, synthetic };

/// One labeled image. `source_id` is the originating file for real samples and
/// the seed image's id for synthetic ones.
struct LabeledSample {
    ImageTensor image;
    int label = 0;
    SampleOrigin origin = SampleOrigin::real;
    std::string source_id;
};

struct Dataset {
    std::vector<LabeledSample> samples;
    std::map<int, std::size_t> class_counts;

    void recount() {
        class_counts.clear();
        for (const auto &s : samples) {
            ++class_counts[s.label];
        }
    }

    std::size_t count(int label) const {
        auto it = class_counts.find(label);
        return it == class_counts.end() ? 0 : it->second;
    }

    std::size_t size() const { return samples.size(); }
};

struct ClassDistribution {
    std::size_t n_major = 0;
    std::size_t n_minor = 0;
    int major_label = 0;
    int minor_label = 1;
    double ratio = 1.0; // n_major / n_minor, >= 1
};

/// Identify majority/minority classes and their count ratio.
inline ClassDistribution class_distribution(const Dataset &d) {
    const std::size_t n0 = d.count(0);
    const std::size_t n1 = d.count(1);
    if (n0 == 0 || n1 == 0) {
        throw DataError("class " + std::string(n0 == 0 ? "0" : "1") + " has no samples");
    }
    ClassDistribution dist;
    if (n1 > n0) {
        dist.major_label = 1;
        dist.minor_label = 0;
        dist.n_major = n1;
        dist.n_minor = n0;
    } else {
        dist.major_label = 0;
        dist.minor_label = 1;
        dist.n_major = n0;
        dist.n_minor = n1;
    }
    dist.ratio = static_cast<double>(dist.n_major) / static_cast<double>(dist.n_minor);
    return dist;
}

/// Count PNG files per class directory without decoding them.
inline std::map<int, std::size_t> scan_class_counts(const std::string &root) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) {
        throw ConfigError("dataset root is not a directory: " + root);
    }
    std::map<int, std::size_t> counts;
    for (const auto &entry : fs::directory_iterator(root)) {
        if (!entry.is_directory()) {
            continue;
        }
        const std::string name = entry.path().filename().string();
        if (name != "0" && name != "1") {
            throw ConfigError("unexpected class directory '" + name + "' (labels must be 0 or 1)");
        }
        const int label = name == "0" ? 0 : 1;
        std::size_t n = 0;
        for (const auto &file : fs::directory_iterator(entry.path())) {
            if (file.is_regular_file() && file.path().extension() == ".png") {
                ++n;
            }
        }
        counts[label] = n;
    }
    for (int label : {0, 1}) {
        if (counts.find(label) == counts.end() || counts[label] == 0) {
            throw ConfigError("class " + std::to_string(label) + " has no samples");
        }
    }
    return counts;
}

namespace detail {

inline ImageTensor decode_to_tensor(const std::string &path, std::size_t target_h,
                                    std::size_t target_w) {
    RawImage raw = read_png_gray(path);
    std::vector<double> gray(raw.width * raw.height);
    for (std::size_t i = 0; i < gray.size(); ++i) {
        gray[i] = raw.pixels[i] / 255.0;
    }
    std::vector<double> resized = resize_bilinear(gray, raw.height, raw.width, target_h, target_w);
    ImageTensor img(3, target_h, target_w);
    for (std::size_t c = 0; c < 3; ++c) {
        std::copy(resized.begin(), resized.end(), img.data.begin() + c * target_h * target_w);
    }
    clamp_unit(img);
    return img;
}

} // namespace detail

/**
 * Load a labeled corpus from PNG files under `root/<label>/`. Images are decoded,
 * converted to grayscale replicated over three channels, resized to
 * (target_h, target_w) and normalized to [0, 1]. File order is sorted by path
 * so repeated loads produce identical sample ordering.
 */
inline Dataset load_dataset(const std::string &root, std::size_t target_h, std::size_t target_w) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) {
        throw ConfigError("dataset root is not a directory: " + root);
    }
    for (const auto &entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) {
            const std::string name = entry.path().filename().string();
            if (name != "0" && name != "1") {
                throw ConfigError("unexpected class directory '" + name +
                                  "' (labels must be 0 or 1)");
            }
        }
    }
    Dataset ds;
    for (int label : {0, 1}) {
        const fs::path class_dir = fs::path(root) / std::to_string(label);
        if (!fs::is_directory(class_dir)) {
            throw ConfigError("missing class directory: " + class_dir.string());
        }
        std::vector<std::string> files;
        for (const auto &entry : fs::directory_iterator(class_dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".png") {
                files.push_back(entry.path().string());
            }
        }
        if (files.empty()) {
            throw ConfigError("class " + std::to_string(label) + " has no samples");
        }
        std::sort(files.begin(), files.end());
        for (const auto &file : files) {
            LabeledSample s;
            s.image = detail::decode_to_tensor(file, target_h, target_w);
            s.label = label;
            s.origin = SampleOrigin::real;
            s.source_id = file;
            ds.samples.push_back(std::move(s));
        }
    }
    ds.recount();
    return ds;
}

/**
 * Deterministic stratified split. Per-class allocation uses the largest
 * remainder method, so every partition's class count is within one sample of
 * the exact proportion. Partitions are disjoint and exhaustive.
 */
inline std::array<Dataset, 3> stratified_split(const Dataset &d,
                                               const std::array<double, 3> &fractions,
                                               std::uint64_t seed) {
    double sum = 0.0;
    for (double f : fractions) {
        if (f <= 0.0) {
            throw ConfigError("split fractions must be positive");
        }
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("fractions must sum to 1");
    }

    std::array<Dataset, 3> parts;
    for (int label : {0, 1}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < d.samples.size(); ++i) {
            if (d.samples[i].label == label) {
                idx.push_back(i);
            }
        }
        const std::size_t n = idx.size();
        if (n == 0) {
            throw DataError("class " + std::to_string(label) + " has no samples");
        }
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(label) + 101);
        for (std::size_t i = n; i > 1; --i) {
            std::swap(idx[i - 1], idx[rng.uniform_int(i)]);
        }

        // Largest remainder allocation of n samples over the three parts.
        std::array<std::size_t, 3> alloc{};
        std::array<double, 3> remainder{};
        std::size_t assigned = 0;
        for (std::size_t p = 0; p < 3; ++p) {
            const double exact = fractions[p] * static_cast<double>(n);
            alloc[p] = static_cast<std::size_t>(std::floor(exact));
            remainder[p] = exact - static_cast<double>(alloc[p]);
            assigned += alloc[p];
        }
        while (assigned < n) {
            std::size_t best = 0;
            for (std::size_t p = 1; p < 3; ++p) {
                if (remainder[p] > remainder[best]) {
                    best = p;
                }
            }
            ++alloc[best];
            remainder[best] = -1.0;
            ++assigned;
        }
        for (std::size_t p = 0; p < 3; ++p) {
            if (alloc[p] == 0) {
                throw ConfigError("split part " + std::to_string(p) + " receives no samples of class " +
                                  std::to_string(label));
            }
        }

        std::size_t cursor = 0;
        for (std::size_t p = 0; p < 3; ++p) {
            for (std::size_t k = 0; k < alloc[p]; ++k) {
                parts[p].samples.push_back(d.samples[idx[cursor++]]);
            }
        }
    }
    for (auto &part : parts) {
        part.recount();
    }
    return parts;
}

} // namespace sdaqec
