// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>

#include "sdaqec/core/image.hpp"
#include "sdaqec/core/rng.hpp"
#include "sdaqec/io/dataset.hpp"
#include "sdaqec/io/png_io.hpp"

namespace sdaqec {

/**
 * Synthetic two-class texture corpus for desk-scale experiments: oriented
 * sinusoidal gratings under pixel noise. The classes differ by grating
 * orientation (class 0 near-horizontal, class 1 oblique) while frequency,
 * phase, contrast, brightness and noise vary freely within a shared range,
 * so the labels are learnable but not trivially separable.
 */
inline ImageTensor texture_image(int label, std::size_t side, Rng &rng) {
    const double pi = 3.14159265358979323846;
    // overlapping orientation bands: samples in [12, 28] degrees are inherently
    // ambiguous, so the learned class prior decides them
    const double angle_deg = label == 0 ? rng.uniform(-15.0, 28.0) : rng.uniform(12.0, 60.0);
    const double angle = angle_deg * pi / 180.0;
    const double freq = rng.uniform(0.08, 0.22); // cycles per pixel
    const double phase = rng.uniform(0.0, 2.0 * pi);
    const double contrast = rng.uniform(0.20, 0.40);
    const double center = rng.uniform(0.35, 0.65);
    const double noise_sigma = rng.uniform(0.08, 0.16);

    const double kx = std::cos(angle) * 2.0 * pi * freq;
    const double ky = std::sin(angle) * 2.0 * pi * freq;

    ImageTensor img(3, side, side);
    for (std::size_t y = 0; y < side; ++y) {
        for (std::size_t x = 0; x < side; ++x) {
            const double wave = std::sin(kx * static_cast<double>(x) +
                                         ky * static_cast<double>(y) + phase);
            const double value = std::clamp(
                center + contrast * wave + noise_sigma * rng.normal(), 0.0, 1.0);
            for (std::size_t c = 0; c < 3; ++c) {
                img.at(c, y, x) = value;
            }
        }
    }
    return img;
}

/// In-memory corpus: n0 class-0 and n1 class-1 samples.
inline Dataset generate_texture_dataset(std::size_t n0, std::size_t n1, std::size_t side,
                                        std::uint64_t seed) {
    Dataset ds;
    std::size_t stream = 0;
    for (int label : {0, 1}) {
        const std::size_t n = label == 0 ? n0 : n1;
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng = Rng::substream(seed, stream++);
            LabeledSample s;
            s.image = texture_image(label, side, rng);
            s.label = label;
            s.origin = SampleOrigin::real;
            s.source_id = "tex_" + std::to_string(label) + "_" + std::to_string(i);
            ds.samples.push_back(std::move(s));
        }
    }
    ds.recount();
    return ds;
}

/// Write the corpus as `root/<label>/tex_NNNNN.png` (8-bit grayscale).
inline void write_texture_corpus(const std::string &root, std::size_t n0, std::size_t n1,
                                 std::size_t side, std::uint64_t seed) {
    namespace fs = std::filesystem;
    std::size_t stream = 0;
    for (int label : {0, 1}) {
        const fs::path dir = fs::path(root) / std::to_string(label);
        fs::create_directories(dir);
        const std::size_t n = label == 0 ? n0 : n1;
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng = Rng::substream(seed, stream++);
            const ImageTensor img = texture_image(label, side, rng);
            RawImage raw;
            raw.width = side;
            raw.height = side;
            raw.channels = 1;
            raw.pixels.resize(side * side);
            for (std::size_t p = 0; p < raw.pixels.size(); ++p) {
                raw.pixels[p] = static_cast<unsigned char>(std::lround(img.data[p] * 255.0));
            }
            char name[32];
            std::snprintf(name, sizeof(name), "tex_%05zu.png", i);
            write_png((dir / name).string(), raw);
        }
    }
}

} // namespace sdaqec
