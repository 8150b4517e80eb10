// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sdaqec/augment/schedule.hpp"
#include "sdaqec/core/error.hpp"
#include "sdaqec/core/image.hpp"
#include "sdaqec/core/rng.hpp"
#include "sdaqec/io/dataset.hpp"

namespace sdaqec {

/// Settings for minority-class synthesis.
struct AugmentConfig {
    double balance_target = 0.7; // desired minority/majority fraction, in (0, 1]
    double blur_sigma = 0.5;
    double brightness_lo = 0.9;
    double brightness_hi = 1.1;
    NoiseSchedule schedule = linear_beta_schedule(5, 1e-4, 0.02);
    std::uint64_t seed = 0;

    void validate() const {
        if (!(balance_target > 0.0) || balance_target > 1.0) {
            throw ConfigError("balance_target must be in (0, 1]");
        }
        if (blur_sigma < 0.0) {
            throw ConfigError("blur_sigma must be >= 0");
        }
        if (!(brightness_lo > 0.0) || brightness_lo > brightness_hi) {
            throw ConfigError("brightness range requires 0 < lo <= hi");
        }
    }
};

/// Per-synthetic provenance written to the augmentation manifest.
struct SynthesisRecord {
    std::string source_id;
    std::size_t timestep = 0;
    double gamma = 1.0;
};

/// Core of the forward noising step: x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps.
/// Noise is supplied explicitly; clamping to [0, 1] is optional so moment
/// statistics can be measured on the raw values.
inline ImageTensor diffuse_with_noise(const ImageTensor &x0, std::size_t t,
                                      const NoiseSchedule &sched, const std::vector<double> &eps,
                                      bool clamp) {
    if (t >= sched.timesteps) {
        throw ConfigError("diffusion step " + std::to_string(t) + " out of range [0, " +
                          std::to_string(sched.timesteps) + ")");
    }
    if (eps.size() != x0.data.size()) {
        throw ConfigError("noise buffer size does not match image");
    }
    const double abar = sched.alpha_bars[t];
    const double signal = std::sqrt(abar);
    const double noise = std::sqrt(1.0 - abar);
    ImageTensor out = x0;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = signal * x0.data[i] + noise * eps[i];
    }
    if (clamp) {
        clamp_unit(out);
    }
    return out;
}

namespace detail {

inline std::vector<double> draw_noise(std::size_t n, Rng &rng) {
    std::vector<double> eps(n);
    for (double &e : eps) {
        e = rng.normal();
    }
    return eps;
}

} // namespace detail

/// Forward-diffuse with i.i.d. standard normal noise, clamped to [0, 1].
inline ImageTensor forward_diffuse(const ImageTensor &x0, std::size_t t,
                                   const NoiseSchedule &sched, Rng &rng) {
    return diffuse_with_noise(x0, t, sched, detail::draw_noise(x0.data.size(), rng), true);
}

/// Same draw as `forward_diffuse` but without the [0, 1] clamp.
inline ImageTensor forward_diffuse_unclamped(const ImageTensor &x0, std::size_t t,
                                             const NoiseSchedule &sched, Rng &rng) {
    return diffuse_with_noise(x0, t, sched, detail::draw_noise(x0.data.size(), rng), false);
}

/// Number of synthetics needed: M = max(0, ceil(target * n_maj) - n_min).
inline std::size_t synthesis_count(std::size_t n_maj, std::size_t n_min, double balance_target) {
    if (n_min > n_maj) {
        throw ConfigError("synthesis_count requires n_maj >= n_min");
    }
    if (!(balance_target > 0.0) || balance_target > 1.0) {
        throw ConfigError("balance_target must be in (0, 1]");
    }
    const double exact = balance_target * static_cast<double>(n_maj);
    const double snapped = std::round(exact);
    // Guard the ceil against float noise when target * n_maj is an integer.
    const double target_count =
        std::abs(exact - snapped) < 1e-9 ? snapped : std::ceil(exact);
    const auto goal = static_cast<std::size_t>(target_count);
    return goal > n_min ? goal - n_min : 0;
}

/// Gaussian blur with a truncated kernel (half-width ceil(3*sigma)), applied
/// separably per channel. Kernel weights are renormalized at image borders.
inline ImageTensor gaussian_blur(const ImageTensor &x, double sigma) {
    if (sigma <= 0.0) {
        return x;
    }
    const auto half = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * half + 1);
    for (std::ptrdiff_t i = -half; i <= half; ++i) {
        kernel[i + half] = std::exp(-0.5 * (static_cast<double>(i) * i) / (sigma * sigma));
    }

    const auto h = static_cast<std::ptrdiff_t>(x.height);
    const auto w = static_cast<std::ptrdiff_t>(x.width);
    ImageTensor tmp = x;
    ImageTensor out = x;
    for (std::size_t c = 0; c < x.channels; ++c) {
        // horizontal pass
        for (std::ptrdiff_t y = 0; y < h; ++y) {
            for (std::ptrdiff_t xx = 0; xx < w; ++xx) {
                double acc = 0.0, wsum = 0.0;
                for (std::ptrdiff_t k = -half; k <= half; ++k) {
                    const std::ptrdiff_t sx = xx + k;
                    if (sx < 0 || sx >= w) {
                        continue;
                    }
                    acc += kernel[k + half] * x.at(c, y, sx);
                    wsum += kernel[k + half];
                }
                tmp.at(c, y, xx) = acc / wsum;
            }
        }
        // vertical pass
        for (std::ptrdiff_t y = 0; y < h; ++y) {
            for (std::ptrdiff_t xx = 0; xx < w; ++xx) {
                double acc = 0.0, wsum = 0.0;
                for (std::ptrdiff_t k = -half; k <= half; ++k) {
                    const std::ptrdiff_t sy = y + k;
                    if (sy < 0 || sy >= h) {
                        continue;
                    }
                    acc += kernel[k + half] * tmp.at(c, sy, xx);
                    wsum += kernel[k + half];
                }
                out.at(c, y, xx) = acc / wsum;
            }
        }
    }
    return out;
}

/// Deterministic core of post-processing: blur, scale by gamma, clamp.
inline ImageTensor post_process_with(const ImageTensor &x, double sigma, double gamma) {
    ImageTensor out = gaussian_blur(x, sigma);
    for (double &v : out.data) {
        v *= gamma;
    }
    clamp_unit(out);
    return out;
}

/// Post-process a synthetic: Gaussian blur then brightness factor
/// gamma ~ Uniform(lo, hi), clamped back to [0, 1].
inline ImageTensor post_process(const ImageTensor &x, const AugmentConfig &cfg, Rng &rng,
                                double *gamma_out = nullptr) {
    const double gamma = rng.uniform(cfg.brightness_lo, cfg.brightness_hi);
    if (gamma_out) {
        *gamma_out = gamma;
    }
    return post_process_with(x, cfg.blur_sigma, gamma);
}

/**
 * Synthesize minority-class samples until the minority count reaches
 * ceil(balance_target * n_major). Each synthetic picks a uniformly random
 * minority source and timestep, applies the forward noising step and the
 * post-processing chain. Real samples are never modified; synthetics are
 * appended in synthesis order with per-index RNG substreams, so the result is
 * deterministic for a fixed seed.
 */
inline Dataset augment_minority(const Dataset &train, const AugmentConfig &cfg,
                                std::vector<SynthesisRecord> *manifest = nullptr) {
    cfg.validate();
    const ClassDistribution dist = class_distribution(train);
    const std::size_t m = synthesis_count(dist.n_major, dist.n_minor, cfg.balance_target);

    std::vector<std::size_t> minority_idx;
    for (std::size_t i = 0; i < train.samples.size(); ++i) {
        if (train.samples[i].label == dist.minor_label) {
            minority_idx.push_back(i);
        }
    }

    Dataset out = train;
    if (manifest) {
        manifest->clear();
    }
    for (std::size_t j = 0; j < m; ++j) {
        Rng rng = Rng::substream(cfg.seed, j);
        const std::size_t src = minority_idx[rng.uniform_int(minority_idx.size())];
        const std::size_t t = rng.uniform_int(cfg.schedule.timesteps);
        const LabeledSample &source = train.samples[src];

        LabeledSample synth;
        double gamma = 1.0;
        synth.image = post_process(forward_diffuse(source.image, t, cfg.schedule, rng), cfg, rng,
                                   &gamma);
        synth.label = dist.minor_label;
        synth.origin = SampleOrigin::synthetic;
        synth.source_id = source.source_id;
        out.samples.push_back(std::move(synth));
        if (manifest) {
            manifest->push_back({source.source_id, t, gamma});
        }
    }
    out.recount();
    return out;
}

} // namespace sdaqec
