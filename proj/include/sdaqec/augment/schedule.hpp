// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <cstddef>
#include <vector>

#include "sdaqec/core/error.hpp"

namespace sdaqec {

/**
 * Linear noise schedule for forward diffusion.
 *
 * `betas[s]` is the per-step noise intensity and `alpha_bars[t]` the running
 * product of (1 - beta) through step t inclusive, so even step 0 applies one
 * minimal noising step. betas are nondecreasing and alpha_bars strictly
 * decreasing within (0, 1).
 */
struct NoiseSchedule {
    std::size_t timesteps = 0;
    double beta_start = 0.0;
    double beta_end = 0.0;
    std::vector<double> betas;
    std::vector<double> alpha_bars;
};

/// Build the linear schedule beta[s] = beta_start + s/(T-1) * (beta_end - beta_start).
inline NoiseSchedule linear_beta_schedule(std::size_t timesteps, double beta_start,
                                          double beta_end) {
    if (timesteps < 1) {
        throw ConfigError("noise schedule needs at least one step");
    }
    if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0)) {
        throw ConfigError("noise schedule requires 0 < beta_start <= beta_end < 1");
    }
    NoiseSchedule sched;
    sched.timesteps = timesteps;
    sched.beta_start = beta_start;
    sched.beta_end = beta_end;
    sched.betas.resize(timesteps);
    sched.alpha_bars.resize(timesteps);
    double product = 1.0;
    for (std::size_t s = 0; s < timesteps; ++s) {
        const double frac =
            timesteps == 1 ? 0.0 : static_cast<double>(s) / static_cast<double>(timesteps - 1);
        sched.betas[s] = beta_start + frac * (beta_end - beta_start);
        product *= 1.0 - sched.betas[s];
        sched.alpha_bars[s] = product;
    }
    return sched;
}

} // namespace sdaqec
