// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "sdaqec/nn/params.hpp"

namespace sdaqec {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias correction. State rows are keyed by position in the
/// parameter list, which must stay stable across steps.
class AdamOptimizer {
  public:
    explicit AdamOptimizer(const AdamConfig &cfg) : cfg_(cfg) {}

    void step(const std::vector<ParamBlock *> &params) {
        if (m_.empty()) {
            m_.resize(params.size());
            v_.resize(params.size());
            for (std::size_t i = 0; i < params.size(); ++i) {
                m_[i].assign(params[i]->size(), 0.0);
                v_[i].assign(params[i]->size(), 0.0);
            }
        }
        if (m_.size() != params.size()) {
            throw std::invalid_argument("adam: parameter list changed size");
        }
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            ParamBlock &p = *params[i];
            if (m_[i].size() != p.size()) {
                throw std::invalid_argument("adam: parameter block resized");
            }
            for (std::size_t j = 0; j < p.size(); ++j) {
                const double g = p.grad[j];
                m_[i][j] = cfg_.beta1 * m_[i][j] + (1.0 - cfg_.beta1) * g;
                v_[i][j] = cfg_.beta2 * v_[i][j] + (1.0 - cfg_.beta2) * g * g;
                const double m_hat = m_[i][j] / bc1;
                const double v_hat = v_[i][j] / bc2;
                p.value[j] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
            }
        }
    }

    std::size_t step_count() const { return t_; }

  private:
    AdamConfig cfg_;
    std::size_t t_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

} // namespace sdaqec
