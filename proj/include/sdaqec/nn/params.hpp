// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

namespace sdaqec {

/// Parameter classification; only `weight` enters the L2 penalty.
enum class ParamKind { weight, bias, norm, angle };

/// One named trainable array with its gradient accumulator.
struct ParamBlock {
    std::string name;
    ParamKind kind = ParamKind::weight;
    std::vector<std::size_t> shape;
    std::vector<double> value;
    std::vector<double> grad;

    ParamBlock() = default;

    ParamBlock(std::string n, ParamKind k, std::vector<std::size_t> s)
        : name(std::move(n)), kind(k), shape(std::move(s)) {
        std::size_t total = 1;
        for (std::size_t d : shape) {
            total *= d;
        }
        value.assign(total, 0.0);
        grad.assign(total, 0.0);
    }

    std::size_t size() const { return value.size(); }

    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

} // namespace sdaqec
