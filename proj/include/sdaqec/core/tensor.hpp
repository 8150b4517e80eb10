// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdaqec {

/// Dense row-major tensor of doubles. Shape conventions used by the network
/// code: activations are [N, C, H, W], pooled features [N, D].
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> dims)
        : shape(std::move(dims)), data(numel_of(shape), 0.0) {}

    Tensor(std::vector<std::size_t> dims, std::vector<double> values)
        : shape(std::move(dims)), data(std::move(values)) {
        if (data.size() != numel_of(shape)) {
            throw std::invalid_argument("tensor data length does not match shape");
        }
    }

    static std::size_t numel_of(const std::vector<std::size_t> &dims) {
        std::size_t n = 1;
        for (std::size_t d : dims) {
            n *= d;
        }
        return n;
    }

    std::size_t numel() const { return data.size(); }

    std::size_t dim(std::size_t i) const { return shape.at(i); }

    double &operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }

    bool all_finite() const {
        for (double v : data) {
            if (!std::isfinite(v)) {
                return false;
            }
        }
        return true;
    }
};

inline std::string shape_string(const std::vector<std::size_t> &dims) {
    std::string s = "(";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        s += std::to_string(dims[i]);
        if (i + 1 < dims.size()) {
            s += ", ";
        }
    }
    return s + ")";
}

inline void require_shape(const Tensor &t, const std::vector<std::size_t> &expected,
                          const char *what) {
    if (t.shape != expected) {
        throw std::invalid_argument(std::string(what) + ": expected shape " +
                                    shape_string(expected) + ", got " + shape_string(t.shape));
    }
}

} // namespace sdaqec
