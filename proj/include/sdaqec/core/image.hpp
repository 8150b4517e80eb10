// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace sdaqec {

/// Normalized raster sample. Channel-major (C, H, W) layout, values in [0, 1].
struct ImageTensor {
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> data;

    ImageTensor() = default;

    ImageTensor(std::size_t c, std::size_t h, std::size_t w, double value = 0.0)
        : channels(c), height(h), width(w), data(c * h * w, value) {
        if (c == 0 || h == 0 || w == 0) {
            throw std::invalid_argument("image dimensions must be positive");
        }
    }

    std::size_t size() const { return data.size(); }

    double &at(std::size_t c, std::size_t y, std::size_t x) {
        return data[(c * height + y) * width + x];
    }
    double at(std::size_t c, std::size_t y, std::size_t x) const {
        return data[(c * height + y) * width + x];
    }

    bool values_in_unit_range(double tol = 0.0) const {
        for (double v : data) {
            if (!(v >= -tol && v <= 1.0 + tol)) {
                return false;
            }
        }
        return true;
    }
};

inline void clamp_unit(ImageTensor &img) {
    for (double &v : img.data) {
        v = std::clamp(v, 0.0, 1.0);
    }
}

/// Bilinear resample of a single-channel raster.
inline std::vector<double> resize_bilinear(const std::vector<double> &src, std::size_t src_h,
                                           std::size_t src_w, std::size_t dst_h,
                                           std::size_t dst_w) {
    std::vector<double> dst(dst_h * dst_w);
    if (src_h == dst_h && src_w == dst_w) {
        dst = src;
        return dst;
    }
    const double sy = dst_h > 1 ? static_cast<double>(src_h - 1) / (dst_h - 1) : 0.0;
    const double sx = dst_w > 1 ? static_cast<double>(src_w - 1) / (dst_w - 1) : 0.0;
    for (std::size_t y = 0; y < dst_h; ++y) {
        const double fy = y * sy;
        const std::size_t y0 = static_cast<std::size_t>(fy);
        const std::size_t y1 = std::min(y0 + 1, src_h - 1);
        const double wy = fy - y0;
        for (std::size_t x = 0; x < dst_w; ++x) {
            const double fx = x * sx;
            const std::size_t x0 = static_cast<std::size_t>(fx);
            const std::size_t x1 = std::min(x0 + 1, src_w - 1);
            const double wx = fx - x0;
            const double top = src[y0 * src_w + x0] * (1.0 - wx) + src[y0 * src_w + x1] * wx;
            const double bot = src[y1 * src_w + x0] * (1.0 - wx) + src[y1 * src_w + x1] * wx;
            dst[y * dst_w + x] = top * (1.0 - wy) + bot * wy;
        }
    }
    return dst;
}

} // namespace sdaqec
