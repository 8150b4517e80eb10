// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdaqec/core/tensor.hpp"

namespace sdaqec::nn {

inline std::size_t conv_output_extent(std::size_t in, std::size_t k, std::size_t stride,
                                      std::size_t pad) {
    const std::size_t padded = in + 2 * pad;
    if (padded < k) {
        throw std::invalid_argument("conv: kernel larger than padded input (" +
                                    std::to_string(k) + " > " + std::to_string(padded) + ")");
    }
    return (padded - k) / stride + 1;
}

// ---------------------------------------------------------------------------
// Standard convolution (cross-correlation). x: [N,Cin,H,W], w: [Cout,Cin,k,k].
// ---------------------------------------------------------------------------

inline Tensor conv2d_forward(const Tensor &x, const Tensor &w, std::size_t stride,
                             std::size_t pad) {
    if (x.shape.size() != 4 || w.shape.size() != 4) {
        throw std::invalid_argument("conv2d: expected x [N,C,H,W] and w [O,C,k,k], got x " +
                                    shape_string(x.shape) + ", w " + shape_string(w.shape));
    }
    const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const std::size_t cout = w.dim(0), k = w.dim(2);
    if (w.dim(1) != cin || w.dim(2) != w.dim(3)) {
        throw std::invalid_argument("conv2d: weight shape " + shape_string(w.shape) +
                                    " does not match input channels " + std::to_string(cin));
    }
    const std::size_t ho = conv_output_extent(h, k, stride, pad);
    const std::size_t wo = conv_output_extent(wd, k, stride, pad);

    Tensor y({n, cout, ho, wo});
    for (std::size_t in = 0; in < n; ++in) {
        for (std::size_t co = 0; co < cout; ++co) {
            double *yp = &y.data[((in * cout + co) * ho) * wo];
            for (std::size_t ci = 0; ci < cin; ++ci) {
                const double *xp = &x.data[((in * cin + ci) * h) * wd];
                const double *wp = &w.data[((co * cin + ci) * k) * k];
                for (std::size_t ky = 0; ky < k; ++ky) {
                    for (std::size_t kx = 0; kx < k; ++kx) {
                        const double wv = wp[ky * k + kx];
                        if (wv == 0.0) {
                            continue;
                        }
                        for (std::size_t oy = 0; oy < ho; ++oy) {
                            const std::ptrdiff_t iy =
                                static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                static_cast<std::ptrdiff_t>(pad);
                            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) {
                                continue;
                            }
                            const double *xrow = xp + iy * static_cast<std::ptrdiff_t>(wd);
                            double *yrow = yp + oy * wo;
                            for (std::size_t ox = 0; ox < wo; ++ox) {
                                const std::ptrdiff_t ix =
                                    static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                    static_cast<std::ptrdiff_t>(pad);
                                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(wd)) {
                                    continue;
                                }
                                yrow[ox] += wv * xrow[ix];
                            }
                        }
                    }
                }
            }
        }
    }
    return y;
}

inline void conv2d_backward(const Tensor &x, const Tensor &w, const Tensor &gy,
                            std::size_t stride, std::size_t pad, Tensor &gx,
                            std::vector<double> &gw) {
    const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const std::size_t cout = w.dim(0), k = w.dim(2);
    const std::size_t ho = gy.dim(2), wo = gy.dim(3);

    gx = Tensor(x.shape);
    if (gw.size() != w.numel()) {
        gw.assign(w.numel(), 0.0);
    }
    for (std::size_t in = 0; in < n; ++in) {
        for (std::size_t co = 0; co < cout; ++co) {
            const double *gyp = &gy.data[((in * cout + co) * ho) * wo];
            for (std::size_t ci = 0; ci < cin; ++ci) {
                const double *xp = &x.data[((in * cin + ci) * h) * wd];
                double *gxp = &gx.data[((in * cin + ci) * h) * wd];
                const double *wp = &w.data[((co * cin + ci) * k) * k];
                double *gwp = &gw[((co * cin + ci) * k) * k];
                for (std::size_t ky = 0; ky < k; ++ky) {
                    for (std::size_t kx = 0; kx < k; ++kx) {
                        const double wv = wp[ky * k + kx];
                        double gw_acc = 0.0;
                        for (std::size_t oy = 0; oy < ho; ++oy) {
                            const std::ptrdiff_t iy =
                                static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                static_cast<std::ptrdiff_t>(pad);
                            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) {
                                continue;
                            }
                            const double *xrow = xp + iy * static_cast<std::ptrdiff_t>(wd);
                            double *gxrow = gxp + iy * static_cast<std::ptrdiff_t>(wd);
                            const double *gyrow = gyp + oy * wo;
                            for (std::size_t ox = 0; ox < wo; ++ox) {
                                const std::ptrdiff_t ix =
                                    static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                    static_cast<std::ptrdiff_t>(pad);
                                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(wd)) {
                                    continue;
                                }
                                gw_acc += xrow[ix] * gyrow[ox];
                                gxrow[ix] += wv * gyrow[ox];
                            }
                        }
                        gwp[ky * k + kx] += gw_acc;
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Depthwise convolution: one k x k kernel per channel. w: [C,k,k].
// ---------------------------------------------------------------------------

inline Tensor depthwise_conv2d_forward(const Tensor &x, const Tensor &w, std::size_t stride,
                                       std::size_t pad) {
    if (x.shape.size() != 4 || w.shape.size() != 3 || w.dim(0) != x.dim(1) ||
        w.dim(1) != w.dim(2)) {
        throw std::invalid_argument("depthwise_conv2d: expected x [N,C,H,W] and w [C,k,k], got x " +
                                    shape_string(x.shape) + ", w " + shape_string(w.shape));
    }
    const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const std::size_t k = w.dim(1);
    const std::size_t ho = conv_output_extent(h, k, stride, pad);
    const std::size_t wo = conv_output_extent(wd, k, stride, pad);

    Tensor y({n, c, ho, wo});
    for (std::size_t in = 0; in < n; ++in) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            const double *xp = &x.data[((in * c + ch) * h) * wd];
            double *yp = &y.data[((in * c + ch) * ho) * wo];
            const double *wp = &w.data[ch * k * k];
            for (std::size_t ky = 0; ky < k; ++ky) {
                for (std::size_t kx = 0; kx < k; ++kx) {
                    const double wv = wp[ky * k + kx];
                    for (std::size_t oy = 0; oy < ho; ++oy) {
                        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                                  static_cast<std::ptrdiff_t>(pad);
                        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) {
                            continue;
                        }
                        const double *xrow = xp + iy * static_cast<std::ptrdiff_t>(wd);
                        double *yrow = yp + oy * wo;
                        for (std::size_t ox = 0; ox < wo; ++ox) {
                            const std::ptrdiff_t ix =
                                static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                static_cast<std::ptrdiff_t>(pad);
                            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(wd)) {
                                continue;
                            }
                            yrow[ox] += wv * xrow[ix];
                        }
                    }
                }
            }
        }
    }
    return y;
}

inline void depthwise_conv2d_backward(const Tensor &x, const Tensor &w, const Tensor &gy,
                                      std::size_t stride, std::size_t pad, Tensor &gx,
                                      std::vector<double> &gw) {
    const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const std::size_t k = w.dim(1);
    const std::size_t ho = gy.dim(2), wo = gy.dim(3);

    gx = Tensor(x.shape);
    if (gw.size() != w.numel()) {
        gw.assign(w.numel(), 0.0);
    }
    for (std::size_t in = 0; in < n; ++in) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            const double *xp = &x.data[((in * c + ch) * h) * wd];
            double *gxp = &gx.data[((in * c + ch) * h) * wd];
            const double *gyp = &gy.data[((in * c + ch) * ho) * wo];
            const double *wp = &w.data[ch * k * k];
            double *gwp = &gw[ch * k * k];
            for (std::size_t ky = 0; ky < k; ++ky) {
                for (std::size_t kx = 0; kx < k; ++kx) {
                    const double wv = wp[ky * k + kx];
                    double gw_acc = 0.0;
                    for (std::size_t oy = 0; oy < ho; ++oy) {
                        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                                  static_cast<std::ptrdiff_t>(pad);
                        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) {
                            continue;
                        }
                        const double *xrow = xp + iy * static_cast<std::ptrdiff_t>(wd);
                        double *gxrow = gxp + iy * static_cast<std::ptrdiff_t>(wd);
                        const double *gyrow = gyp + oy * wo;
                        for (std::size_t ox = 0; ox < wo; ++ox) {
                            const std::ptrdiff_t ix =
                                static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                static_cast<std::ptrdiff_t>(pad);
                            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(wd)) {
                                continue;
                            }
                            gw_acc += xrow[ix] * gyrow[ox];
                            gxrow[ix] += wv * gyrow[ox];
                        }
                    }
                    gwp[ky * k + kx] += gw_acc;
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Pointwise (1x1) convolution: channel mixing. w: [Cout,Cin].
// ---------------------------------------------------------------------------

inline Tensor pointwise_conv2d_forward(const Tensor &x, const Tensor &w) {
    if (x.shape.size() != 4 || w.shape.size() != 2 || w.dim(1) != x.dim(1)) {
        throw std::invalid_argument("pointwise_conv2d: expected x [N,C,H,W] and w [O,C], got x " +
                                    shape_string(x.shape) + ", w " + shape_string(w.shape));
    }
    const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const std::size_t cout = w.dim(0);
    const std::size_t hw = h * wd;

    Tensor y({n, cout, h, wd});
    for (std::size_t in = 0; in < n; ++in) {
        for (std::size_t co = 0; co < cout; ++co) {
            double *yp = &y.data[(in * cout + co) * hw];
            const double *wrow = &w.data[co * cin];
            for (std::size_t ci = 0; ci < cin; ++ci) {
                const double wv = wrow[ci];
                if (wv == 0.0) {
                    continue;
                }
                const double *xp = &x.data[(in * cin + ci) * hw];
                for (std::size_t i = 0; i < hw; ++i) {
                    yp[i] += wv * xp[i];
                }
            }
        }
    }
    return y;
}

inline void pointwise_conv2d_backward(const Tensor &x, const Tensor &w, const Tensor &gy,
                                      Tensor &gx, std::vector<double> &gw) {
    const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const std::size_t cout = w.dim(0);
    const std::size_t hw = h * wd;

    gx = Tensor(x.shape);
    if (gw.size() != w.numel()) {
        gw.assign(w.numel(), 0.0);
    }
    for (std::size_t in = 0; in < n; ++in) {
        for (std::size_t co = 0; co < cout; ++co) {
            const double *gyp = &gy.data[(in * cout + co) * hw];
            const double *wrow = &w.data[co * cin];
            double *gwrow = &gw[co * cin];
            for (std::size_t ci = 0; ci < cin; ++ci) {
                const double *xp = &x.data[(in * cin + ci) * hw];
                double *gxp = &gx.data[(in * cin + ci) * hw];
                const double wv = wrow[ci];
                double acc = 0.0;
                for (std::size_t i = 0; i < hw; ++i) {
                    acc += xp[i] * gyp[i];
                    gxp[i] += wv * gyp[i];
                }
                gwrow[ci] += acc;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// ReLU. Subgradient at 0 is 0.
// ---------------------------------------------------------------------------

inline Tensor relu_forward(const Tensor &x) {
    Tensor y = x;
    for (double &v : y.data) {
        v = v > 0.0 ? v : 0.0;
    }
    return y;
}

inline Tensor relu_backward(const Tensor &x, const Tensor &gy) {
    Tensor gx = gy;
    for (std::size_t i = 0; i < gx.data.size(); ++i) {
        if (x.data[i] <= 0.0) {
            gx.data[i] = 0.0;
        }
    }
    return gx;
}

// ---------------------------------------------------------------------------
// Global average pooling: [N,C,H,W] -> [N,C]. No parameters.
// ---------------------------------------------------------------------------

inline Tensor global_average_pool_forward(const Tensor &x) {
    if (x.shape.size() != 4) {
        throw std::invalid_argument("global_average_pool: expected [N,C,H,W], got " +
                                    shape_string(x.shape));
    }
    const std::size_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    Tensor y({n, c});
    for (std::size_t i = 0; i < n * c; ++i) {
        const double *xp = &x.data[i * hw];
        double acc = 0.0;
        for (std::size_t j = 0; j < hw; ++j) {
            acc += xp[j];
        }
        y.data[i] = acc / static_cast<double>(hw);
    }
    return y;
}

inline Tensor global_average_pool_backward(const std::vector<std::size_t> &x_shape,
                                           const Tensor &gy) {
    const std::size_t hw = x_shape[2] * x_shape[3];
    Tensor gx(x_shape);
    for (std::size_t i = 0; i < gy.data.size(); ++i) {
        const double g = gy.data[i] / static_cast<double>(hw);
        double *gxp = &gx.data[i * hw];
        for (std::size_t j = 0; j < hw; ++j) {
            gxp[j] = g;
        }
    }
    return gx;
}

// ---------------------------------------------------------------------------
// Fully connected layer: x [N,D], w [O,D], b [O].
// ---------------------------------------------------------------------------

inline Tensor linear_forward(const Tensor &x, const std::vector<double> &w,
                             const std::vector<double> &b, std::size_t out_dim) {
    const std::size_t n = x.dim(0), d = x.dim(1);
    if (w.size() != out_dim * d || b.size() != out_dim) {
        throw std::invalid_argument("linear: weight/bias size mismatch for input " +
                                    shape_string(x.shape));
    }
    Tensor y({n, out_dim});
    for (std::size_t in = 0; in < n; ++in) {
        const double *xp = &x.data[in * d];
        for (std::size_t o = 0; o < out_dim; ++o) {
            const double *wrow = &w[o * d];
            double acc = b[o];
            for (std::size_t j = 0; j < d; ++j) {
                acc += wrow[j] * xp[j];
            }
            y.data[in * out_dim + o] = acc;
        }
    }
    return y;
}

inline void linear_backward(const Tensor &x, const std::vector<double> &w, const Tensor &gy,
                            std::size_t out_dim, Tensor &gx, std::vector<double> &gw,
                            std::vector<double> &gb) {
    const std::size_t n = x.dim(0), d = x.dim(1);
    gx = Tensor(x.shape);
    if (gw.size() != w.size()) {
        gw.assign(w.size(), 0.0);
    }
    if (gb.size() != out_dim) {
        gb.assign(out_dim, 0.0);
    }
    for (std::size_t in = 0; in < n; ++in) {
        const double *xp = &x.data[in * d];
        double *gxp = &gx.data[in * d];
        for (std::size_t o = 0; o < out_dim; ++o) {
            const double g = gy.data[in * out_dim + o];
            const double *wrow = &w[o * d];
            double *gwrow = &gw[o * d];
            gb[o] += g;
            for (std::size_t j = 0; j < d; ++j) {
                gwrow[j] += g * xp[j];
                gxp[j] += g * wrow[j];
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Lightweight batch normalization over [N,C,H,W] (statistics per channel
// across N*H*W). Training mode requires at least two values per channel.
// ---------------------------------------------------------------------------

struct BatchNormCache {
    Tensor xhat;
    std::vector<double> inv_std;
};

struct BatchNormState {
    std::size_t channels = 0;
    double momentum = 0.1;
    double eps = 1e-6;
    std::vector<double> running_mean;
    std::vector<double> running_var;

    explicit BatchNormState(std::size_t c = 0)
        : channels(c), running_mean(c, 0.0), running_var(c, 1.0) {}
};

inline Tensor batch_norm_forward(const Tensor &x, const std::vector<double> &gamma,
                                 const std::vector<double> &beta, BatchNormState &state,
                                 bool training, BatchNormCache *cache) {
    const std::size_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    if (gamma.size() != c || beta.size() != c || state.channels != c) {
        throw std::invalid_argument("batch_norm: channel mismatch");
    }
    Tensor y(x.shape);
    const std::size_t m = n * hw;
    if (training && m < 2) {
        throw std::invalid_argument("batch_norm training mode requires batch size >= 2");
    }

    std::vector<double> mean(c, 0.0), var(c, 0.0);
    if (training) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            double acc = 0.0;
            for (std::size_t in = 0; in < n; ++in) {
                const double *xp = &x.data[(in * c + ch) * hw];
                for (std::size_t i = 0; i < hw; ++i) {
                    acc += xp[i];
                }
            }
            mean[ch] = acc / static_cast<double>(m);
            double vacc = 0.0;
            for (std::size_t in = 0; in < n; ++in) {
                const double *xp = &x.data[(in * c + ch) * hw];
                for (std::size_t i = 0; i < hw; ++i) {
                    const double d = xp[i] - mean[ch];
                    vacc += d * d;
                }
            }
            var[ch] = vacc / static_cast<double>(m);
            state.running_mean[ch] =
                (1.0 - state.momentum) * state.running_mean[ch] + state.momentum * mean[ch];
            state.running_var[ch] =
                (1.0 - state.momentum) * state.running_var[ch] + state.momentum * var[ch];
        }
    } else {
        mean = state.running_mean;
        var = state.running_var;
    }

    if (cache) {
        cache->xhat = Tensor(x.shape);
        cache->inv_std.assign(c, 0.0);
    }
    for (std::size_t ch = 0; ch < c; ++ch) {
        const double inv_std = 1.0 / std::sqrt(var[ch] + state.eps);
        if (cache) {
            cache->inv_std[ch] = inv_std;
        }
        for (std::size_t in = 0; in < n; ++in) {
            const double *xp = &x.data[(in * c + ch) * hw];
            double *yp = &y.data[(in * c + ch) * hw];
            double *xh = cache ? &cache->xhat.data[(in * c + ch) * hw] : nullptr;
            for (std::size_t i = 0; i < hw; ++i) {
                const double normed = (xp[i] - mean[ch]) * inv_std;
                if (xh) {
                    xh[i] = normed;
                }
                yp[i] = gamma[ch] * normed + beta[ch];
            }
        }
    }
    return y;
}

/// Backward through training-mode batch norm.
inline Tensor batch_norm_backward(const BatchNormCache &cache, const std::vector<double> &gamma,
                                  const Tensor &gy, std::vector<double> &ggamma,
                                  std::vector<double> &gbeta) {
    const Tensor &xhat = cache.xhat;
    const std::size_t n = xhat.dim(0), c = xhat.dim(1), hw = xhat.dim(2) * xhat.dim(3);
    const double m = static_cast<double>(n * hw);

    if (ggamma.size() != c) {
        ggamma.assign(c, 0.0);
    }
    if (gbeta.size() != c) {
        gbeta.assign(c, 0.0);
    }
    Tensor gx(xhat.shape);
    for (std::size_t ch = 0; ch < c; ++ch) {
        double sum_gy = 0.0, sum_gy_xhat = 0.0;
        for (std::size_t in = 0; in < n; ++in) {
            const double *gp = &gy.data[(in * c + ch) * hw];
            const double *xh = &xhat.data[(in * c + ch) * hw];
            for (std::size_t i = 0; i < hw; ++i) {
                sum_gy += gp[i];
                sum_gy_xhat += gp[i] * xh[i];
            }
        }
        ggamma[ch] += sum_gy_xhat;
        gbeta[ch] += sum_gy;

        const double scale = gamma[ch] * cache.inv_std[ch];
        for (std::size_t in = 0; in < n; ++in) {
            const double *gp = &gy.data[(in * c + ch) * hw];
            const double *xh = &xhat.data[(in * c + ch) * hw];
            double *gxp = &gx.data[(in * c + ch) * hw];
            for (std::size_t i = 0; i < hw; ++i) {
                gxp[i] = scale * (gp[i] - sum_gy / m - xh[i] * sum_gy_xhat / m);
            }
        }
    }
    return gx;
}

} // namespace sdaqec::nn
