// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sdaqec/core/error.hpp"
#include "sdaqec/core/rng.hpp"
#include "sdaqec/core/tensor.hpp"
#include "sdaqec/nn/ops.hpp"
#include "sdaqec/nn/params.hpp"

namespace sdaqec {

/// One inverted-residual block: optional 1x1 expansion, 3x3 depthwise, 1x1
/// projection. A skip connection is used when stride is 1 and the channel
/// count is preserved.
struct BlockSpec {
    std::size_t expansion = 1;
    std::size_t out_channels = 16;
    std::size_t stride = 1;
};

struct ExtractorConfig {
    std::size_t in_channels = 3;
    std::size_t in_h = 64;
    std::size_t in_w = 64;
    std::size_t stem_channels = 8;
    std::vector<BlockSpec> blocks{{1, 16, 2}, {2, 24, 2}, {2, 32, 1}};
    std::size_t feature_dim = 128;
    std::size_t reduced_dim = 16;

    void validate() const {
        if (in_channels == 0 || in_h == 0 || in_w == 0 || stem_channels == 0 ||
            feature_dim == 0 || reduced_dim == 0) {
            throw ConfigError("extractor dimensions must be positive");
        }
        for (const auto &b : blocks) {
            if (b.stride != 1 && b.stride != 2) {
                throw ConfigError("block stride must be 1 or 2");
            }
            if (b.expansion == 0 || b.out_channels == 0) {
                throw ConfigError("block expansion and out_channels must be positive");
            }
        }
        if ((reduced_dim & (reduced_dim - 1)) != 0) {
            throw ConfigError("reduced_dim must be a power of two");
        }
    }
};

/**
 * Depthwise-separable convolutional feature extractor.
 *
 * Topology: 3x3 stride-2 stem conv, a stack of inverted-residual blocks, a
 * 1x1 conv to `feature_dim`, global average pooling, and a linear + ReLU
 * reduction to `reduced_dim`. Every conv is followed by batch normalization.
 * Forward in training mode records the activations needed by `backward`,
 * which accumulates parameter gradients in the block registry.
 */
class FeatureExtractor {
  public:
    struct BnRef {
        std::size_t gamma = 0, beta = 0, state = 0;
    };
    struct BlockWiring {
        bool expanded = false;
        std::size_t expand_w = 0;
        BnRef expand_bn;
        std::size_t dw_w = 0;
        BnRef dw_bn;
        std::size_t proj_w = 0;
        BnRef proj_bn;
        std::size_t stride = 1;
        bool residual = false;
        std::size_t in_c = 0, mid_c = 0, out_c = 0;
    };

    struct BlockCache {
        Tensor block_in;
        nn::BatchNormCache bn1;
        Tensor relu1_in;
        Tensor dw_in;
        nn::BatchNormCache bn2;
        Tensor relu2_in;
        Tensor proj_in;
        nn::BatchNormCache bn3;
    };

    struct Cache {
        bool training = false;
        Tensor input;
        nn::BatchNormCache stem_bn;
        Tensor stem_relu_in;
        std::vector<BlockCache> blocks;
        Tensor head_in;
        nn::BatchNormCache head_bn;
        Tensor head_relu_in;
        std::vector<std::size_t> gap_in_shape;
        Tensor reduce_in;
        Tensor reduce_preact;
    };

    FeatureExtractor() = default;

    explicit FeatureExtractor(const ExtractorConfig &cfg) : cfg_(cfg) {
        cfg_.validate();
        build();
    }

    const ExtractorConfig &config() const { return cfg_; }
    std::size_t output_dim() const { return cfg_.reduced_dim; }

    std::vector<ParamBlock> &params() { return params_; }
    const std::vector<ParamBlock> &params() const { return params_; }
    std::vector<nn::BatchNormState> &bn_states() { return bn_states_; }
    const std::vector<nn::BatchNormState> &bn_states() const { return bn_states_; }

    /// He-normal weights, identity batch-norm affine.
    void init_params(Rng &rng) {
        for (auto &p : params_) {
            if (p.kind == ParamKind::norm) {
                const bool is_gamma = p.name.ends_with("gamma");
                std::fill(p.value.begin(), p.value.end(), is_gamma ? 1.0 : 0.0);
            } else if (p.kind == ParamKind::bias) {
                std::fill(p.value.begin(), p.value.end(), 0.0);
            } else {
                const std::size_t fan_in = fan_in_of(p);
                const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
                for (double &v : p.value) {
                    v = rng.normal(0.0, stddev);
                }
            }
        }
        for (auto &state : bn_states_) {
            std::fill(state.running_mean.begin(), state.running_mean.end(), 0.0);
            std::fill(state.running_var.begin(), state.running_var.end(), 1.0);
        }
    }

    /// x: [N, in_channels, in_h, in_w] -> reduced features [N, reduced_dim].
    Tensor forward(const Tensor &x, bool training, Cache &cache) {
        if (x.shape.size() != 4 || x.dim(1) != cfg_.in_channels || x.dim(2) != cfg_.in_h ||
            x.dim(3) != cfg_.in_w) {
            throw std::invalid_argument(
                "extractor: expected input [N, " + std::to_string(cfg_.in_channels) + ", " +
                std::to_string(cfg_.in_h) + ", " + std::to_string(cfg_.in_w) + "], got " +
                shape_string(x.shape));
        }
        cache.training = training;
        cache.input = x;
        cache.blocks.assign(wiring_.size(), {});

        Tensor t = nn::conv2d_forward(x, as_tensor(stem_w_, {cfg_.stem_channels, cfg_.in_channels,
                                                             3, 3}),
                                      2, 1);
        t = bn_forward(stem_bn_, t, training, &cache.stem_bn);
        cache.stem_relu_in = t;
        t = nn::relu_forward(t);

        for (std::size_t bi = 0; bi < wiring_.size(); ++bi) {
            const BlockWiring &wire = wiring_[bi];
            BlockCache &bc = cache.blocks[bi];
            bc.block_in = t;
            Tensor cur = t;
            if (wire.expanded) {
                cur = nn::pointwise_conv2d_forward(cur,
                                                   as_tensor(wire.expand_w,
                                                             {wire.mid_c, wire.in_c}));
                cur = bn_forward(wire.expand_bn, cur, training, &bc.bn1);
                bc.relu1_in = cur;
                cur = nn::relu_forward(cur);
            }
            bc.dw_in = cur;
            cur = nn::depthwise_conv2d_forward(cur, as_tensor(wire.dw_w, {wire.mid_c, 3, 3}),
                                               wire.stride, 1);
            cur = bn_forward(wire.dw_bn, cur, training, &bc.bn2);
            bc.relu2_in = cur;
            cur = nn::relu_forward(cur);
            bc.proj_in = cur;
            cur = nn::pointwise_conv2d_forward(cur, as_tensor(wire.proj_w,
                                                              {wire.out_c, wire.mid_c}));
            cur = bn_forward(wire.proj_bn, cur, training, &bc.bn3);
            if (wire.residual) {
                for (std::size_t i = 0; i < cur.data.size(); ++i) {
                    cur.data[i] += bc.block_in.data[i];
                }
            }
            t = std::move(cur);
        }

        cache.head_in = t;
        t = nn::pointwise_conv2d_forward(t, as_tensor(head_w_, {cfg_.feature_dim, last_c_}));
        t = bn_forward(head_bn_, t, training, &cache.head_bn);
        cache.head_relu_in = t;
        t = nn::relu_forward(t);

        cache.gap_in_shape = t.shape;
        Tensor pooled = nn::global_average_pool_forward(t);
        cache.reduce_in = pooled;
        Tensor pre = nn::linear_forward(pooled, params_[reduce_w_].value, params_[reduce_b_].value,
                                        cfg_.reduced_dim);
        cache.reduce_preact = pre;
        return nn::relu_forward(pre);
    }

    /// Backprop from d(loss)/d(reduced features). Accumulates into param grads.
    /// Returns the gradient with respect to the input batch.
    Tensor backward(const Cache &cache, const Tensor &g_reduced) {
        Tensor g = nn::relu_backward(cache.reduce_preact, g_reduced);
        Tensor g_pooled;
        nn::linear_backward(cache.reduce_in, params_[reduce_w_].value, g, cfg_.reduced_dim,
                            g_pooled, params_[reduce_w_].grad, params_[reduce_b_].grad);
        g = nn::global_average_pool_backward(cache.gap_in_shape, g_pooled);

        g = nn::relu_backward(cache.head_relu_in, g);
        g = bn_backward(head_bn_, cache.head_bn, g);
        {
            Tensor gx;
            nn::pointwise_conv2d_backward(cache.head_in,
                                          as_tensor(head_w_, {cfg_.feature_dim, last_c_}), g, gx,
                                          params_[head_w_].grad);
            g = std::move(gx);
        }

        for (std::size_t bi = wiring_.size(); bi-- > 0;) {
            const BlockWiring &wire = wiring_[bi];
            const BlockCache &bc = cache.blocks[bi];
            Tensor g_skip;
            if (wire.residual) {
                g_skip = g;
            }
            g = bn_backward(wire.proj_bn, bc.bn3, g);
            {
                Tensor gx;
                nn::pointwise_conv2d_backward(bc.proj_in,
                                              as_tensor(wire.proj_w, {wire.out_c, wire.mid_c}), g,
                                              gx, params_[wire.proj_w].grad);
                g = std::move(gx);
            }
            g = nn::relu_backward(bc.relu2_in, g);
            g = bn_backward(wire.dw_bn, bc.bn2, g);
            {
                Tensor gx;
                nn::depthwise_conv2d_backward(bc.dw_in, as_tensor(wire.dw_w, {wire.mid_c, 3, 3}),
                                              g, wire.stride, 1, gx, params_[wire.dw_w].grad);
                g = std::move(gx);
            }
            if (wire.expanded) {
                g = nn::relu_backward(bc.relu1_in, g);
                g = bn_backward(wire.expand_bn, bc.bn1, g);
                Tensor gx;
                nn::pointwise_conv2d_backward(bc.block_in,
                                              as_tensor(wire.expand_w, {wire.mid_c, wire.in_c}),
                                              g, gx, params_[wire.expand_w].grad);
                g = std::move(gx);
            }
            if (wire.residual) {
                for (std::size_t i = 0; i < g.data.size(); ++i) {
                    g.data[i] += g_skip.data[i];
                }
            }
        }

        g = nn::relu_backward(cache.stem_relu_in, g);
        g = bn_backward(stem_bn_, cache.stem_bn, g);
        Tensor g_input;
        nn::conv2d_backward(cache.input,
                            as_tensor(stem_w_, {cfg_.stem_channels, cfg_.in_channels, 3, 3}), g, 2,
                            1, g_input, params_[stem_w_].grad);
        return g_input;
    }

  private:
    void build() {
        std::size_t c = cfg_.stem_channels;
        stem_w_ = add_param("stem.w", ParamKind::weight,
                            {cfg_.stem_channels, cfg_.in_channels, 3, 3});
        stem_bn_ = add_bn("stem.bn", cfg_.stem_channels);

        for (std::size_t bi = 0; bi < cfg_.blocks.size(); ++bi) {
            const BlockSpec &spec = cfg_.blocks[bi];
            const std::string prefix = "block" + std::to_string(bi);
            BlockWiring wire;
            wire.in_c = c;
            wire.mid_c = c * spec.expansion;
            wire.out_c = spec.out_channels;
            wire.stride = spec.stride;
            wire.residual = spec.stride == 1 && wire.in_c == wire.out_c;
            wire.expanded = spec.expansion > 1;
            if (wire.expanded) {
                wire.expand_w =
                    add_param(prefix + ".expand.w", ParamKind::weight, {wire.mid_c, wire.in_c});
                wire.expand_bn = add_bn(prefix + ".expand.bn", wire.mid_c);
            }
            wire.dw_w = add_param(prefix + ".dw.w", ParamKind::weight, {wire.mid_c, 3, 3});
            wire.dw_bn = add_bn(prefix + ".dw.bn", wire.mid_c);
            wire.proj_w =
                add_param(prefix + ".project.w", ParamKind::weight, {wire.out_c, wire.mid_c});
            wire.proj_bn = add_bn(prefix + ".project.bn", wire.out_c);
            wiring_.push_back(wire);
            c = wire.out_c;
        }
        last_c_ = c;

        head_w_ = add_param("head.w", ParamKind::weight, {cfg_.feature_dim, last_c_});
        head_bn_ = add_bn("head.bn", cfg_.feature_dim);
        reduce_w_ = add_param("reduce.w", ParamKind::weight, {cfg_.reduced_dim, cfg_.feature_dim});
        reduce_b_ = add_param("reduce.b", ParamKind::bias, {cfg_.reduced_dim});
    }

    std::size_t add_param(const std::string &name, ParamKind kind,
                          std::vector<std::size_t> shape) {
        params_.emplace_back(name, kind, std::move(shape));
        return params_.size() - 1;
    }

    BnRef add_bn(const std::string &name, std::size_t channels) {
        BnRef ref;
        ref.gamma = add_param(name + ".gamma", ParamKind::norm, {channels});
        ref.beta = add_param(name + ".beta", ParamKind::norm, {channels});
        bn_states_.emplace_back(channels);
        ref.state = bn_states_.size() - 1;
        return ref;
    }

    Tensor as_tensor(std::size_t param_idx, std::vector<std::size_t> shape) const {
        return Tensor(std::move(shape), params_[param_idx].value);
    }

    Tensor bn_forward(const BnRef &ref, const Tensor &x, bool training,
                      nn::BatchNormCache *cache) {
        return nn::batch_norm_forward(x, params_[ref.gamma].value, params_[ref.beta].value,
                                      bn_states_[ref.state], training, cache);
    }

    Tensor bn_backward(const BnRef &ref, const nn::BatchNormCache &cache, const Tensor &gy) {
        return nn::batch_norm_backward(cache, params_[ref.gamma].value, gy,
                                       params_[ref.gamma].grad, params_[ref.beta].grad);
    }

    std::size_t fan_in_of(const ParamBlock &p) const {
        if (p.shape.size() == 4) {
            return p.shape[1] * p.shape[2] * p.shape[3]; // full conv
        }
        if (p.shape.size() == 3) {
            return p.shape[1] * p.shape[2]; // depthwise
        }
        if (p.shape.size() == 2) {
            return p.shape[1]; // pointwise / linear
        }
        return p.size();
    }

    ExtractorConfig cfg_;
    std::vector<ParamBlock> params_;
    std::vector<nn::BatchNormState> bn_states_;
    std::vector<BlockWiring> wiring_;
    std::size_t stem_w_ = 0;
    BnRef stem_bn_;
    std::size_t head_w_ = 0;
    BnRef head_bn_;
    std::size_t reduce_w_ = 0;
    std::size_t reduce_b_ = 0;
    std::size_t last_c_ = 0;
};

/// Linear + ReLU reduction for externally supplied feature vectors.
class FeatureReducer {
  public:
    struct Cache {
        Tensor input;
        Tensor preact;
    };

    FeatureReducer() = default;

    FeatureReducer(std::size_t input_dim, std::size_t reduced_dim)
        : input_dim_(input_dim), reduced_dim_(reduced_dim) {
        params_.emplace_back("reduce.w", ParamKind::weight,
                             std::vector<std::size_t>{reduced_dim, input_dim});
        params_.emplace_back("reduce.b", ParamKind::bias, std::vector<std::size_t>{reduced_dim});
    }

    std::size_t input_dim() const { return input_dim_; }
    std::size_t output_dim() const { return reduced_dim_; }
    std::vector<ParamBlock> &params() { return params_; }
    const std::vector<ParamBlock> &params() const { return params_; }

    void init_params(Rng &rng) {
        const double stddev = std::sqrt(2.0 / static_cast<double>(input_dim_));
        for (double &v : params_[0].value) {
            v = rng.normal(0.0, stddev);
        }
        std::fill(params_[1].value.begin(), params_[1].value.end(), 0.0);
    }

    Tensor forward(const Tensor &x, Cache &cache) {
        cache.input = x;
        cache.preact = nn::linear_forward(x, params_[0].value, params_[1].value, reduced_dim_);
        return nn::relu_forward(cache.preact);
    }

    Tensor backward(const Cache &cache, const Tensor &g_reduced) {
        Tensor g = nn::relu_backward(cache.preact, g_reduced);
        Tensor gx;
        nn::linear_backward(cache.input, params_[0].value, g, reduced_dim_, gx, params_[0].grad,
                            params_[1].grad);
        return gx;
    }

  private:
    std::size_t input_dim_ = 0;
    std::size_t reduced_dim_ = 0;
    std::vector<ParamBlock> params_;
};

} // namespace sdaqec
