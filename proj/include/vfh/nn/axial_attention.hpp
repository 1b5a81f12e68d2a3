#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "vfh/core/parallel.hpp"
#include "vfh/nn/conv.hpp"

namespace vfh::nn {

struct AxialAttentionConfig {
    std::size_t heads = 2;
    std::size_t dim_per_head = 8;
};

enum class Axis { Height, Width };

/// Multi-head self-attention along one spatial axis of (b, c, h, w): every
/// column (Height) or row (Width) is an independent token sequence. Query,
/// key and value are 1x1 projections; no residual here.
class AxisAttention : public Layer {
public:
    AxisAttention(std::string name, std::size_t channels, const AxialAttentionConfig& cfg, Axis axis, Rng& rng)
        : Layer(std::move(name)),
          channels_(channels),
          cfg_(cfg),
          axis_(axis),
          query_(this->name() + ".query", {channels, channels, 1, 1, 0, true}, rng),
          key_(this->name() + ".key", {channels, channels, 1, 1, 0, true}, rng),
          value_(this->name() + ".value", {channels, channels, 1, 1, 0, true}, rng) {
        if (cfg.heads * cfg.dim_per_head != channels)
            throw ShapeError(this->name() + ": heads*dim_per_head = " + std::to_string(cfg.heads * cfg.dim_per_head) +
                             " does not match " + std::to_string(channels) + " channels");
    }

    Tensor forward(const Tensor& x) override {
        if (x.rank() != 4 || x.dim(1) != channels_)
            throw ShapeError(name() + ": expected " + std::to_string(channels_) + " channels, got " +
                             core::shape_str(x.shape()));
        mark_forward();
        q_ = query_.forward(x);
        k_ = key_.forward(x);
        v_ = value_.forward(x);
        const Geometry g = geometry(x.shape());
        attn_ = Tensor({g.sequences, cfg_.heads, g.length, g.length});
        Tensor out(x.shape());
        const double scale = 1.0 / std::sqrt(static_cast<double>(cfg_.dim_per_head));
        core::parallel_for(g.sequences, [&](std::size_t s) {
            const std::size_t base = g.base(s);
            std::vector<double> logits(g.length);
            for (std::size_t hd = 0; hd < cfg_.heads; ++hd) {
                const std::size_t c0 = hd * cfg_.dim_per_head;
                double* a = attn_.ptr() + (s * cfg_.heads + hd) * g.length * g.length;
                for (std::size_t i = 0; i < g.length; ++i) {
                    double mx = -1e300;
                    for (std::size_t j = 0; j < g.length; ++j) {
                        double acc = 0.0;
                        for (std::size_t c = c0; c < c0 + cfg_.dim_per_head; ++c)
                            acc += q_[base + c * g.channel_stride + i * g.token_stride] *
                                   k_[base + c * g.channel_stride + j * g.token_stride];
                        logits[j] = acc * scale;
                        mx = std::max(mx, logits[j]);
                    }
                    double z = 0.0;
                    for (std::size_t j = 0; j < g.length; ++j) {
                        logits[j] = std::exp(logits[j] - mx);
                        z += logits[j];
                    }
                    for (std::size_t j = 0; j < g.length; ++j) a[i * g.length + j] = logits[j] / z;
                    for (std::size_t c = c0; c < c0 + cfg_.dim_per_head; ++c) {
                        double acc = 0.0;
                        for (std::size_t j = 0; j < g.length; ++j)
                            acc += a[i * g.length + j] * v_[base + c * g.channel_stride + j * g.token_stride];
                        out[base + c * g.channel_stride + i * g.token_stride] = acc;
                    }
                }
            }
        });
        return out;
    }

    Tensor backward(const Tensor& dy) override {
        require_forward();
        if (dy.shape() != q_.shape()) throw ShapeError(name() + ".backward", dy.shape(), q_.shape());
        const Geometry g = geometry(dy.shape());
        Tensor dq(dy.shape()), dk(dy.shape()), dv(dy.shape());
        const double scale = 1.0 / std::sqrt(static_cast<double>(cfg_.dim_per_head));
        core::parallel_for(g.sequences, [&](std::size_t s) {
            const std::size_t base = g.base(s);
            const std::size_t L = g.length;
            std::vector<double> da(L * L), ds(L * L);
            for (std::size_t hd = 0; hd < cfg_.heads; ++hd) {
                const std::size_t c0 = hd * cfg_.dim_per_head, c1 = c0 + cfg_.dim_per_head;
                const double* a = attn_.ptr() + (s * cfg_.heads + hd) * L * L;
                auto at = [&](const Tensor& t, std::size_t c, std::size_t i) {
                    return t[base + c * g.channel_stride + i * g.token_stride];
                };
                for (std::size_t i = 0; i < L; ++i)
                    for (std::size_t j = 0; j < L; ++j) {
                        double acc = 0.0;
                        for (std::size_t c = c0; c < c1; ++c) acc += at(dy, c, i) * at(v_, c, j);
                        da[i * L + j] = acc;
                    }
                for (std::size_t c = c0; c < c1; ++c)
                    for (std::size_t j = 0; j < L; ++j) {
                        double acc = 0.0;
                        for (std::size_t i = 0; i < L; ++i) acc += a[i * L + j] * at(dy, c, i);
                        dv[base + c * g.channel_stride + j * g.token_stride] = acc;
                    }
                for (std::size_t i = 0; i < L; ++i) {
                    double dotp = 0.0;
                    for (std::size_t j = 0; j < L; ++j) dotp += a[i * L + j] * da[i * L + j];
                    for (std::size_t j = 0; j < L; ++j) ds[i * L + j] = a[i * L + j] * (da[i * L + j] - dotp) * scale;
                }
                for (std::size_t c = c0; c < c1; ++c) {
                    for (std::size_t i = 0; i < L; ++i) {
                        double acc = 0.0;
                        for (std::size_t j = 0; j < L; ++j) acc += ds[i * L + j] * at(k_, c, j);
                        dq[base + c * g.channel_stride + i * g.token_stride] = acc;
                    }
                    for (std::size_t j = 0; j < L; ++j) {
                        double acc = 0.0;
                        for (std::size_t i = 0; i < L; ++i) acc += ds[i * L + j] * at(q_, c, i);
                        dk[base + c * g.channel_stride + j * g.token_stride] = acc;
                    }
                }
            }
        });
        Tensor dx = query_.backward(dq);
        dx += key_.backward(dk);
        dx += value_.backward(dv);
        return dx;
    }

    void collect_params(std::vector<Param*>& out) override {
        query_.collect_params(out);
        key_.collect_params(out);
        value_.collect_params(out);
    }

    /// Softmax weights of the last forward, shape (sequences, heads, L, L).
    const Tensor& attention_weights() const { return attn_; }
    Conv2d& query() { return query_; }
    Conv2d& key() { return key_; }
    Conv2d& value() { return value_; }

private:
    struct Geometry {
        std::size_t sequences, length, channel_stride, token_stride;
        std::size_t batch_stride, across, across_stride;
        std::size_t base(std::size_t s) const { return (s / across) * batch_stride + (s % across) * across_stride; }
    };

    Geometry geometry(const Shape& shape) const {
        const std::size_t b = shape[0], c = shape[1], h = shape[2], w = shape[3];
        const std::size_t plane = h * w;
        if (axis_ == Axis::Height) return {b * w, h, plane, w, c * plane, w, 1};
        return {b * h, w, plane, 1, c * plane, h, w};
    }

    std::size_t channels_;
    AxialAttentionConfig cfg_;
    Axis axis_;
    Conv2d query_, key_, value_;
    Tensor q_, k_, v_, attn_;
};

/// Height-axis attention followed by width-axis attention, plus a residual:
/// y = x + width(height(x)).
class AxialAttention : public Layer {
public:
    AxialAttention(std::string name, std::size_t channels, const AxialAttentionConfig& cfg, Rng& rng)
        : Layer(std::move(name)),
          height_(this->name() + ".height", channels, cfg, Axis::Height, rng),
          width_(this->name() + ".width", channels, cfg, Axis::Width, rng) {}

    Tensor forward(const Tensor& x) override {
        mark_forward();
        Tensor y = width_.forward(height_.forward(x));
        y += x;
        return y;
    }

    Tensor backward(const Tensor& dy) override {
        require_forward();
        Tensor dx = height_.backward(width_.backward(dy));
        dx += dy;
        return dx;
    }

    void collect_params(std::vector<Param*>& out) override {
        height_.collect_params(out);
        width_.collect_params(out);
    }

    AxisAttention& height_pass() { return height_; }
    AxisAttention& width_pass() { return width_; }

private:
    AxisAttention height_;
    AxisAttention width_;
};

}  // namespace vfh::nn
