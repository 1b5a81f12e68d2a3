#pragma once

#include <string>
#include <vector>

#include "vfh/core/gemm.hpp"
#include "vfh/core/parallel.hpp"
#include "vfh/nn/conv_kernels.hpp"
#include "vfh/nn/layer.hpp"

namespace vfh::nn {

struct ConvSpec {
    std::size_t in_channels = 1;
    std::size_t out_channels = 1;
    std::size_t kernel = 3;
    std::size_t stride = 1;
    std::size_t pad = 1;
    bool bias = true;
};

/// 2D cross-correlation over (b, c, h, w). Weight layout (out, in, k, k).
class Conv2d : public Layer {
public:
    Conv2d(std::string name, const ConvSpec& spec, Rng& rng, double init_gain = 1.0)
        : Layer(std::move(name)),
          spec_(spec),
          weight_(this->name() + ".weight",
                  he_uniform({spec.out_channels, spec.in_channels, spec.kernel, spec.kernel},
                             spec.in_channels * spec.kernel * spec.kernel, rng, init_gain)),
          bias_(this->name() + ".bias", Tensor({spec.out_channels})) {}

    Tensor forward(const Tensor& x) override {
        check_input(x);
        input_ = x;
        mark_forward();
        const std::size_t b = x.dim(0);
        const auto g = geom(x);
        const std::size_t ic = spec_.in_channels, oc = spec_.out_channels;
        Tensor y({b, oc, g.out_h, g.out_w});
        const std::size_t in_plane = g.in_h * g.in_w, out_plane = g.out_h * g.out_w;
        const std::size_t rows = ic * spec_.kernel * spec_.kernel;
        core::parallel_for(b, [&](std::size_t n) {
            std::vector<const double*> planes(ic);
            for (std::size_t c = 0; c < ic; ++c) planes[c] = x.ptr() + (n * ic + c) * in_plane;
            std::vector<double> col(rows * out_plane);
            kernels::im2col(g, planes.data(), ic, col.data());
            double* out = y.ptr() + n * oc * out_plane;
            for (std::size_t o = 0; o < oc; ++o)
                std::fill(out + o * out_plane, out + (o + 1) * out_plane, spec_.bias ? bias_.value[o] : 0.0);
            core::gemm(oc, out_plane, rows, weight_.value.ptr(), rows, col.data(), out_plane, out, out_plane);
        });
        return y;
    }

    Tensor backward(const Tensor& dy) override {
        require_forward();
        const Tensor& x = input_;
        const std::size_t b = x.dim(0);
        const auto g = geom(x);
        if (dy.shape() != Shape{b, spec_.out_channels, g.out_h, g.out_w})
            throw ShapeError(name() + ".backward", dy.shape(), Shape{b, spec_.out_channels, g.out_h, g.out_w});
        const std::size_t ic = spec_.in_channels, oc = spec_.out_channels;
        const std::size_t in_plane = g.in_h * g.in_w, out_plane = g.out_h * g.out_w;
        const std::size_t rows = ic * spec_.kernel * spec_.kernel;
        const bool want_w = !weight_.frozen;
        const std::size_t k = spec_.kernel, ksz = k * k;
        // Stride 1: the input gradient is a correlation of dy with the
        // flipped, channel-transposed kernel.
        const bool flip_path = spec_.stride == 1 && spec_.pad < k;
        std::vector<double> wt;
        kernels::PlaneGeom gt{};
        if (flip_path) {
            wt.resize(ic * oc * ksz);
            for (std::size_t o = 0; o < oc; ++o)
                for (std::size_t c = 0; c < ic; ++c)
                    for (std::size_t i = 0; i < ksz; ++i)
                        wt[(c * oc + o) * ksz + (ksz - 1 - i)] = weight_.value[(o * ic + c) * ksz + i];
            gt = {g.out_h, g.out_w, k, k, 1, k - 1 - spec_.pad, g.in_h, g.in_w};
        } else {
            wt.resize(rows * oc);
            core::transpose_into(oc, rows, weight_.value.ptr(), wt.data());
        }
        Tensor dx(x.shape());
        std::vector<std::vector<double>> dw_parts(want_w ? b : 0);
        core::parallel_for(b, [&](std::size_t n) {
            const double* dyn = dy.ptr() + n * oc * out_plane;
            if (flip_path) {
                std::vector<const double*> dplanes(oc);
                for (std::size_t o = 0; o < oc; ++o) dplanes[o] = dyn + o * out_plane;
                std::vector<double> dcol(oc * ksz * in_plane);
                kernels::im2col(gt, dplanes.data(), oc, dcol.data());
                core::gemm(ic, in_plane, oc * ksz, wt.data(), oc * ksz, dcol.data(), in_plane,
                           dx.ptr() + n * ic * in_plane, in_plane);
            } else {
                std::vector<double> dcol(rows * out_plane, 0.0);
                core::gemm(rows, out_plane, oc, wt.data(), oc, dyn, out_plane, dcol.data(), out_plane);
                std::vector<double*> dplanes(ic);
                for (std::size_t c = 0; c < ic; ++c) dplanes[c] = dx.ptr() + (n * ic + c) * in_plane;
                kernels::col2im(g, dcol.data(), dplanes.data(), ic);
            }
            if (!want_w) return;
            std::vector<const double*> planes(ic);
            for (std::size_t c = 0; c < ic; ++c) planes[c] = x.ptr() + (n * ic + c) * in_plane;
            std::vector<double> col(rows * out_plane);
            kernels::im2col(g, planes.data(), ic, col.data());
            dw_parts[n].assign(oc * rows, 0.0);
            core::gemm_nt(oc, rows, out_plane, dyn, out_plane, col.data(), out_plane, dw_parts[n].data(), rows);
        });
        if (want_w) {
            for (std::size_t n = 0; n < b; ++n)
                for (std::size_t i = 0; i < oc * rows; ++i) weight_.grad[i] += dw_parts[n][i];
            if (spec_.bias) {
                for (std::size_t o = 0; o < oc; ++o) {
                    double acc = 0.0;
                    for (std::size_t n = 0; n < b; ++n) {
                        const double* p = dy.ptr() + (n * oc + o) * out_plane;
                        for (std::size_t i = 0; i < out_plane; ++i) acc += p[i];
                    }
                    bias_.grad[o] += acc;
                }
            }
        }
        return dx;
    }

    void collect_params(std::vector<Param*>& out) override {
        out.push_back(&weight_);
        if (spec_.bias) out.push_back(&bias_);
    }

    Param& weight() { return weight_; }
    Param& bias() { return bias_; }
    const ConvSpec& spec() const { return spec_; }

    Shape output_shape(const Shape& in) const {
        return {in[0], spec_.out_channels, kernels::conv_out_size(in[2], spec_.kernel, spec_.stride, spec_.pad),
                kernels::conv_out_size(in[3], spec_.kernel, spec_.stride, spec_.pad)};
    }

private:
    void check_input(const Tensor& x) const {
        if (x.rank() != 4) throw ShapeError(name() + ": expected (b,c,h,w), got " + core::shape_str(x.shape()));
        if (x.dim(1) != spec_.in_channels)
            throw ShapeError(name() + ": channel mismatch, expected " + std::to_string(spec_.in_channels) + " got " +
                             std::to_string(x.dim(1)));
        if (x.dim(2) + 2 * spec_.pad < spec_.kernel || x.dim(3) + 2 * spec_.pad < spec_.kernel)
            throw ShapeError(name() + ": kernel larger than padded input " + core::shape_str(x.shape()));
    }

    kernels::PlaneGeom geom(const Tensor& x) const {
        const std::size_t h = x.dim(2), w = x.dim(3);
        return {h,
                w,
                spec_.kernel,
                spec_.kernel,
                spec_.stride,
                spec_.pad,
                kernels::conv_out_size(h, spec_.kernel, spec_.stride, spec_.pad),
                kernels::conv_out_size(w, spec_.kernel, spec_.stride, spec_.pad)};
    }

    ConvSpec spec_;
    Param weight_;
    Param bias_;
    Tensor input_;
};

/// Per-channel spatial convolution; weight (c, 1, k, k), c·k² parameters.
class DepthwiseConv2d : public Layer {
public:
    DepthwiseConv2d(std::string name, std::size_t channels, std::size_t kernel, std::size_t stride, std::size_t pad,
                    Rng& rng)
        : Layer(std::move(name)),
          channels_(channels),
          kernel_(kernel),
          stride_(stride),
          pad_(pad),
          weight_(this->name() + ".weight", he_uniform({channels, 1, kernel, kernel}, kernel * kernel, rng)),
          bias_(this->name() + ".bias", Tensor({channels})) {}

    Tensor forward(const Tensor& x) override {
        if (x.rank() != 4) throw ShapeError(name() + ": expected (b,c,h,w), got " + core::shape_str(x.shape()));
        if (x.dim(1) != channels_)
            throw ShapeError(name() + ": group mismatch, layer has " + std::to_string(channels_) +
                             " groups, input has " + std::to_string(x.dim(1)) + " channels");
        input_ = x;
        mark_forward();
        const auto g = geom(x);
        const std::size_t b = x.dim(0), c = channels_;
        Tensor y({b, c, g.out_h, g.out_w});
        const std::size_t in_plane = g.in_h * g.in_w, out_plane = g.out_h * g.out_w, ksz = kernel_ * kernel_;
        core::parallel_for(b * c, [&](std::size_t job) {
            const std::size_t ch = job % c;
            double* out = y.ptr() + job * out_plane;
            std::fill(out, out + out_plane, bias_.value[ch]);
            kernels::corr_forward(g, x.ptr() + job * in_plane, weight_.value.ptr() + ch * ksz, out);
        });
        return y;
    }

    Tensor backward(const Tensor& dy) override {
        require_forward();
        const Tensor& x = input_;
        const auto g = geom(x);
        const std::size_t b = x.dim(0), c = channels_;
        const std::size_t in_plane = g.in_h * g.in_w, out_plane = g.out_h * g.out_w, ksz = kernel_ * kernel_;
        if (dy.shape() != Shape{b, c, g.out_h, g.out_w})
            throw ShapeError(name() + ".backward", dy.shape(), Shape{b, c, g.out_h, g.out_w});
        Tensor dx(x.shape());
        core::parallel_for(b * c, [&](std::size_t job) {
            const std::size_t ch = job % c;
            kernels::corr_backward_input(g, dy.ptr() + job * out_plane, weight_.value.ptr() + ch * ksz,
                                         dx.ptr() + job * in_plane);
        });
        if (!weight_.frozen) {
            core::parallel_for(c, [&](std::size_t ch) {
                std::vector<double> scratch;
                double bacc = 0.0;
                for (std::size_t n = 0; n < b; ++n) {
                    const std::size_t job = n * c + ch;
                    kernels::corr_backward_kernel(g, x.ptr() + job * in_plane, dy.ptr() + job * out_plane,
                                                  weight_.grad.ptr() + ch * ksz, scratch);
                    const double* p = dy.ptr() + job * out_plane;
                    for (std::size_t i = 0; i < out_plane; ++i) bacc += p[i];
                }
                bias_.grad[ch] += bacc;
            });
        }
        return dx;
    }

    void collect_params(std::vector<Param*>& out) override {
        out.push_back(&weight_);
        out.push_back(&bias_);
    }

    Param& weight() { return weight_; }
    Param& bias() { return bias_; }

private:
    kernels::PlaneGeom geom(const Tensor& x) const {
        const std::size_t h = x.dim(2), w = x.dim(3);
        return {h,      w,    kernel_, kernel_, stride_, pad_, kernels::conv_out_size(h, kernel_, stride_, pad_),
                kernels::conv_out_size(w, kernel_, stride_, pad_)};
    }

    std::size_t channels_, kernel_, stride_, pad_;
    Param weight_;
    Param bias_;
    Tensor input_;
};

struct Conv3dSpec {
    std::size_t in_channels = 1;
    std::size_t out_channels = 1;
    std::size_t kernel_t = 3;
    std::size_t kernel_s = 3;
    std::size_t stride_s = 1;
    std::size_t pad_t = 1;
    std::size_t pad_s = 1;
    std::size_t dilation_t = 1;
};

/// Spatiotemporal cross-correlation over (b, frames, c, h, w).
/// Weight layout (out, in, kt, ks, ks). Temporal stride is 1.
class Conv3d : public Layer {
public:
    Conv3d(std::string name, const Conv3dSpec& spec, Rng& rng)
        : Layer(std::move(name)),
          spec_(spec),
          weight_(this->name() + ".weight",
                  he_uniform({spec.out_channels, spec.in_channels, spec.kernel_t, spec.kernel_s, spec.kernel_s},
                             spec.in_channels * spec.kernel_t * spec.kernel_s * spec.kernel_s, rng)),
          bias_(this->name() + ".bias", Tensor({spec.out_channels})) {}

    std::size_t temporal_extent() const { return spec_.dilation_t * (spec_.kernel_t - 1) + 1; }

    Tensor forward(const Tensor& x) override {
        if (x.rank() != 5) throw ShapeError(name() + ": expected (b,k,c,h,w), got " + core::shape_str(x.shape()));
        if (x.dim(2) != spec_.in_channels)
            throw ShapeError(name() + ": channel mismatch, expected " + std::to_string(spec_.in_channels) + " got " +
                             std::to_string(x.dim(2)));
        if (temporal_extent() > x.dim(1) + 2 * spec_.pad_t)
            throw ShapeError(name() + ": temporal kernel extent " + std::to_string(temporal_extent()) +
                             " exceeds padded frame count " + std::to_string(x.dim(1) + 2 * spec_.pad_t));
        input_ = x;
        mark_forward();
        const auto g = geom(x);
        const std::size_t b = x.dim(0), t_in = x.dim(1), t_out = frames_out(t_in);
        const std::size_t ic = spec_.in_channels, oc = spec_.out_channels, kt = spec_.kernel_t;
        const std::size_t in_plane = g.in_h * g.in_w, out_plane = g.out_h * g.out_w, ksz = g.k_h * g.k_w;
        Tensor y({b, t_out, oc, g.out_h, g.out_w});
        core::parallel_for(b * t_out * oc, [&](std::size_t job) {
            const std::size_t o = job % oc, to = (job / oc) % t_out, n = job / (oc * t_out);
            double* out = y.ptr() + job * out_plane;
            std::fill(out, out + out_plane, bias_.value[o]);
            for (std::size_t c = 0; c < ic; ++c) {
                for (std::size_t k = 0; k < kt; ++k) {
                    std::size_t ti;
                    if (!source_frame(to, k, t_in, ti)) continue;
                    kernels::corr_forward(g, x.ptr() + ((n * t_in + ti) * ic + c) * in_plane,
                                          weight_.value.ptr() + ((o * ic + c) * kt + k) * ksz, out);
                }
            }
        });
        return y;
    }

    Tensor backward(const Tensor& dy) override {
        require_forward();
        const Tensor& x = input_;
        const auto g = geom(x);
        const std::size_t b = x.dim(0), t_in = x.dim(1), t_out = frames_out(t_in);
        const std::size_t ic = spec_.in_channels, oc = spec_.out_channels, kt = spec_.kernel_t;
        const std::size_t in_plane = g.in_h * g.in_w, out_plane = g.out_h * g.out_w, ksz = g.k_h * g.k_w;
        const Shape expect{b, t_out, oc, g.out_h, g.out_w};
        if (dy.shape() != expect) throw ShapeError(name() + ".backward", dy.shape(), expect);
        Tensor dx(x.shape());
        core::parallel_for(b * t_in * ic, [&](std::size_t job) {
            const std::size_t c = job % ic, ti = (job / ic) % t_in, n = job / (ic * t_in);
            double* din = dx.ptr() + job * in_plane;
            for (std::size_t o = 0; o < oc; ++o) {
                for (std::size_t k = 0; k < kt; ++k) {
                    const long to = static_cast<long>(ti + spec_.pad_t) - static_cast<long>(k * spec_.dilation_t);
                    if (to < 0 || to >= static_cast<long>(t_out)) continue;
                    kernels::corr_backward_input(
                        g, dy.ptr() + ((n * t_out + static_cast<std::size_t>(to)) * oc + o) * out_plane,
                        weight_.value.ptr() + ((o * ic + c) * kt + k) * ksz, din);
                }
            }
        });
        if (!weight_.frozen) {
            core::parallel_for(oc * ic, [&](std::size_t job) {
                const std::size_t o = job / ic, c = job % ic;
                std::vector<double> scratch;
                for (std::size_t n = 0; n < b; ++n)
                    for (std::size_t to = 0; to < t_out; ++to)
                        for (std::size_t k = 0; k < kt; ++k) {
                            std::size_t ti;
                            if (!source_frame(to, k, t_in, ti)) continue;
                            kernels::corr_backward_kernel(g, x.ptr() + ((n * t_in + ti) * ic + c) * in_plane,
                                                          dy.ptr() + ((n * t_out + to) * oc + o) * out_plane,
                                                          weight_.grad.ptr() + ((o * ic + c) * kt + k) * ksz, scratch);
                        }
            });
            for (std::size_t o = 0; o < oc; ++o) {
                double acc = 0.0;
                for (std::size_t n = 0; n < b; ++n)
                    for (std::size_t to = 0; to < t_out; ++to) {
                        const double* p = dy.ptr() + ((n * t_out + to) * oc + o) * out_plane;
                        for (std::size_t i = 0; i < out_plane; ++i) acc += p[i];
                    }
                bias_.grad[o] += acc;
            }
        }
        return dx;
    }

    void collect_params(std::vector<Param*>& out) override {
        out.push_back(&weight_);
        out.push_back(&bias_);
    }

    Param& weight() { return weight_; }
    Param& bias() { return bias_; }
    const Conv3dSpec& spec() const { return spec_; }

private:
    std::size_t frames_out(std::size_t t_in) const { return t_in + 2 * spec_.pad_t - temporal_extent() + 1; }

    bool source_frame(std::size_t to, std::size_t k, std::size_t t_in, std::size_t& ti) const {
        const long t = static_cast<long>(to + k * spec_.dilation_t) - static_cast<long>(spec_.pad_t);
        if (t < 0 || t >= static_cast<long>(t_in)) return false;
        ti = static_cast<std::size_t>(t);
        return true;
    }

    kernels::PlaneGeom geom(const Tensor& x) const {
        const std::size_t h = x.dim(3), w = x.dim(4), k = spec_.kernel_s;
        return {h,
                w,
                k,
                k,
                spec_.stride_s,
                spec_.pad_s,
                kernels::conv_out_size(h, k, spec_.stride_s, spec_.pad_s),
                kernels::conv_out_size(w, k, spec_.stride_s, spec_.pad_s)};
    }

    Conv3dSpec spec_;
    Param weight_;
    Param bias_;
    Tensor input_;
};

}  // namespace vfh::nn
