#pragma once

#include <array>
#include <string>

#include "vfh/nn/activations.hpp"
#include "vfh/nn/channel_ops.hpp"
#include "vfh/nn/conv.hpp"
#include "vfh/nn/squeeze_excitation.hpp"

namespace vfh::nn {

/// Four parallel same-padded convolutions (1x1, 3x3, 5x5, 7x7), concatenated
/// along channels and fused back to `channels` by a 1x1 convolution.
class MultiKernelBlock : public Layer {
public:
    static constexpr std::array<std::size_t, 4> kKernels{1, 3, 5, 7};

    MultiKernelBlock(std::string name, std::size_t channels, std::size_t branch_channels, Rng& rng)
        : Layer(std::move(name)),
          channels_(channels),
          branch_channels_(branch_channels),
          branches_{make_branch(0, rng), make_branch(1, rng), make_branch(2, rng), make_branch(3, rng)},
          fuse_(this->name() + ".fuse", {4 * branch_channels, channels, 1, 1, 0, true}, rng) {
        if (channels < 4) throw ShapeError(this->name() + ": needs at least 4 channels");
    }

    Tensor forward(const Tensor& x) override {
        if (x.rank() != 4 || x.dim(1) != channels_)
            throw ShapeError(name() + ": expected " + std::to_string(channels_) + " channels, got " +
                             core::shape_str(x.shape()));
        mark_forward();
        std::array<Tensor, 4> outs;
        for (std::size_t i = 0; i < 4; ++i) outs[i] = branches_[i].forward(x);
        return fuse_.forward(concat_channels({&outs[0], &outs[1], &outs[2], &outs[3]}));
    }

    Tensor backward(const Tensor& dy) override {
        require_forward();
        const Tensor dcat = fuse_.backward(dy);
        Tensor dx;
        for (std::size_t i = 0; i < 4; ++i) {
            Tensor d = branches_[i].backward(slice_channels(dcat, i * branch_channels_, branch_channels_));
            if (i == 0)
                dx = std::move(d);
            else
                dx += d;
        }
        return dx;
    }

    void collect_params(std::vector<Param*>& out) override {
        for (auto& b : branches_) b.collect_params(out);
        fuse_.collect_params(out);
    }

    Conv2d& branch(std::size_t i) { return branches_.at(i); }
    Conv2d& fuse() { return fuse_; }

private:
    Conv2d make_branch(std::size_t i, Rng& rng) {
        const std::size_t k = kKernels[i];
        return Conv2d(name() + ".k" + std::to_string(k), {channels_, branch_channels_, k, 1, k / 2, true}, rng);
    }

    std::size_t channels_, branch_channels_;
    std::array<Conv2d, 4> branches_;
    Conv2d fuse_;
};

/// One progressive feature block: multi-kernel filtering followed by channel
/// attention (depthwise conv + squeeze-excitation), with an identity skip.
/// y = x + se(dw(relu(mk(x)))).
class PhfeBlock : public Layer {
public:
    PhfeBlock(std::string name, std::size_t channels, std::size_t branch_channels, std::size_t se_reduction, Rng& rng)
        : Layer(std::move(name)),
          multi_(this->name() + ".mk", channels, branch_channels, rng),
          relu_(this->name() + ".relu"),
          depthwise_(this->name() + ".dw", channels, 3, 1, 1, rng),
          se_(this->name() + ".se", channels, se_reduction, rng) {}

    Tensor forward(const Tensor& x) override {
        mark_forward();
        Tensor y = se_.forward(depthwise_.forward(relu_.forward(multi_.forward(x))));
        y += x;
        return y;
    }

    Tensor backward(const Tensor& dy) override {
        require_forward();
        Tensor dx = multi_.backward(relu_.backward(depthwise_.backward(se_.backward(dy))));
        dx += dy;
        return dx;
    }

    void collect_params(std::vector<Param*>& out) override {
        multi_.collect_params(out);
        depthwise_.collect_params(out);
        se_.collect_params(out);
    }

private:
    MultiKernelBlock multi_;
    ReLU relu_;
    DepthwiseConv2d depthwise_;
    SqueezeExcitation se_;
};

}  // namespace vfh::nn
