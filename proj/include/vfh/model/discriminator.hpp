#pragma once

#include <string>

#include "vfh/nn/activations.hpp"
#include "vfh/nn/channel_ops.hpp"
#include "vfh/nn/conv.hpp"
#include "vfh/nn/dense.hpp"
#include "vfh/nn/sequential.hpp"

namespace vfh::model {

/// Four 4x4 stride-2 convs with LeakyReLU(0.2), global average pool, then a
/// dense layer to one logit per image. Input (b, 3, size, size).
class Discriminator : public nn::Layer {
public:
    Discriminator(std::size_t image_size, nn::Rng& rng, std::size_t width = 8)
        : nn::Layer("disc"), image_size_(image_size), convs_("disc.convs"), head_("disc.head", 4 * width, 1, rng) {
        const std::size_t chans[5] = {3, width, 2 * width, 4 * width, 4 * width};
        for (std::size_t i = 0; i < 4; ++i) {
            convs_.add<nn::Conv2d>("disc.conv" + std::to_string(i), nn::ConvSpec{chans[i], chans[i + 1], 4, 2, 1, true},
                                   rng);
            convs_.add<nn::LeakyReLU>("disc.lrelu" + std::to_string(i), 0.2);
        }
    }

    /// Returns logits of shape (b, 1).
    core::Tensor forward(const core::Tensor& x) override {
        const core::Shape want{x.rank() ? x.dim(0) : 0, 3, image_size_, image_size_};
        if (x.shape() != want) throw core::ShapeError("discriminator", x.shape(), want);
        mark_forward();
        const core::Tensor f = convs_.forward(x);
        feat_shape_ = f.shape();
        return head_.forward(nn::global_avg_pool(f));
    }

    core::Tensor backward(const core::Tensor& dlogits) override {
        require_forward();
        return convs_.backward(nn::global_avg_pool_backward(head_.backward(dlogits), feat_shape_));
    }

    void collect_params(std::vector<nn::Param*>& out) override {
        convs_.collect_params(out);
        head_.collect_params(out);
    }

private:
    std::size_t image_size_;
    nn::Sequential convs_;
    nn::Dense head_;
    core::Shape feat_shape_;
};

}  // namespace vfh::model
