#pragma once

#include <array>
#include <string>
#include <vector>

#include "vfh/nn/activations.hpp"
#include "vfh/nn/conv.hpp"
#include "vfh/nn/sequential.hpp"

namespace vfh::model {

/// Frozen random-weight stand-in for a pretrained perceptual network.
/// Four conv+ReLU stages (the last three stride 2); the loss taps stage 3.
class PerceptNet : public nn::Layer {
public:
    explicit PerceptNet(nn::Rng& rng) : nn::Layer("percept"), tap_("percept.tap"), tail_("percept.tail") {
        tap_.add<nn::Conv2d>("percept.conv0", nn::ConvSpec{3, 8, 3, 1, 1, true}, rng);
        tap_.add<nn::ReLU>("percept.relu0");
        tap_.add<nn::Conv2d>("percept.conv1", nn::ConvSpec{8, 16, 3, 2, 1, true}, rng);
        tap_.add<nn::ReLU>("percept.relu1");
        tap_.add<nn::Conv2d>("percept.conv2", nn::ConvSpec{16, 32, 3, 2, 1, true}, rng);
        tap_.add<nn::ReLU>("percept.relu2");
        tail_.add<nn::Conv2d>("percept.conv3", nn::ConvSpec{32, 32, 3, 2, 1, true}, rng);
        tail_.add<nn::ReLU>("percept.relu3");
        set_trainable(false);
    }

    /// Stage-3 features of (b, 3, H, W): (b, 32, H/4, W/4).
    core::Tensor forward(const core::Tensor& x) override {
        if (x.rank() != 4 || x.dim(1) != 3)
            throw core::ShapeError("percept: expected (b,3,h,w), got " + core::shape_str(x.shape()));
        mark_forward();
        return tap_.forward(x);
    }
    core::Tensor backward(const core::Tensor& dy) override {
        require_forward();
        return tap_.backward(dy);
    }

    /// All four stages; not used by the loss.
    core::Tensor forward_full(const core::Tensor& x) { return tail_.forward(forward(x)); }

    void collect_params(std::vector<nn::Param*>& out) override {
        tap_.collect_params(out);
        tail_.collect_params(out);
    }

private:
    nn::Sequential tap_, tail_;
};

/// Frozen stand-in for a lip-reading network over grayscale mouth crops
/// (b, k, 1, 48, 64):
///   stage 1: Conv3d front end, per-frame residual block, stride-2 conv
///            -> tap 1 (b, k, 16, 12, 16)
///   stage 2: three temporal convs with dilation 1, 2, 4, summed, ReLU
///            -> tap 2 (b, k, 16, 12, 16)
class SurrogateLipNet {
public:
    static constexpr std::size_t kTaps = 2;
    static constexpr std::size_t kCropH = 48, kCropW = 64;

    explicit SurrogateLipNet(nn::Rng& rng)
        : front_("lip.front", nn::Conv3dSpec{1, 8, 3, 5, 2, 1, 2, 1}, rng),
          front_relu_("lip.front.relu"),
          res_a_("lip.res.a", nn::ConvSpec{8, 8, 3, 1, 1, true}, rng),
          res_relu_a_("lip.res.relu_a"),
          res_b_("lip.res.b", nn::ConvSpec{8, 8, 3, 1, 1, true}, rng),
          res_relu_out_("lip.res.relu_out"),
          down_("lip.down", nn::ConvSpec{8, 16, 3, 2, 1, true}, rng),
          down_relu_("lip.down.relu"),
          temporal_{nn::Conv3d("lip.tcn.d1", nn::Conv3dSpec{16, 16, 3, 1, 1, 1, 0, 1}, rng),
                    nn::Conv3d("lip.tcn.d2", nn::Conv3dSpec{16, 16, 3, 1, 1, 2, 0, 2}, rng),
                    nn::Conv3d("lip.tcn.d4", nn::Conv3dSpec{16, 16, 3, 1, 1, 4, 0, 4}, rng)},
          temporal_relu_("lip.tcn.relu") {
        for (nn::Param* p : parameters()) p->frozen = true;
    }

    /// Returns {tap1, tap2}.
    std::vector<core::Tensor> forward(const core::Tensor& frames) {
        if (frames.rank() != 5 || frames.dim(2) != 1 || frames.dim(3) != kCropH || frames.dim(4) != kCropW)
            throw core::ShapeError("lipnet: expected (b,k,1,48,64), got " + core::shape_str(frames.shape()));
        b_ = frames.dim(0);
        k_ = frames.dim(1);
        const core::Tensor f = front_relu_.forward(front_.forward(frames));
        front_shape_ = f.shape();
        const core::Tensor x = f.reshaped({b_ * k_, f.dim(2), f.dim(3), f.dim(4)});
        core::Tensor r = res_b_.forward(res_relu_a_.forward(res_a_.forward(x)));
        r += x;
        const core::Tensor y = down_relu_.forward(down_.forward(res_relu_out_.forward(r)));
        core::Tensor tap1 = y.reshaped({b_, k_, y.dim(1), y.dim(2), y.dim(3)});
        core::Tensor t = temporal_[0].forward(tap1);
        for (std::size_t i = 1; i < temporal_.size(); ++i) t += temporal_[i].forward(tap1);
        core::Tensor tap2 = temporal_relu_.forward(t);
        has_forward_ = true;
        return {std::move(tap1), std::move(tap2)};
    }

    /// Gradient w.r.t. the input frames given gradients for both taps.
    core::Tensor backward(const std::vector<core::Tensor>& dtaps) {
        if (!has_forward_) throw std::logic_error("lipnet: backward called before forward");
        if (dtaps.size() != kTaps) throw std::invalid_argument("lipnet: expected one gradient per tap");
        const core::Tensor dt = temporal_relu_.backward(dtaps[1]);
        core::Tensor d1 = dtaps[0];
        for (auto& conv : temporal_) d1 += conv.backward(dt);
        const core::Tensor dy = d1.reshaped({b_ * k_, d1.dim(2), d1.dim(3), d1.dim(4)});
        const core::Tensor dr = res_relu_out_.backward(down_.backward(down_relu_.backward(dy)));
        core::Tensor dx = res_a_.backward(res_relu_a_.backward(res_b_.backward(dr)));
        dx += dr;
        return front_.backward(front_relu_.backward(dx.reshaped(front_shape_)));
    }

    std::vector<nn::Param*> parameters() {
        std::vector<nn::Param*> out;
        front_.collect_params(out);
        res_a_.collect_params(out);
        res_b_.collect_params(out);
        down_.collect_params(out);
        for (auto& c : temporal_) c.collect_params(out);
        return out;
    }

private:
    nn::Conv3d front_;
    nn::ReLU front_relu_;
    nn::Conv2d res_a_;
    nn::ReLU res_relu_a_;
    nn::Conv2d res_b_;
    nn::ReLU res_relu_out_;
    nn::Conv2d down_;
    nn::ReLU down_relu_;
    std::array<nn::Conv3d, 3> temporal_;
    nn::ReLU temporal_relu_;
    bool has_forward_ = false;
    std::size_t b_ = 0, k_ = 0;
    core::Shape front_shape_;
};

}  // namespace vfh::model
