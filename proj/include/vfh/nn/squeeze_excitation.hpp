#pragma once

#include <string>

#include "vfh/nn/activations.hpp"
#include "vfh/nn/channel_ops.hpp"
#include "vfh/nn/dense.hpp"

namespace vfh::nn {

/// Channel gating: pool -> dense(c -> c/r) -> relu -> dense(c/r -> c) -> sigmoid,
/// then each input channel is scaled by its gate.
class SqueezeExcitation : public Layer {
public:
    SqueezeExcitation(std::string name, std::size_t channels, std::size_t reduction, Rng& rng)
        : Layer(std::move(name)),
          channels_(channels),
          squeeze_((check(channels, reduction), this->name() + ".squeeze"), channels, channels / reduction, rng),
          relu_(this->name() + ".relu"),
          excite_(this->name() + ".excite", channels / reduction, channels, rng),
          gate_act_(this->name() + ".gate") {}

    Tensor forward(const Tensor& x) override {
        if (x.rank() != 4 || x.dim(1) != channels_)
            throw ShapeError(name() + ": expected " + std::to_string(channels_) + " channels, got " +
                             core::shape_str(x.shape()));
        input_ = x;
        mark_forward();
        gates_ = gate_act_.forward(excite_.forward(relu_.forward(squeeze_.forward(global_avg_pool(x)))));
        Tensor y(x.shape());
        const std::size_t plane = x.dim(2) * x.dim(3);
        for (std::size_t i = 0; i < gates_.size(); ++i) {
            const double g = gates_[i];
            for (std::size_t j = 0; j < plane; ++j) y[i * plane + j] = g * x[i * plane + j];
        }
        return y;
    }

    Tensor backward(const Tensor& dy) override {
        require_forward();
        if (dy.shape() != input_.shape()) throw ShapeError(name() + ".backward", dy.shape(), input_.shape());
        const std::size_t plane = input_.dim(2) * input_.dim(3);
        Tensor dx(input_.shape());
        Tensor dgate(gates_.shape());
        for (std::size_t i = 0; i < gates_.size(); ++i) {
            const double g = gates_[i];
            double acc = 0.0;
            for (std::size_t j = 0; j < plane; ++j) {
                dx[i * plane + j] = g * dy[i * plane + j];
                acc += dy[i * plane + j] * input_[i * plane + j];
            }
            dgate[i] = acc;
        }
        const Tensor dpool = squeeze_.backward(relu_.backward(excite_.backward(gate_act_.backward(dgate))));
        dx += global_avg_pool_backward(dpool, input_.shape());
        return dx;
    }

    void collect_params(std::vector<Param*>& out) override {
        squeeze_.collect_params(out);
        excite_.collect_params(out);
    }

    /// Gates from the last forward, shape (b, c).
    const Tensor& gates() const { return gates_; }
    Dense& squeeze() { return squeeze_; }
    Dense& excite() { return excite_; }

private:
    static void check(std::size_t channels, std::size_t reduction) {
        if (reduction == 0 || channels % reduction != 0 || channels / reduction == 0)
            throw ShapeError("squeeze_excitation: channels " + std::to_string(channels) + " not divisible by reduction " +
                             std::to_string(reduction));
    }

    std::size_t channels_;
    Dense squeeze_;
    ReLU relu_;
    Dense excite_;
    Sigmoid gate_act_;
    Tensor input_;
    Tensor gates_;
};

}  // namespace vfh::nn
