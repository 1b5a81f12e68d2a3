#pragma once

#include <string>

#include "vfh/core/ops.hpp"
#include "vfh/nn/layer.hpp"

namespace vfh::nn {

/// y = x·Wᵀ + b over (batch, features). Weight layout (out, in).
class Dense : public Layer {
public:
    Dense(std::string name, std::size_t in, std::size_t out, Rng& rng, double init_gain = 1.0)
        : Layer(std::move(name)),
          in_(in),
          out_(out),
          weight_(this->name() + ".weight", he_uniform({out, in}, in, rng, init_gain)),
          bias_(this->name() + ".bias", Tensor({out})) {}

    Tensor forward(const Tensor& x) override {
        if (x.rank() != 2 || x.dim(1) != in_)
            throw ShapeError(name() + ": expected (b," + std::to_string(in_) + "), got " + core::shape_str(x.shape()));
        input_ = x;
        mark_forward();
        Tensor y = core::matmul(x, core::transpose(weight_.value));
        const std::size_t b = x.dim(0);
        for (std::size_t n = 0; n < b; ++n)
            for (std::size_t o = 0; o < out_; ++o) y[n * out_ + o] += bias_.value[o];
        return y;
    }

    Tensor backward(const Tensor& dy) override {
        require_forward();
        const std::size_t b = input_.dim(0);
        if (dy.shape() != Shape{b, out_}) throw ShapeError(name() + ".backward", dy.shape(), Shape{b, out_});
        Tensor dx = core::matmul(dy, weight_.value);
        if (!weight_.frozen) {
            weight_.grad += core::matmul(core::transpose(dy), input_);
            for (std::size_t o = 0; o < out_; ++o) {
                double acc = 0.0;
                for (std::size_t n = 0; n < b; ++n) acc += dy[n * out_ + o];
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

private:
    std::size_t in_, out_;
    Param weight_;
    Param bias_;
    Tensor input_;
};

}  // namespace vfh::nn
