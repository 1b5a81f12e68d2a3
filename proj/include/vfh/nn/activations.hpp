#pragma once

#include <cmath>
#include <string>

#include "vfh/nn/layer.hpp"

namespace vfh::nn {

inline double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

class ReLU : public Layer {
public:
    explicit ReLU(std::string name = "relu") : Layer(std::move(name)) {}

    Tensor forward(const Tensor& x) override {
        input_ = x;
        mark_forward();
        Tensor y(x.shape());
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
        return y;
    }
    Tensor backward(const Tensor& dy) override {
        require_forward();
        if (dy.shape() != input_.shape()) throw ShapeError(name() + ".backward", dy.shape(), input_.shape());
        Tensor dx(dy.shape());
        for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = input_[i] > 0.0 ? dy[i] : 0.0;
        return dx;
    }

private:
    Tensor input_;
};

class LeakyReLU : public Layer {
public:
    explicit LeakyReLU(std::string name = "lrelu", double slope = 0.2) : Layer(std::move(name)), slope_(slope) {}

    Tensor forward(const Tensor& x) override {
        input_ = x;
        mark_forward();
        Tensor y(x.shape());
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : slope_ * x[i];
        return y;
    }
    Tensor backward(const Tensor& dy) override {
        require_forward();
        if (dy.shape() != input_.shape()) throw ShapeError(name() + ".backward", dy.shape(), input_.shape());
        Tensor dx(dy.shape());
        for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = input_[i] > 0.0 ? dy[i] : slope_ * dy[i];
        return dx;
    }

private:
    double slope_;
    Tensor input_;
};

class Sigmoid : public Layer {
public:
    explicit Sigmoid(std::string name = "sigmoid") : Layer(std::move(name)) {}

    Tensor forward(const Tensor& x) override {
        mark_forward();
        output_ = Tensor(x.shape());
        for (std::size_t i = 0; i < x.size(); ++i) output_[i] = sigmoid(x[i]);
        return output_;
    }
    Tensor backward(const Tensor& dy) override {
        require_forward();
        if (dy.shape() != output_.shape()) throw ShapeError(name() + ".backward", dy.shape(), output_.shape());
        Tensor dx(dy.shape());
        for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * output_[i] * (1.0 - output_[i]);
        return dx;
    }

private:
    Tensor output_;
};

}  // namespace vfh::nn
