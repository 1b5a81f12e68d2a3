#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vfh/core/rng.hpp"
#include "vfh/core/tensor.hpp"

namespace vfh::nn {

using core::Rng;
using core::Shape;
using core::ShapeError;
using core::Tensor;

/// A named trainable tensor and its accumulated gradient.
struct Param {
    std::string name;
    Tensor value;
    Tensor grad;
    bool frozen = false;

    Param() = default;
    Param(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(Tensor::zeros_like(value)) {}

    void zero_grad() { grad.fill(0.0); }
};

/// He-uniform initialisation: U(-sqrt(6/fan_in), sqrt(6/fan_in)).
inline Tensor he_uniform(Shape shape, std::size_t fan_in, Rng& rng, double gain = 1.0) {
    const double bound = gain * std::sqrt(6.0 / static_cast<double>(fan_in));
    return core::uniform_tensor(std::move(shape), rng, -bound, bound);
}

/// Base for differentiable layers. forward() caches what backward() needs;
/// backward() accumulates parameter gradients and returns the input gradient.
class Layer {
public:
    explicit Layer(std::string name) : name_(std::move(name)) {}
    virtual ~Layer() = default;

    virtual Tensor forward(const Tensor& x) = 0;
    virtual Tensor backward(const Tensor& dy) = 0;
    virtual void collect_params(std::vector<Param*>& /*out*/) {}

    std::vector<Param*> parameters() {
        std::vector<Param*> out;
        collect_params(out);
        return out;
    }
    void zero_grad() {
        for (Param* p : parameters()) p->zero_grad();
    }
    void set_trainable(bool trainable) {
        for (Param* p : parameters()) p->frozen = !trainable;
    }

    const std::string& name() const noexcept { return name_; }

protected:
    void mark_forward() noexcept { has_forward_ = true; }
    void require_forward() const {
        if (!has_forward_) throw std::logic_error(name_ + ": backward called before forward");
    }

private:
    std::string name_;
    bool has_forward_ = false;
};

}  // namespace vfh::nn
