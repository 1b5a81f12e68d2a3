#pragma once

#include <memory>
#include <string>
#include <vector>

#include "vfh/nn/layer.hpp"

namespace vfh::nn {

/// Chain of layers applied in order; backward runs them in reverse.
class Sequential : public Layer {
public:
    explicit Sequential(std::string name) : Layer(std::move(name)) {}

    template <typename L, typename... Args>
    L& add(Args&&... args) {
        auto layer = std::make_unique<L>(std::forward<Args>(args)...);
        L& ref = *layer;
        layers_.push_back(std::move(layer));
        return ref;
    }

    Tensor forward(const Tensor& x) override {
        mark_forward();
        Tensor y = x;
        for (auto& l : layers_) y = l->forward(y);
        return y;
    }

    Tensor backward(const Tensor& dy) override {
        require_forward();
        Tensor d = dy;
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) d = (*it)->backward(d);
        return d;
    }

    void collect_params(std::vector<Param*>& out) override {
        for (auto& l : layers_) l->collect_params(out);
    }

    std::size_t size() const { return layers_.size(); }
    Layer& at(std::size_t i) { return *layers_.at(i); }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

}  // namespace vfh::nn
