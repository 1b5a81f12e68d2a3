#pragma once

#include <vector>

#include "vfh/core/grad_check.hpp"
#include "vfh/nn/layer.hpp"

namespace vfh::nn {

/// Finite-difference checks of a layer under the scalar probe loss
/// L(y) = Σ R ⊙ y with a fixed random R. Returns the max relative error.
class LayerChecker {
public:
    LayerChecker(Layer& layer, Tensor input, Rng& rng, double eps = 1e-5, std::size_t max_points = 48)
        : layer_(layer), input_(std::move(input)), rng_(rng), eps_(eps), max_points_(max_points) {
        const Tensor y = layer_.forward(input_);
        probe_ = core::uniform_tensor(y.shape(), rng_);
    }

    double input_error() {
        core::ValueAndGrad f = [this](const Tensor& x) {
            const Tensor y = layer_.forward(x);
            const double v = core::dot(probe_, y);
            layer_.zero_grad();
            return std::pair<double, Tensor>{v, layer_.backward(probe_)};
        };
        const auto idx = core::sample_indices(input_.size(), max_points_, rng_);
        return core::grad_check(f, input_, eps_, idx);
    }

    double param_error(Param& p) {
        const Tensor saved = p.value;
        core::ValueAndGrad f = [this, &p](const Tensor& w) {
            p.value = w;
            const Tensor y = layer_.forward(input_);
            const double v = core::dot(probe_, y);
            layer_.zero_grad();
            layer_.backward(probe_);
            return std::pair<double, Tensor>{v, p.grad};
        };
        const auto idx = core::sample_indices(saved.size(), max_points_, rng_);
        const double err = core::grad_check(f, saved, eps_, idx);
        p.value = saved;
        return err;
    }

    /// Worst error over the input and every parameter.
    double all_errors() {
        double worst = input_error();
        for (Param* p : layer_.parameters()) worst = std::max(worst, param_error(*p));
        return worst;
    }

private:
    Layer& layer_;
    Tensor input_;
    Rng& rng_;
    double eps_;
    std::size_t max_points_;
    Tensor probe_;
};

}  // namespace vfh::nn
