#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "vfh/model/checkpoint.hpp"
#include "vfh/nn/layer.hpp"

namespace vfh::harness {

struct AdamParams {
    double lr = 2e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias correction over a fixed list of parameters. Frozen
/// parameters are skipped.
class Adam {
public:
    Adam(std::vector<nn::Param*> params, const AdamParams& hp) : params_(std::move(params)), hp_(hp) {
        for (const nn::Param* p : params_) {
            m_.push_back(core::Tensor::zeros_like(p->value));
            v_.push_back(core::Tensor::zeros_like(p->value));
        }
    }

    void step() {
        ++t_;
        const double c1 = 1.0 - std::pow(hp_.beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(hp_.beta2, static_cast<double>(t_));
        for (std::size_t k = 0; k < params_.size(); ++k) {
            nn::Param& p = *params_[k];
            if (p.frozen) continue;
            core::ensure_finite(p.grad, "adam: gradient of " + p.name);
            double* w = p.value.ptr();
            const double* g = p.grad.ptr();
            double* m = m_[k].ptr();
            double* v = v_[k].ptr();
            for (std::size_t i = 0; i < p.value.size(); ++i) {
                m[i] = hp_.beta1 * m[i] + (1.0 - hp_.beta1) * g[i];
                v[i] = hp_.beta2 * v[i] + (1.0 - hp_.beta2) * g[i] * g[i];
                w[i] -= hp_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + hp_.eps);
            }
        }
    }

    std::uint64_t steps_taken() const { return t_; }

    void store(model::Checkpoint& ck, const std::string& prefix) const {
        for (std::size_t k = 0; k < params_.size(); ++k) {
            ck.tensors.emplace(prefix + "m." + params_[k]->name, m_[k]);
            ck.tensors.emplace(prefix + "v." + params_[k]->name, v_[k]);
        }
        ck.tensors.emplace(prefix + "t", core::Tensor({1}, static_cast<double>(t_)));
    }

    void load(const model::Checkpoint& ck, const std::string& prefix) {
        auto fetch = [&](const std::string& name, core::Tensor& dst) {
            const auto it = ck.tensors.find(name);
            if (it == ck.tensors.end()) throw model::CheckpointError("missing optimizer state " + name);
            if (it->second.shape() != dst.shape()) throw core::ShapeError("checkpoint: " + name, it->second.shape(), dst.shape());
            dst = it->second;
        };
        for (std::size_t k = 0; k < params_.size(); ++k) {
            fetch(prefix + "m." + params_[k]->name, m_[k]);
            fetch(prefix + "v." + params_[k]->name, v_[k]);
        }
        core::Tensor t({1});
        fetch(prefix + "t", t);
        t_ = static_cast<std::uint64_t>(t[0]);
    }

private:
    std::vector<nn::Param*> params_;
    AdamParams hp_;
    std::vector<core::Tensor> m_, v_;
    std::uint64_t t_ = 0;
};

}  // namespace vfh::harness
