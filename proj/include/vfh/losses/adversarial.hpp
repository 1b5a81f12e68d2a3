#pragma once

#include <cmath>

#include "vfh/core/tensor.hpp"
#include "vfh/nn/activations.hpp"

namespace vfh::losses {

/// log(1 + e^x) without overflow.
inline double softplus(double x) noexcept { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

/// Non-saturating GAN losses, batch averaged:
///   disc = mean softplus(-real) + mean softplus(fake), gen = mean softplus(-fake).
struct AdversarialLosses {
    double gen = 0.0;
    double disc = 0.0;
    core::Tensor d_disc_real;  // d disc / d real logits
    core::Tensor d_disc_fake;  // d disc / d fake logits
    core::Tensor d_gen_fake;   // d gen / d fake logits
};

inline AdversarialLosses adversarial_losses(const core::Tensor& real_logits, const core::Tensor& fake_logits) {
    core::ensure_finite(real_logits, "adversarial_losses: real logits");
    core::ensure_finite(fake_logits, "adversarial_losses: fake logits");
    AdversarialLosses out{0.0, 0.0, core::Tensor(real_logits.shape()), core::Tensor(fake_logits.shape()),
                          core::Tensor(fake_logits.shape())};
    const double inv_r = 1.0 / static_cast<double>(real_logits.size());
    const double inv_f = 1.0 / static_cast<double>(fake_logits.size());
    double disc_r = 0.0, disc_f = 0.0;
    for (std::size_t i = 0; i < real_logits.size(); ++i) {
        const double r = real_logits[i];
        disc_r += softplus(-r);
        out.d_disc_real[i] = -nn::sigmoid(-r) * inv_r;
    }
    for (std::size_t i = 0; i < fake_logits.size(); ++i) {
        const double f = fake_logits[i];
        disc_f += softplus(f);
        out.gen += softplus(-f);
        out.d_disc_fake[i] = nn::sigmoid(f) * inv_f;
        out.d_gen_fake[i] = -nn::sigmoid(-f) * inv_f;
    }
    out.disc = disc_r * inv_r + disc_f * inv_f;
    out.gen *= inv_f;
    return out;
}

}  // namespace vfh::losses
