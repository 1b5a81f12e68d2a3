#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "vfh/core/tensor.hpp"

namespace vfh::losses {

/// Relative weights of the lip, frequency and adversarial terms; the
/// perceptual term always has weight 1.
struct LossWeights {
    double alpha = 0.05;
    double beta = 0.01;
    double gamma = 0.001;
};

struct LossParts {
    double vgg = 0.0;
    double lip = 0.0;
    double freq = 0.0;
    double adv_g = 0.0;
    double adv_d = 0.0;  // reported only; not part of the generator objective
};

struct LossReport {
    std::uint64_t step = 0;
    double l_vgg = 0.0, l_lip = 0.0, l_freq = 0.0, l_adv_g = 0.0, l_adv_d = 0.0;
    double total = 0.0;

    double recomposed(const LossWeights& w) const { return l_vgg + w.alpha * l_lip + w.beta * l_freq + w.gamma * l_adv_g; }
};

/// total = vgg + α·lip + β·freq + γ·adv_g.
inline LossReport total_loss(const LossParts& parts, const LossWeights& w, std::uint64_t step = 0) {
    if (w.alpha < 0.0 || w.beta < 0.0 || w.gamma < 0.0) throw std::invalid_argument("total_loss: negative loss weight");
    const std::pair<const char*, double> terms[] = {
        {"l_vgg", parts.vgg}, {"l_lip", parts.lip}, {"l_freq", parts.freq}, {"l_adv_g", parts.adv_g}, {"l_adv_d", parts.adv_d}};
    for (const auto& [name, v] : terms)
        if (!std::isfinite(v)) throw core::NonFiniteError(std::string("total_loss: non-finite term ") + name);
    LossReport r{step, parts.vgg, parts.lip, parts.freq, parts.adv_g, parts.adv_d, 0.0};
    r.total = r.recomposed(w);
    return r;
}

inline std::string loss_csv_header() { return "step,l_vgg,l_lip,l_freq,l_adv_g,l_adv_d,total"; }

/// Full round-trip precision so that CSVs compare bit-for-bit.
inline std::string loss_csv_row(const LossReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", static_cast<unsigned long long>(r.step),
                  r.l_vgg, r.l_lip, r.l_freq, r.l_adv_g, r.l_adv_d, r.total);
    return buf;
}

}  // namespace vfh::losses
