#pragma once

#include <cmath>

#include "vfh/losses/frequency.hpp"
#include "vfh/model/surrogates.hpp"

namespace vfh::losses {

/// Mean squared distance between perceptual-net tap features of gt and sr,
/// both (b, 3, H, W). Gradient is with respect to sr.
inline LossGrad perceptual_loss(model::PerceptNet& net, const Tensor& gt, const Tensor& sr) {
    if (gt.shape() != sr.shape()) throw ShapeError("perceptual_loss", gt.shape(), sr.shape());
    const Tensor fg = net.forward(gt);
    const Tensor fs = net.forward(sr);
    const double inv = 1.0 / static_cast<double>(fs.size());
    Tensor d(fs.shape());
    double acc = 0.0;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const double e = fs[i] - fg[i];
        acc += e * e;
        d[i] = 2.0 * inv * e;
    }
    return {acc * inv, net.backward(d)};
}

/// Lip-reading feature loss between mouth-crop sequences (b, k, 1, 48, 64):
/// for each tap, (1/(w·h)) Σ_{x,y} |ℵ(gt) - ℵ(sr)| averaged over batch,
/// frames and channels; the taps are summed. Gradient is with respect to sr.
inline LossGrad lip_reading_loss(model::SurrogateLipNet& net, const Tensor& gt_frames, const Tensor& sr_frames) {
    if (gt_frames.shape() != sr_frames.shape())
        throw ShapeError("lip_reading_loss: sequence length mismatch", gt_frames.shape(), sr_frames.shape());
    const auto tg = net.forward(gt_frames);
    const auto ts = net.forward(sr_frames);
    LossGrad out;
    std::vector<Tensor> dtaps;
    for (std::size_t t = 0; t < ts.size(); ++t) {
        const double inv = 1.0 / static_cast<double>(ts[t].size());
        Tensor d(ts[t].shape());
        double acc = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            const double e = ts[t][i] - tg[t][i];
            acc += std::abs(e);
            d[i] = e > 0.0 ? inv : (e < 0.0 ? -inv : 0.0);
        }
        out.value += acc * inv;
        dtaps.push_back(std::move(d));
    }
    out.grad = net.backward(dtaps);
    return out;
}

}  // namespace vfh::losses
