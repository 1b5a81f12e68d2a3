#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vfh/signal/color.hpp"
#include "vfh/signal/dft2.hpp"

namespace vfh::losses {

using core::Shape;
using core::ShapeError;
using core::Tensor;

/// A scalar loss and its gradient with respect to the generated input.
struct LossGrad {
    double value = 0.0;
    Tensor grad;
};

namespace detail {

inline void check_pair(const Tensor& gt, const Tensor& sr, const char* op) {
    if (gt.rank() != 2) throw ShapeError(std::string(op) + ": expected (h,w) planes, got " + core::shape_str(gt.shape()));
    if (gt.shape() != sr.shape()) throw ShapeError(op, gt.shape(), sr.shape());
}

}  // namespace detail

/// (1/(wh)) Σ |F(u,v) - F*(u,v)|² where F* is the spectrum of sr.
inline LossGrad freq_mse_grad(const Tensor& gt, const Tensor& sr) {
    detail::check_pair(gt, sr, "freq_mse");
    const auto fg = signal::dft2(gt), fs = signal::dft2(sr);
    const double inv = 1.0 / static_cast<double>(gt.size());
    Tensor dre(gt.shape()), dim(gt.shape());
    double acc = 0.0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        const double er = fs.real[i] - fg.real[i], ei = fs.imag[i] - fg.imag[i];
        acc += er * er + ei * ei;
        dre[i] = 2.0 * inv * er;
        dim[i] = 2.0 * inv * ei;
    }
    return {acc * inv, signal::dft2_backward(dre, dim)};
}

inline double freq_mse(const Tensor& gt, const Tensor& sr) { return freq_mse_grad(gt, sr).value; }

/// m(u,v) = |F - F*| / max |F - F*|, all zeros when the spectra agree.
inline Tensor weight_matrix(const signal::Spectrum& gt, const signal::Spectrum& sr) {
    if (gt.real.shape() != sr.real.shape()) throw ShapeError("weight_matrix", gt.real.shape(), sr.real.shape());
    Tensor m(gt.real.shape());
    double mx = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        m[i] = std::hypot(gt.real[i] - sr.real[i], gt.imag[i] - sr.imag[i]);
        mx = std::max(mx, m[i]);
    }
    if (mx > 0.0) m *= 1.0 / mx;
    return m;
}

/// (1/(wh)) Σ m(u,v)·|F - F*|. The weight matrix is a constant for the
/// gradient; pass `fixed_m` to evaluate with a given matrix instead of the one
/// computed from the current pair.
inline LossGrad weighted_freq_loss_grad(const Tensor& gt, const Tensor& sr, const Tensor* fixed_m = nullptr) {
    detail::check_pair(gt, sr, "weighted_freq_loss");
    const auto fg = signal::dft2(gt), fs = signal::dft2(sr);
    const Tensor m = fixed_m ? *fixed_m : weight_matrix(fg, fs);
    if (m.shape() != gt.shape()) throw ShapeError("weighted_freq_loss: weight matrix", m.shape(), gt.shape());
    const double inv = 1.0 / static_cast<double>(gt.size());
    Tensor dre(gt.shape()), dim(gt.shape());
    double acc = 0.0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        const double er = fs.real[i] - fg.real[i], ei = fs.imag[i] - fg.imag[i];
        const double mod = std::hypot(er, ei);
        acc += m[i] * mod;
        if (mod > 0.0) {
            dre[i] = inv * m[i] * er / mod;
            dim[i] = inv * m[i] * ei / mod;
        }
    }
    return {acc * inv, signal::dft2_backward(dre, dim)};
}

inline double weighted_freq_loss(const Tensor& gt, const Tensor& sr) { return weighted_freq_loss_grad(gt, sr).value; }

enum class FreqMode { Luma, PerChannel };

/// Applies a plane loss to (b, 3, h, w) images: on luma, or averaged over
/// the three channels. The value is the batch mean.
template <typename PlaneLoss>
LossGrad image_freq_loss(const Tensor& gt, const Tensor& sr, FreqMode mode, PlaneLoss&& plane_loss) {
    if (gt.rank() != 4 || gt.dim(1) != 3) throw ShapeError("freq loss: expected (b,3,h,w), got " + core::shape_str(gt.shape()));
    if (gt.shape() != sr.shape()) throw ShapeError("freq loss", gt.shape(), sr.shape());
    const std::size_t b = gt.dim(0), h = gt.dim(2), w = gt.dim(3), plane = h * w;
    LossGrad out{0.0, Tensor(sr.shape())};
    const double inv_b = 1.0 / static_cast<double>(b);
    for (std::size_t n = 0; n < b; ++n) {
        Tensor g_img({3, h, w}), s_img({3, h, w});
        std::copy_n(gt.ptr() + n * 3 * plane, 3 * plane, g_img.ptr());
        std::copy_n(sr.ptr() + n * 3 * plane, 3 * plane, s_img.ptr());
        Tensor d_img({3, h, w});
        if (mode == FreqMode::Luma) {
            LossGrad r = plane_loss(signal::luma_chw(g_img), signal::luma_chw(s_img));
            out.value += r.value * inv_b;
            r.grad *= inv_b;
            signal::luma_chw_backward(r.grad, d_img);
        } else {
            for (std::size_t c = 0; c < 3; ++c) {
                Tensor gp({h, w}), sp({h, w});
                std::copy_n(g_img.ptr() + c * plane, plane, gp.ptr());
                std::copy_n(s_img.ptr() + c * plane, plane, sp.ptr());
                const LossGrad r = plane_loss(gp, sp);
                out.value += r.value * inv_b / 3.0;
                for (std::size_t i = 0; i < plane; ++i) d_img[c * plane + i] = r.grad[i] * inv_b / 3.0;
            }
        }
        std::copy_n(d_img.ptr(), 3 * plane, out.grad.ptr() + n * 3 * plane);
    }
    return out;
}

/// With `fixed_m`, plane k (in batch, then channel order) uses (*fixed_m)[k]
/// as its weight matrix.
inline LossGrad batch_weighted_freq_loss(const Tensor& gt, const Tensor& sr, FreqMode mode = FreqMode::Luma,
                                         const std::vector<Tensor>* fixed_m = nullptr) {
    std::size_t k = 0;
    return image_freq_loss(gt, sr, mode, [&](const Tensor& g, const Tensor& s) {
        if (!fixed_m) return weighted_freq_loss_grad(g, s);
        if (k >= fixed_m->size()) throw std::invalid_argument("batch_weighted_freq_loss: too few weight matrices");
        return weighted_freq_loss_grad(g, s, &(*fixed_m)[k++]);
    });
}

/// The weight matrices batch_weighted_freq_loss would use, in plane order.
inline std::vector<Tensor> batch_weight_matrices(const Tensor& gt, const Tensor& sr, FreqMode mode = FreqMode::Luma) {
    std::vector<Tensor> out;
    image_freq_loss(gt, sr, mode, [&](const Tensor& g, const Tensor& s) {
        out.push_back(weight_matrix(signal::dft2(g), signal::dft2(s)));
        return LossGrad{0.0, Tensor(g.shape())};
    });
    return out;
}

inline LossGrad batch_freq_mse(const Tensor& gt, const Tensor& sr, FreqMode mode = FreqMode::Luma) {
    return image_freq_loss(gt, sr, mode, [](const Tensor& g, const Tensor& s) { return freq_mse_grad(g, s); });
}

}  // namespace vfh::losses
