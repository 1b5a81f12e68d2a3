#pragma once

#include <cstddef>

#include "vfh/core/tensor.hpp"

namespace vfh::signal {

// BT.601 full-range luma.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

/// (h, w, 3) -> (h, w).
inline core::Tensor rgb_to_y(const core::Tensor& image) {
    if (image.rank() != 3 || image.dim(2) != 3)
        throw core::ShapeError("rgb_to_y: expected (h,w,3), got " + core::shape_str(image.shape()));
    const std::size_t h = image.dim(0), w = image.dim(1);
    core::Tensor y({h, w});
    for (std::size_t i = 0; i < h * w; ++i)
        y[i] = kLumaR * image[3 * i] + kLumaG * image[3 * i + 1] + kLumaB * image[3 * i + 2];
    return y;
}

/// (3, h, w) -> (h, w).
inline core::Tensor luma_chw(const core::Tensor& image) {
    if (image.rank() != 3 || image.dim(0) != 3)
        throw core::ShapeError("luma_chw: expected (3,h,w), got " + core::shape_str(image.shape()));
    const std::size_t h = image.dim(1), w = image.dim(2), n = h * w;
    core::Tensor y({h, w});
    for (std::size_t i = 0; i < n; ++i) y[i] = kLumaR * image[i] + kLumaG * image[n + i] + kLumaB * image[2 * n + i];
    return y;
}

/// Adds the pullback of a luma gradient (h, w) into an RGB gradient (3, h, w).
inline void luma_chw_backward(const core::Tensor& dy, core::Tensor& dimage) {
    const std::size_t n = dy.size();
    for (std::size_t i = 0; i < n; ++i) {
        dimage[i] += kLumaR * dy[i];
        dimage[n + i] += kLumaG * dy[i];
        dimage[2 * n + i] += kLumaB * dy[i];
    }
}

inline core::Tensor chw_to_hwc(const core::Tensor& t) {
    const std::size_t c = t.dim(0), h = t.dim(1), w = t.dim(2);
    core::Tensor out({h, w, c});
    for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t i = 0; i < h * w; ++i) out[i * c + ch] = t[ch * h * w + i];
    return out;
}

inline core::Tensor hwc_to_chw(const core::Tensor& t) {
    const std::size_t h = t.dim(0), w = t.dim(1), c = t.dim(2);
    core::Tensor out({c, h, w});
    for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t i = 0; i < h * w; ++i) out[ch * h * w + i] = t[i * c + ch];
    return out;
}

}  // namespace vfh::signal
