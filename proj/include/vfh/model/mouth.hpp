#pragma once

#include "vfh/core/tensor.hpp"
#include "vfh/signal/color.hpp"

namespace vfh::model {

/// Fixed mouth box of the 128x128 synthetic faces.
struct MouthBox {
    static constexpr std::size_t kTop = 80, kLeft = 32, kHeight = 48, kWidth = 64;
};

/// (3, H, W) frame -> (1, 48, 64) BT.601 grayscale crop.
inline core::Tensor mouth_crop(const core::Tensor& frame) {
    if (frame.rank() != 3 || frame.dim(0) != 3)
        throw core::ShapeError("mouth_crop: expected (3,h,w), got " + core::shape_str(frame.shape()));
    const std::size_t h = frame.dim(1), w = frame.dim(2);
    if (h < MouthBox::kTop + MouthBox::kHeight || w < MouthBox::kLeft + MouthBox::kWidth)
        throw core::ShapeError("mouth_crop: frame " + core::shape_str(frame.shape()) + " smaller than the mouth box");
    core::Tensor out({1, MouthBox::kHeight, MouthBox::kWidth});
    const std::size_t plane = h * w;
    for (std::size_t y = 0; y < MouthBox::kHeight; ++y)
        for (std::size_t x = 0; x < MouthBox::kWidth; ++x) {
            const std::size_t i = (y + MouthBox::kTop) * w + x + MouthBox::kLeft;
            out[y * MouthBox::kWidth + x] =
                signal::kLumaR * frame[i] + signal::kLumaG * frame[plane + i] + signal::kLumaB * frame[2 * plane + i];
        }
    return out;
}

/// Adds the pullback of a crop gradient (1, 48, 64) into dframe (3, H, W).
inline void mouth_crop_backward(const core::Tensor& dcrop, core::Tensor& dframe) {
    const std::size_t h = dframe.dim(1), w = dframe.dim(2), plane = h * w;
    for (std::size_t y = 0; y < MouthBox::kHeight; ++y)
        for (std::size_t x = 0; x < MouthBox::kWidth; ++x) {
            const std::size_t i = (y + MouthBox::kTop) * w + x + MouthBox::kLeft;
            const double g = dcrop[y * MouthBox::kWidth + x];
            dframe[i] += signal::kLumaR * g;
            dframe[plane + i] += signal::kLumaG * g;
            dframe[2 * plane + i] += signal::kLumaB * g;
        }
}

}  // namespace vfh::model
