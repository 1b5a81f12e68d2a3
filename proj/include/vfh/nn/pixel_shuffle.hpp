#pragma once

#include <string>

#include "vfh/nn/layer.hpp"

namespace vfh::nn {

/// Depth-to-space: out[n][c][y·s + i][x·s + j] = in[n][c·s² + i·s + j][y][x].
inline Tensor pixel_shuffle(const Tensor& x, std::size_t s) {
    if (x.rank() != 4 || s == 0 || x.dim(1) % (s * s) != 0)
        throw ShapeError("pixel_shuffle: channels of " + core::shape_str(x.shape()) + " not divisible by " +
                         std::to_string(s * s));
    const std::size_t b = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3), c = cin / (s * s);
    Tensor out({b, c, h * s, w * s});
    for (std::size_t n = 0; n < b; ++n)
        for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t i = 0; i < s; ++i)
                for (std::size_t j = 0; j < s; ++j) {
                    const double* src = x.ptr() + ((n * cin + ch * s * s + i * s + j) * h) * w;
                    for (std::size_t y = 0; y < h; ++y)
                        for (std::size_t xx = 0; xx < w; ++xx)
                            out.at(n, ch, y * s + i, xx * s + j) = src[y * w + xx];
                }
    return out;
}

/// Space-to-depth, the inverse of pixel_shuffle (and its adjoint).
inline Tensor pixel_unshuffle(const Tensor& y, std::size_t s) {
    if (y.rank() != 4 || s == 0 || y.dim(2) % s != 0 || y.dim(3) % s != 0)
        throw ShapeError("pixel_unshuffle: spatial dims of " + core::shape_str(y.shape()) + " not divisible by " +
                         std::to_string(s));
    const std::size_t b = y.dim(0), c = y.dim(1), h = y.dim(2) / s, w = y.dim(3) / s;
    Tensor out({b, c * s * s, h, w});
    for (std::size_t n = 0; n < b; ++n)
        for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t i = 0; i < s; ++i)
                for (std::size_t j = 0; j < s; ++j) {
                    double* dst = out.ptr() + ((n * c * s * s + ch * s * s + i * s + j) * h) * w;
                    for (std::size_t yy = 0; yy < h; ++yy)
                        for (std::size_t xx = 0; xx < w; ++xx) dst[yy * w + xx] = y.at(n, ch, yy * s + i, xx * s + j);
                }
    return out;
}

class PixelShuffle : public Layer {
public:
    PixelShuffle(std::string name, std::size_t scale) : Layer(std::move(name)), scale_(scale) {}

    Tensor forward(const Tensor& x) override {
        mark_forward();
        return pixel_shuffle(x, scale_);
    }
    Tensor backward(const Tensor& dy) override {
        require_forward();
        return pixel_unshuffle(dy, scale_);
    }

private:
    std::size_t scale_;
};

}  // namespace vfh::nn
