#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "vfh/core/tensor.hpp"

namespace vfh::signal {

/// Keys cubic convolution kernel, a = -0.5.
inline double cubic_kernel(double x) {
    constexpr double a = -0.5;
    x = std::abs(x);
    if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
    return 0.0;
}

/// Per-output-sample taps along one axis. Downscaling widens the kernel by
/// 1/scale (antialiased); out-of-range taps clamp to the edge sample.
struct AxisResampler {
    struct Tap {
        std::size_t index;
        double weight;
    };
    std::size_t in_size = 0;
    std::size_t out_size = 0;
    std::vector<std::vector<Tap>> taps;
    std::vector<std::size_t> anchor;  // tap with the largest weight

    AxisResampler() = default;
    AxisResampler(std::size_t in, std::size_t out) : in_size(in), out_size(out), taps(out), anchor(out) {
        if (in == 0 || out == 0) throw std::invalid_argument("bicubic_resize: empty source or target");
        const double scale = static_cast<double>(out) / static_cast<double>(in);
        const double stretch = scale < 1.0 ? 1.0 / scale : 1.0;
        const double support = 2.0 * stretch;
        for (std::size_t o = 0; o < out; ++o) {
            const double centre = (static_cast<double>(o) + 0.5) / scale - 0.5;
            const auto first = static_cast<long>(std::floor(centre - support)) + 1;
            const auto last = static_cast<long>(std::ceil(centre + support)) - 1;
            std::vector<Tap> row;
            double total = 0.0;
            for (long i = first; i <= last; ++i) {
                const double wgt = cubic_kernel((centre - static_cast<double>(i)) / stretch);
                if (wgt == 0.0) continue;
                const long clamped = std::clamp<long>(i, 0, static_cast<long>(in) - 1);
                const auto idx = static_cast<std::size_t>(clamped);
                auto it = std::find_if(row.begin(), row.end(), [&](const Tap& t) { return t.index == idx; });
                if (it == row.end())
                    row.push_back({idx, wgt});
                else
                    it->weight += wgt;
                total += wgt;
            }
            std::size_t best = 0;
            for (std::size_t t = 0; t < row.size(); ++t) {
                row[t].weight /= total;
                if (row[t].weight > row[best].weight) best = t;
            }
            taps[o] = std::move(row);
            anchor[o] = best;
        }
    }

    /// out[o] = Σ w·in[i], evaluated as in[anchor] + Σ w·(in[i] - in[anchor])
    /// so constant inputs come back exactly.
    double apply(const double* in, std::size_t stride, std::size_t o) const {
        const auto& row = taps[o];
        const double base = in[row[anchor[o]].index * stride];
        double acc = 0.0;
        for (const Tap& t : row) acc += t.weight * (in[t.index * stride] - base);
        return base + acc;
    }
};

/// Resizes a single (h, w) plane held at `src` (row-major) into `dst`.
inline void resize_plane(const double* src, double* dst, const AxisResampler& rows, const AxisResampler& cols) {
    const std::size_t in_w = cols.in_size, out_h = rows.out_size, out_w = cols.out_size;
    const std::size_t in_h = rows.in_size;
    std::vector<double> tmp(in_h * out_w);
    for (std::size_t y = 0; y < in_h; ++y)
        for (std::size_t x = 0; x < out_w; ++x) tmp[y * out_w + x] = cols.apply(src + y * in_w, 1, x);
    for (std::size_t y = 0; y < out_h; ++y)
        for (std::size_t x = 0; x < out_w; ++x) dst[y * out_w + x] = rows.apply(tmp.data() + x, out_w, y);
}

/// Transpose of resize_plane: accumulates into `dsrc` (in_h × in_w).
inline void resize_plane_backward(const double* ddst, double* dsrc, const AxisResampler& rows,
                                  const AxisResampler& cols) {
    const std::size_t in_w = cols.in_size, in_h = rows.in_size, out_h = rows.out_size, out_w = cols.out_size;
    std::vector<double> tmp(in_h * out_w, 0.0);
    for (std::size_t y = 0; y < out_h; ++y)
        for (const auto& t : rows.taps[y])
            for (std::size_t x = 0; x < out_w; ++x) tmp[t.index * out_w + x] += t.weight * ddst[y * out_w + x];
    for (std::size_t y = 0; y < in_h; ++y)
        for (std::size_t x = 0; x < out_w; ++x)
            for (const auto& t : cols.taps[x]) dsrc[y * in_w + t.index] += t.weight * tmp[y * out_w + x];
}

/// Bicubic resize of an (h, w, c) image.
inline core::Tensor bicubic_resize(const core::Tensor& image, std::size_t out_h, std::size_t out_w) {
    if (image.rank() != 3) throw core::ShapeError("bicubic_resize: expected (h,w,c), got " + core::shape_str(image.shape()));
    if (out_h == 0 || out_w == 0) throw std::invalid_argument("bicubic_resize: empty target");
    const std::size_t h = image.dim(0), w = image.dim(1), c = image.dim(2);
    const AxisResampler rows(h, out_h), cols(w, out_w);
    core::Tensor out({out_h, out_w, c});
    std::vector<double> plane(h * w), res(out_h * out_w);
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t i = 0; i < h * w; ++i) plane[i] = image[i * c + ch];
        resize_plane(plane.data(), res.data(), rows, cols);
        for (std::size_t i = 0; i < out_h * out_w; ++i) out[i * c + ch] = res[i];
    }
    return out;
}

/// Bicubic resize of a (c, h, w) image.
inline core::Tensor bicubic_resize_chw(const core::Tensor& image, std::size_t out_h, std::size_t out_w) {
    if (image.rank() != 3) throw core::ShapeError("bicubic_resize_chw: expected (c,h,w), got " + core::shape_str(image.shape()));
    if (out_h == 0 || out_w == 0) throw std::invalid_argument("bicubic_resize: empty target");
    const std::size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
    const AxisResampler rows(h, out_h), cols(w, out_w);
    core::Tensor out({c, out_h, out_w});
    for (std::size_t ch = 0; ch < c; ++ch)
        resize_plane(image.ptr() + ch * h * w, out.ptr() + ch * out_h * out_w, rows, cols);
    return out;
}

}  // namespace vfh::signal
