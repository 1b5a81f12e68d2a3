#pragma once

#include <algorithm>
#include <vector>

#include "vfh/core/tensor.hpp"

namespace vfh::nn {

using core::Shape;
using core::ShapeError;
using core::Tensor;

/// Concatenates (b, c_i, h, w) tensors along channels.
inline Tensor concat_channels(const std::vector<const Tensor*>& parts) {
    if (parts.empty()) throw ShapeError("concat_channels: nothing to concatenate");
    const Shape& s0 = parts.front()->shape();
    std::size_t total = 0;
    for (const Tensor* p : parts) {
        if (p->rank() != 4 || p->dim(0) != s0[0] || p->dim(2) != s0[2] || p->dim(3) != s0[3])
            throw ShapeError("concat_channels", s0, p->shape());
        total += p->dim(1);
    }
    const std::size_t b = s0[0], plane = s0[2] * s0[3];
    Tensor out({b, total, s0[2], s0[3]});
    for (std::size_t n = 0; n < b; ++n) {
        double* dst = out.ptr() + n * total * plane;
        for (const Tensor* p : parts) {
            const std::size_t cnt = p->dim(1) * plane;
            std::copy_n(p->ptr() + n * cnt, cnt, dst);
            dst += cnt;
        }
    }
    return out;
}

/// Channels [first, first + count) of a (b, c, h, w) tensor.
inline Tensor slice_channels(const Tensor& x, std::size_t first, std::size_t count) {
    if (x.rank() != 4 || first + count > x.dim(1))
        throw ShapeError("slice_channels: range out of bounds for " + core::shape_str(x.shape()));
    const std::size_t b = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
    Tensor out({b, count, x.dim(2), x.dim(3)});
    for (std::size_t n = 0; n < b; ++n)
        std::copy_n(x.ptr() + (n * c + first) * plane, count * plane, out.ptr() + n * count * plane);
    return out;
}

/// Adds `d` (b, count, h, w) into channels [first, first+count) of `dx`.
inline void add_channel_slice(Tensor& dx, const Tensor& d, std::size_t first) {
    const std::size_t b = dx.dim(0), c = dx.dim(1), plane = dx.dim(2) * dx.dim(3), count = d.dim(1);
    for (std::size_t n = 0; n < b; ++n) {
        double* dst = dx.ptr() + (n * c + first) * plane;
        const double* src = d.ptr() + n * count * plane;
        for (std::size_t i = 0; i < count * plane; ++i) dst[i] += src[i];
    }
}

/// (b, c, h, w) -> (b, c) spatial mean.
inline Tensor global_avg_pool(const Tensor& x) {
    if (x.rank() != 4) throw ShapeError("global_avg_pool: expected (b,c,h,w), got " + core::shape_str(x.shape()));
    const std::size_t bc = x.dim(0) * x.dim(1), plane = x.dim(2) * x.dim(3);
    Tensor out({x.dim(0), x.dim(1)});
    for (std::size_t i = 0; i < bc; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < plane; ++j) s += x[i * plane + j];
        out[i] = s / static_cast<double>(plane);
    }
    return out;
}

inline Tensor global_avg_pool_backward(const Tensor& dy, const Shape& in_shape) {
    Tensor dx(in_shape);
    const std::size_t plane = in_shape[2] * in_shape[3];
    for (std::size_t i = 0; i < dy.size(); ++i) {
        const double g = dy[i] / static_cast<double>(plane);
        std::fill_n(dx.ptr() + i * plane, plane, g);
    }
    return dx;
}

/// (b, c) -> (b, c, h, w), constant over space.
inline Tensor broadcast_spatial(const Tensor& v, std::size_t h, std::size_t w) {
    Tensor out({v.dim(0), v.dim(1), h, w});
    for (std::size_t i = 0; i < v.size(); ++i) std::fill_n(out.ptr() + i * h * w, h * w, v[i]);
    return out;
}

inline Tensor broadcast_spatial_backward(const Tensor& dy) {
    Tensor dv({dy.dim(0), dy.dim(1)});
    const std::size_t plane = dy.dim(2) * dy.dim(3);
    for (std::size_t i = 0; i < dv.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < plane; ++j) s += dy[i * plane + j];
        dv[i] = s;
    }
    return dv;
}

}  // namespace vfh::nn
