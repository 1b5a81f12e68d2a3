#pragma once

#include <string>

#include "vfh/nn/layer.hpp"
#include "vfh/signal/resize.hpp"

namespace vfh::nn {

/// Fixed bicubic resampling of (b, c, h, w) to (b, c, out_h, out_w).
class BicubicResize : public Layer {
public:
    BicubicResize(std::string name, std::size_t in_h, std::size_t in_w, std::size_t out_h, std::size_t out_w)
        : Layer(std::move(name)), rows_(in_h, out_h), cols_(in_w, out_w) {}

    Tensor forward(const Tensor& x) override {
        if (x.rank() != 4 || x.dim(2) != rows_.in_size || x.dim(3) != cols_.in_size)
            throw ShapeError(name() + ": unexpected input " + core::shape_str(x.shape()));
        mark_forward();
        in_shape_ = x.shape();
        const std::size_t planes = x.dim(0) * x.dim(1);
        const std::size_t in_plane = rows_.in_size * cols_.in_size, out_plane = rows_.out_size * cols_.out_size;
        Tensor y({x.dim(0), x.dim(1), rows_.out_size, cols_.out_size});
        for (std::size_t p = 0; p < planes; ++p)
            signal::resize_plane(x.ptr() + p * in_plane, y.ptr() + p * out_plane, rows_, cols_);
        return y;
    }

    Tensor backward(const Tensor& dy) override {
        require_forward();
        const std::size_t planes = in_shape_[0] * in_shape_[1];
        const std::size_t in_plane = rows_.in_size * cols_.in_size, out_plane = rows_.out_size * cols_.out_size;
        Tensor dx(in_shape_);
        for (std::size_t p = 0; p < planes; ++p)
            signal::resize_plane_backward(dy.ptr() + p * out_plane, dx.ptr() + p * in_plane, rows_, cols_);
        return dx;
    }

private:
    signal::AxisResampler rows_, cols_;
    Shape in_shape_;
};

}  // namespace vfh::nn
