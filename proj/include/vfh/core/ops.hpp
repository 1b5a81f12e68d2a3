#pragma once

#include <algorithm>
#include <utility>

#include "vfh/core/parallel.hpp"
#include "vfh/core/tensor.hpp"

namespace vfh::core {

template <typename F>
Tensor tensor_map(const Tensor& t, F&& f) {
    Tensor out(t.shape());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = f(t[i]);
    ensure_finite(out, "tensor_map");
    return out;
}

template <typename F>
Tensor tensor_zip(const Tensor& a, const Tensor& b, F&& f) {
    if (a.shape() != b.shape()) throw ShapeError("tensor_zip", a.shape(), b.shape());
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
    ensure_finite(out, "tensor_zip");
    return out;
}

inline Tensor transpose(const Tensor& a) {
    if (a.rank() != 2) throw ShapeError("transpose: rank-2 required, got " + shape_str(a.shape()));
    const std::size_t r = a.dim(0), c = a.dim(1);
    Tensor out({c, r});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out[j * r + i] = a[i * c + j];
    return out;
}

/// C = A·B for rank-2 operands. The k-loop runs outermost per row so each
/// output element accumulates in ascending k.
inline Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2) throw ShapeError("matmul", a.shape(), b.shape());
    const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
    if (b.dim(0) != k) throw ShapeError("matmul: inner dims", a.shape(), b.shape());
    Tensor c({n, m});
    const double* pa = a.ptr();
    const double* pb = b.ptr();
    double* pc = c.ptr();
    parallel_for(n, [&](std::size_t i) {
        double* row = pc + i * m;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = pa[i * k + p];
            const double* brow = pb + p * m;
            for (std::size_t j = 0; j < m; ++j) row[j] += av * brow[j];
        }
    });
    return c;
}

/// Returns (dA, dB) = (dC·Bᵀ, Aᵀ·dC).
inline std::pair<Tensor, Tensor> matmul_backward(const Tensor& a, const Tensor& b, const Tensor& dc) {
    if (dc.rank() != 2 || dc.dim(0) != a.dim(0) || dc.dim(1) != b.dim(1))
        throw ShapeError("matmul_backward: upstream", dc.shape(), Shape{a.dim(0), b.dim(1)});
    return {matmul(dc, transpose(b)), matmul(transpose(a), dc)};
}

}  // namespace vfh::core
