#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace vfh::nn::kernels {

/// Geometry of a single-plane 2D cross-correlation.
struct PlaneGeom {
    std::size_t in_h, in_w;
    std::size_t k_h, k_w;
    std::size_t stride, pad;
    std::size_t out_h, out_w;
};

inline std::size_t conv_out_size(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad) {
    return (in + 2 * pad - k) / stride + 1;
}

namespace detail {

/// Output columns [lo, hi) whose input column ow*s + kw - pad lies in [0, in_w).
inline void valid_cols(const PlaneGeom& g, std::size_t kw, std::size_t& lo, std::size_t& hi) {
    const long s = static_cast<long>(g.stride);
    const long off = static_cast<long>(kw) - static_cast<long>(g.pad);
    long l = off >= 0 ? 0 : (-off + s - 1) / s;
    long h = (static_cast<long>(g.in_w) - off + s - 1) / s;
    h = std::min<long>(h, static_cast<long>(g.out_w));
    l = std::min(l, h);
    lo = static_cast<std::size_t>(std::max<long>(l, 0));
    hi = static_cast<std::size_t>(std::max<long>(h, 0));
}

inline bool input_row(const PlaneGeom& g, std::size_t oh, std::size_t kh, std::size_t& ih) {
    const long r = static_cast<long>(oh * g.stride + kh) - static_cast<long>(g.pad);
    if (r < 0 || r >= static_cast<long>(g.in_h)) return false;
    ih = static_cast<std::size_t>(r);
    return true;
}

}  // namespace detail

/// out += corr(in, kernel).
inline void corr_forward(const PlaneGeom& g, const double* in, const double* kernel, double* out) {
    const std::size_t s = g.stride;
    for (std::size_t kh = 0; kh < g.k_h; ++kh) {
        for (std::size_t kw = 0; kw < g.k_w; ++kw) {
            const double k = kernel[kh * g.k_w + kw];
            std::size_t lo, hi;
            detail::valid_cols(g, kw, lo, hi);
            if (lo >= hi) continue;
            for (std::size_t oh = 0; oh < g.out_h; ++oh) {
                std::size_t ih;
                if (!detail::input_row(g, oh, kh, ih)) continue;
                const double* irow = in + ih * g.in_w + lo * s + kw - g.pad;
                double* orow = out + oh * g.out_w + lo;
                const std::size_t n = hi - lo;
                if (s == 1) {
                    for (std::size_t i = 0; i < n; ++i) orow[i] += k * irow[i];
                } else {
                    for (std::size_t i = 0; i < n; ++i) orow[i] += k * irow[i * s];
                }
            }
        }
    }
}

/// din += corrᵀ(dout, kernel).
inline void corr_backward_input(const PlaneGeom& g, const double* dout, const double* kernel, double* din) {
    const std::size_t s = g.stride;
    for (std::size_t kh = 0; kh < g.k_h; ++kh) {
        for (std::size_t kw = 0; kw < g.k_w; ++kw) {
            const double k = kernel[kh * g.k_w + kw];
            std::size_t lo, hi;
            detail::valid_cols(g, kw, lo, hi);
            if (lo >= hi) continue;
            for (std::size_t oh = 0; oh < g.out_h; ++oh) {
                std::size_t ih;
                if (!detail::input_row(g, oh, kh, ih)) continue;
                double* drow = din + ih * g.in_w + lo * s + kw - g.pad;
                const double* orow = dout + oh * g.out_w + lo;
                const std::size_t n = hi - lo;
                if (s == 1) {
                    for (std::size_t i = 0; i < n; ++i) drow[i] += k * orow[i];
                } else {
                    for (std::size_t i = 0; i < n; ++i) drow[i * s] += k * orow[i];
                }
            }
        }
    }
}

/// dkernel += Σ dout ⊙ shifted(in). Partial sums run per output column and
/// are reduced in ascending column order.
inline void corr_backward_kernel(const PlaneGeom& g, const double* in, const double* dout, double* dkernel,
                                 std::vector<double>& scratch) {
    const std::size_t s = g.stride;
    scratch.resize(g.out_w);
    for (std::size_t kh = 0; kh < g.k_h; ++kh) {
        for (std::size_t kw = 0; kw < g.k_w; ++kw) {
            std::size_t lo, hi;
            detail::valid_cols(g, kw, lo, hi);
            if (lo >= hi) continue;
            std::fill(scratch.begin(), scratch.end(), 0.0);
            double* acc = scratch.data();
            for (std::size_t oh = 0; oh < g.out_h; ++oh) {
                std::size_t ih;
                if (!detail::input_row(g, oh, kh, ih)) continue;
                const double* irow = in + ih * g.in_w + lo * s + kw - g.pad;
                const double* orow = dout + oh * g.out_w + lo;
                double* arow = acc + lo;
                const std::size_t n = hi - lo;
                if (s == 1) {
                    for (std::size_t i = 0; i < n; ++i) arow[i] += orow[i] * irow[i];
                } else {
                    for (std::size_t i = 0; i < n; ++i) arow[i] += orow[i] * irow[i * s];
                }
            }
            double total = 0.0;
            for (std::size_t ow = lo; ow < hi; ++ow) total += acc[ow];
            dkernel[kh * g.k_w + kw] += total;
        }
    }
}

/// Unfolds planes into a (planes·k_h·k_w, out_h·out_w) matrix; row index is
/// (plane, kh, kw). A null plane contributes zero rows (temporal padding).
inline void im2col(const PlaneGeom& g, const double* const* planes, std::size_t n_planes, double* col) {
    const std::size_t s = g.stride, cols = g.out_h * g.out_w;
    for (std::size_t p = 0; p < n_planes; ++p)
        for (std::size_t kh = 0; kh < g.k_h; ++kh)
            for (std::size_t kw = 0; kw < g.k_w; ++kw) {
                double* row = col + ((p * g.k_h + kh) * g.k_w + kw) * cols;
                std::size_t lo, hi;
                detail::valid_cols(g, kw, lo, hi);
                for (std::size_t oh = 0; oh < g.out_h; ++oh) {
                    double* r = row + oh * g.out_w;
                    std::size_t ih;
                    if (!planes[p] || lo >= hi || !detail::input_row(g, oh, kh, ih)) {
                        std::fill(r, r + g.out_w, 0.0);
                        continue;
                    }
                    const double* irow = planes[p] + ih * g.in_w + lo * s + kw - g.pad;
                    std::fill(r, r + lo, 0.0);
                    for (std::size_t i = 0; i < hi - lo; ++i) r[lo + i] = irow[i * s];
                    std::fill(r + hi, r + g.out_w, 0.0);
                }
            }
}

/// Adjoint of im2col: accumulates the matrix back into the planes.
inline void col2im(const PlaneGeom& g, const double* col, double* const* planes, std::size_t n_planes) {
    const std::size_t s = g.stride, cols = g.out_h * g.out_w;
    for (std::size_t p = 0; p < n_planes; ++p) {
        if (!planes[p]) continue;
        for (std::size_t kh = 0; kh < g.k_h; ++kh)
            for (std::size_t kw = 0; kw < g.k_w; ++kw) {
                const double* row = col + ((p * g.k_h + kh) * g.k_w + kw) * cols;
                std::size_t lo, hi;
                detail::valid_cols(g, kw, lo, hi);
                if (lo >= hi) continue;
                for (std::size_t oh = 0; oh < g.out_h; ++oh) {
                    std::size_t ih;
                    if (!detail::input_row(g, oh, kh, ih)) continue;
                    double* drow = planes[p] + ih * g.in_w + lo * s + kw - g.pad;
                    const double* r = row + oh * g.out_w + lo;
                    for (std::size_t i = 0; i < hi - lo; ++i) drow[i * s] += r[i];
                }
            }
    }
}

}  // namespace vfh::nn::kernels
