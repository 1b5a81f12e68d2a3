#pragma once

#include <cstddef>
#include <vector>

#include "vfh/core/tensor.hpp"
#include "vfh/signal/fft.hpp"

namespace vfh::signal {

using core::Shape;
using core::ShapeError;
using core::Tensor;

/// Complex 2D spectrum stored as real/imag planes of shape (h, w).
/// Element [v][u] holds F(u, v): u indexes width, v height.
struct Spectrum {
    Tensor real;
    Tensor imag;
    std::size_t height = 0;
    std::size_t width = 0;

    Complex at(std::size_t v, std::size_t u) const { return {real[v * width + u], imag[v * width + u]}; }
};

namespace detail {

/// Unnormalized 2D transform over an (h, w) complex buffer in row-major order.
inline void transform2(std::vector<Complex>& buf, std::size_t h, std::size_t w, bool inverse) {
    std::vector<Complex> line(w);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) line[x] = buf[y * w + x];
        fft(line, inverse);
        for (std::size_t x = 0; x < w; ++x) buf[y * w + x] = line[x];
    }
    line.resize(h);
    for (std::size_t x = 0; x < w; ++x) {
        for (std::size_t y = 0; y < h; ++y) line[y] = buf[y * w + x];
        fft(line, inverse);
        for (std::size_t y = 0; y < h; ++y) buf[y * w + x] = line[y];
    }
}

inline void check_plane(const Tensor& t, const char* op) {
    if (t.empty() || t.rank() != 2) throw ShapeError(std::string(op) + ": expected a non-empty (h,w) image, got " +
                                                     core::shape_str(t.shape()));
}

}  // namespace detail

/// F(u,v) = Σ_x Σ_y P(x,y)·exp(-2πi(ux/w + vy/h)), no normalization.
inline Spectrum dft2(const Tensor& image) {
    detail::check_plane(image, "dft2");
    const std::size_t h = image.dim(0), w = image.dim(1);
    std::vector<Complex> buf(h * w);
    for (std::size_t i = 0; i < h * w; ++i) buf[i] = Complex(image[i], 0.0);
    detail::transform2(buf, h, w, false);
    Spectrum s{Tensor({h, w}), Tensor({h, w}), h, w};
    for (std::size_t i = 0; i < h * w; ++i) {
        s.real[i] = buf[i].real();
        s.imag[i] = buf[i].imag();
    }
    return s;
}

/// Inverse of dft2 (carries the 1/(wh) factor); returns the real part.
inline Tensor idft2(const Spectrum& s) {
    const std::size_t h = s.height, w = s.width;
    std::vector<Complex> buf(h * w);
    for (std::size_t i = 0; i < h * w; ++i) buf[i] = Complex(s.real[i], s.imag[i]);
    detail::transform2(buf, h, w, true);
    Tensor out({h, w});
    const double scale = 1.0 / static_cast<double>(h * w);
    for (std::size_t i = 0; i < h * w; ++i) out[i] = buf[i].real() * scale;
    return out;
}

/// Adjoint of dft2 viewed as a real-linear map image -> (Re F, Im F).
/// With G = dRe + i·dIm, dImage(x,y) = Re Σ_{u,v} G(u,v)·exp(+2πi(ux/w + vy/h)).
inline Tensor dft2_backward(const Tensor& d_real, const Tensor& d_imag) {
    detail::check_plane(d_real, "dft2_backward");
    if (d_real.shape() != d_imag.shape()) throw ShapeError("dft2_backward", d_real.shape(), d_imag.shape());
    const std::size_t h = d_real.dim(0), w = d_real.dim(1);
    std::vector<Complex> buf(h * w);
    for (std::size_t i = 0; i < h * w; ++i) buf[i] = Complex(d_real[i], d_imag[i]);
    detail::transform2(buf, h, w, true);
    Tensor out({h, w});
    for (std::size_t i = 0; i < h * w; ++i) out[i] = buf[i].real();
    return out;
}

inline double spectrum_energy(const Spectrum& s) {
    double e = 0.0;
    for (std::size_t i = 0; i < s.real.size(); ++i) e += s.real[i] * s.real[i] + s.imag[i] * s.imag[i];
    return e;
}

}  // namespace vfh::signal
