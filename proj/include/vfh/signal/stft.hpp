#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "vfh/core/tensor.hpp"
#include "vfh/signal/fft.hpp"

namespace vfh::signal {

enum class Window { Hann, Rectangular };

/// Periodic Hann: 0.5 - 0.5·cos(2πn/N).
inline std::vector<double> make_window(Window kind, std::size_t n) {
    std::vector<double> w(n, 1.0);
    if (kind == Window::Hann) {
        for (std::size_t i = 0; i < n; ++i)
            w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    }
    return w;
}

inline std::size_t stft_frame_count(std::size_t n, std::size_t n_fft, std::size_t hop) {
    if (n < n_fft) throw std::invalid_argument("stft: signal shorter than one frame");
    return 1 + (n - n_fft) / hop;
}

/// One-sided STFT: real/imag of shape (frames, n_fft/2 + 1).
struct StftFrames {
    core::Tensor real;
    core::Tensor imag;

    std::size_t frames() const { return real.dim(0); }
    std::size_t bins() const { return real.dim(1); }

    core::Tensor magnitude() const {
        core::Tensor m(real.shape());
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::hypot(real[i], imag[i]);
        return m;
    }
    core::Tensor power() const {
        core::Tensor p(real.shape());
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = real[i] * real[i] + imag[i] * imag[i];
        return p;
    }
};

inline StftFrames stft(const core::Tensor& signal, std::size_t n_fft, std::size_t hop, Window window = Window::Hann) {
    if (signal.rank() != 1) throw core::ShapeError("stft: expected a 1-D signal, got " + core::shape_str(signal.shape()));
    if (n_fft == 0 || hop == 0) throw std::invalid_argument("stft: n_fft and hop must be positive");
    const std::size_t frames = stft_frame_count(signal.size(), n_fft, hop);
    const std::size_t bins = n_fft / 2 + 1;
    const auto win = make_window(window, n_fft);
    StftFrames out{core::Tensor({frames, bins}), core::Tensor({frames, bins})};
    std::vector<Complex> buf(n_fft);
    for (std::size_t f = 0; f < frames; ++f) {
        const std::size_t start = f * hop;
        for (std::size_t i = 0; i < n_fft; ++i) buf[i] = Complex(signal[start + i] * win[i], 0.0);
        fft(buf);
        for (std::size_t k = 0; k < bins; ++k) {
            out.real[f * bins + k] = buf[k].real();
            out.imag[f * bins + k] = buf[k].imag();
        }
    }
    return out;
}

}  // namespace vfh::signal
