#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "vfh/core/tensor.hpp"
#include "vfh/signal/stft.hpp"

namespace vfh::signal {

/// Audio front-end parameters. Defaults: 16 kHz, 512-point FFT, hop 160, 40 bands.
struct MelConfig {
    double sample_rate = 16000.0;
    std::size_t n_fft = 512;
    std::size_t hop = 160;
    std::size_t n_mels = 40;
    double f_min = 0.0;
    double f_max = 0.0;  // 0 means sample_rate / 2

    double upper() const { return f_max > 0.0 ? f_max : sample_rate / 2.0; }
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Triangular HTK-scale filterbank, shape (n_mels, n_fft/2 + 1). Each row is
/// scaled so its peak is exactly 1.
inline core::Tensor mel_filterbank(const MelConfig& cfg) {
    if (cfg.sample_rate <= 0.0) throw std::invalid_argument("mel_filterbank: sample_rate must be positive");
    if (cfg.n_mels == 0 || cfg.n_fft < 2) throw std::invalid_argument("mel_filterbank: bad sizes");
    const std::size_t bins = cfg.n_fft / 2 + 1;
    const double lo = hz_to_mel(cfg.f_min), hi = hz_to_mel(cfg.upper());
    std::vector<double> edges(cfg.n_mels + 2);
    for (std::size_t i = 0; i < edges.size(); ++i)
        edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cfg.n_mels + 1));

    core::Tensor fb({cfg.n_mels, bins});
    const double bin_hz = cfg.sample_rate / static_cast<double>(cfg.n_fft);
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
        const double left = edges[m], centre = edges[m + 1], right = edges[m + 2];
        double peak = 0.0;
        for (std::size_t k = 0; k < bins; ++k) {
            const double f = static_cast<double>(k) * bin_hz;
            double v = 0.0;
            if (f > left && f <= centre)
                v = (f - left) / (centre - left);
            else if (f > centre && f < right)
                v = (right - f) / (right - centre);
            fb.at(m, k) = v;
            peak = std::max(peak, v);
        }
        if (peak > 0.0) {
            for (std::size_t k = 0; k < bins; ++k) fb.at(m, k) /= peak;
        } else {
            // Band narrower than one bin: take the nearest bin.
            const auto k = static_cast<std::size_t>(std::lround(centre / bin_hz));
            fb.at(m, std::min(k, bins - 1)) = 1.0;
        }
    }
    return fb;
}

/// log(1 + mel energy), shape (n_mels, n_frames).
struct MelSpectrogram {
    core::Tensor values;
    std::size_t frame_hop = 0;
    double sample_rate = 0.0;

    std::size_t n_mels() const { return values.dim(0); }
    std::size_t n_frames() const { return values.dim(1); }
};

inline MelSpectrogram mel_spectrogram(const core::Tensor& signal, const MelConfig& cfg = {}) {
    if (cfg.sample_rate <= 0.0) throw std::invalid_argument("mel_spectrogram: sample_rate must be positive");
    const StftFrames spec = stft(signal, cfg.n_fft, cfg.hop, Window::Hann);
    const core::Tensor power = spec.power();
    const core::Tensor fb = mel_filterbank(cfg);
    const std::size_t frames = spec.frames(), bins = spec.bins();
    MelSpectrogram out{core::Tensor({cfg.n_mels, frames}), cfg.hop, cfg.sample_rate};
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
        for (std::size_t f = 0; f < frames; ++f) {
            double e = 0.0;
            for (std::size_t k = 0; k < bins; ++k) e += fb.at(m, k) * power.at(f, k);
            out.values.at(m, f) = std::log1p(e);
        }
    }
    core::ensure_finite(out.values, "mel_spectrogram");
    return out;
}

}  // namespace vfh::signal
