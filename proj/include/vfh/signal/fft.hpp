#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace vfh::signal {

using Complex = std::complex<double>;

namespace detail {

inline bool is_pow2(std::size_t n) noexcept { return n && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) noexcept {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// exp(-2πik/n) for k in [0, n/2), each computed directly (no recurrence).
inline const std::vector<Complex>& twiddles(std::size_t n) {
    thread_local std::map<std::size_t, std::vector<Complex>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<Complex> tw(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        tw[k] = Complex(std::cos(ang), std::sin(ang));
    }
    return cache.emplace(n, std::move(tw)).first->second;
}

inline void fft_pow2(std::vector<Complex>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const auto& tw = twiddles(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t step = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < half; ++k) {
                Complex w = tw[k * step];
                if (inverse) w = std::conj(w);
                const Complex u = a[i + k];
                const Complex v = a[i + k + half] * w;
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
        }
    }
}

struct BluesteinPlan {
    std::size_t n = 0, m = 0;
    std::vector<Complex> chirp;      // exp(-iπk²/n)
    std::vector<Complex> kernel_fft; // FFT of conj chirp, wrapped
};

inline const BluesteinPlan& bluestein_plan(std::size_t n) {
    thread_local std::map<std::size_t, std::unique_ptr<BluesteinPlan>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return *it->second;
    auto plan = std::make_unique<BluesteinPlan>();
    plan->n = n;
    plan->m = next_pow2(2 * n - 1);
    plan->chirp.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        // k² mod 2n keeps the angle argument small and exact.
        const std::size_t k2 = (k * k) % (2 * n);
        const double ang = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
        plan->chirp[k] = Complex(std::cos(ang), std::sin(ang));
    }
    plan->kernel_fft.assign(plan->m, Complex(0.0, 0.0));
    plan->kernel_fft[0] = std::conj(plan->chirp[0]);
    for (std::size_t k = 1; k < n; ++k) {
        plan->kernel_fft[k] = std::conj(plan->chirp[k]);
        plan->kernel_fft[plan->m - k] = std::conj(plan->chirp[k]);
    }
    fft_pow2(plan->kernel_fft, false);
    return *cache.emplace(n, std::move(plan)).first->second;
}

inline void fft_bluestein(std::vector<Complex>& a, bool inverse) {
    const std::size_t n = a.size();
    const BluesteinPlan& plan = bluestein_plan(n);
    std::vector<Complex> buf(plan.m, Complex(0.0, 0.0));
    for (std::size_t k = 0; k < n; ++k) {
        const Complex c = inverse ? std::conj(plan.chirp[k]) : plan.chirp[k];
        buf[k] = a[k] * c;
    }
    fft_pow2(buf, false);
    for (std::size_t k = 0; k < plan.m; ++k) {
        buf[k] *= inverse ? std::conj(plan.kernel_fft[(plan.m - k) % plan.m]) : plan.kernel_fft[k];
    }
    fft_pow2(buf, true);
    const double scale = 1.0 / static_cast<double>(plan.m);
    for (std::size_t k = 0; k < n; ++k) {
        const Complex c = inverse ? std::conj(plan.chirp[k]) : plan.chirp[k];
        a[k] = buf[k] * scale * c;
    }
}

}  // namespace detail

/// In-place unnormalized DFT of any length: X[k] = Σ x[j]·exp(∓2πijk/n),
/// minus sign forward. Power-of-two lengths use radix-2; others Bluestein.
inline void fft(std::vector<Complex>& a, bool inverse = false) {
    const std::size_t n = a.size();
    if (n == 0) throw std::invalid_argument("fft: empty input");
    if (n == 1) return;
    if (detail::is_pow2(n))
        detail::fft_pow2(a, inverse);
    else
        detail::fft_bluestein(a, inverse);
}

}  // namespace vfh::signal
