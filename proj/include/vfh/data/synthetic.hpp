#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "vfh/core/rng.hpp"
#include "vfh/data/io.hpp"

namespace vfh::data {

inline constexpr double kFps = 25.0;
inline constexpr std::uint32_t kSampleRate = 16000;
inline constexpr std::size_t kSamplesPerFrame = 640;
inline constexpr std::size_t kFrameSize = 128;

/// Mouth ellipse geometry. Half-height is affine in openness.
struct MouthGeometry {
    static constexpr double kCenterRow = 100.0, kCenterCol = 64.0;
    static constexpr double kHalfWidth = 18.0;
    static constexpr double kMinHalfHeight = 2.0, kHalfHeightGain = 10.0;
    static double half_height(double openness) { return kMinHalfHeight + kHalfHeightGain * openness; }
};

/// Per-clip appearance and voice, drawn from the clip seed.
struct Identity {
    std::array<double, 3> skin{};
    std::array<double, 3> background{};
    std::array<double, 3> lips{};
    std::array<double, 3> iris{};
    double face_radius = 55.0;
    double eye_spacing = 20.0;
    double eye_radius = 6.0;
    double stripe_period = 16.0;
    double stripe_angle = 0.0;
    double f0 = 160.0;
    double f1 = 1.0, f2 = 3.0, phase1 = 0.0, phase2 = 0.0;
};

inline Identity draw_identity(std::uint64_t seed) {
    core::Rng rng(core::mix_seed(seed, 0x1d));
    Identity id;
    const double tone = rng.uniform(0.55, 1.0), warm = rng.uniform(-0.08, 0.08);
    id.skin = {std::min(1.0, 0.92 * tone + warm), 0.72 * tone, std::max(0.0, 0.58 * tone - warm)};
    for (double& c : id.background) c = rng.uniform(0.1, 0.9);
    id.lips = {rng.uniform(0.45, 0.7), rng.uniform(0.08, 0.2), rng.uniform(0.1, 0.25)};
    id.iris = {rng.uniform(0.05, 0.4), rng.uniform(0.05, 0.4), rng.uniform(0.05, 0.5)};
    id.face_radius = rng.uniform(53.0, 57.0);
    id.eye_spacing = rng.uniform(16.0, 24.0);
    id.eye_radius = rng.uniform(5.0, 7.5);
    id.stripe_period = rng.uniform(10.0, 20.0);
    id.stripe_angle = rng.uniform(0.0, std::numbers::pi);
    id.f0 = rng.uniform(120.0, 220.0);
    id.f1 = rng.uniform(0.8, 2.0);
    id.f2 = rng.uniform(2.0, 4.0);
    id.phase1 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    id.phase2 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return id;
}

/// Mouth openness of frame i; the driver shared by video and audio.
inline double mouth_openness(const Identity& id, std::size_t i) {
    const double t = static_cast<double>(i) / kFps;
    const double v = 0.5 + 0.35 * std::sin(2.0 * std::numbers::pi * id.f1 * t + id.phase1) +
                     0.15 * std::sin(2.0 * std::numbers::pi * id.f2 * t + id.phase2);
    return std::clamp(v, 0.0, 1.0);
}

namespace detail {

/// Coverage of an axis-aligned ellipse at pixel centre (x, y) with a one-pixel soft edge.
inline double ellipse_cover(double x, double y, double cx, double cy, double ax, double ay) {
    const double u = (x - cx) / ax, v = (y - cy) / ay;
    const double q = std::sqrt(u * u + v * v);
    if (q == 0.0) return 1.0;
    const double grad = std::sqrt((u / ax) * (u / ax) + (v / ay) * (v / ay)) / q;
    const double dist = (q - 1.0) / grad;  // approximate signed distance in pixels
    return std::clamp(0.5 - dist, 0.0, 1.0);
}

inline void blend(double* px, const std::array<double, 3>& c, double a) {
    for (int k = 0; k < 3; ++k) px[k] = px[k] * (1.0 - a) + c[static_cast<std::size_t>(k)] * a;
}

}  // namespace detail

/// Renders one (3, 128, 128) frame, quantized to 8 bits.
inline Tensor render_face(const Identity& id, double openness) {
    const std::size_t n = kFrameSize;
    Tensor out({3, n, n});
    const double cx = 64.0, cy = 64.0;
    const double ca = std::cos(id.stripe_angle), sa = std::sin(id.stripe_angle);
    const std::array<double, 3> white{0.95, 0.95, 0.93}, pupil{0.03, 0.03, 0.05};
    std::array<double, 3> brow{}, nose{};
    for (std::size_t k = 0; k < 3; ++k) {
        brow[k] = 0.35 * id.skin[k];
        nose[k] = 0.8 * id.skin[k];
    }
    const double half_h = MouthGeometry::half_height(openness);
    for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x) {
            const double px = static_cast<double>(x), py = static_cast<double>(y);
            // Background: soft stripes.
            const double phase = 2.0 * std::numbers::pi * (ca * px + sa * py) / id.stripe_period;
            const double shade = 0.85 + 0.15 * std::sin(phase);
            double c[3] = {id.background[0] * shade, id.background[1] * shade, id.background[2] * shade};
            detail::blend(c, id.skin, detail::ellipse_cover(px, py, cx, cy, id.face_radius * 0.9, id.face_radius));
            for (double side : {-1.0, 1.0}) {
                const double ex = cx + side * id.eye_spacing, ey = 48.0;
                detail::blend(c, brow, detail::ellipse_cover(px, py, ex, ey - id.eye_radius - 5.0, id.eye_radius + 3.0, 1.8));
                detail::blend(c, white, detail::ellipse_cover(px, py, ex, ey, id.eye_radius * 1.5, id.eye_radius));
                detail::blend(c, id.iris, detail::ellipse_cover(px, py, ex, ey, id.eye_radius * 0.65, id.eye_radius * 0.65));
                detail::blend(c, pupil, detail::ellipse_cover(px, py, ex, ey, id.eye_radius * 0.3, id.eye_radius * 0.3));
            }
            detail::blend(c, nose, detail::ellipse_cover(px, py, cx, 74.0, 5.0, 9.0));
            detail::blend(c, id.lips,
                          detail::ellipse_cover(px, py, MouthGeometry::kCenterCol, MouthGeometry::kCenterRow,
                                                MouthGeometry::kHalfWidth, half_h));
            for (std::size_t k = 0; k < 3; ++k) out[(k * n + y) * n + x] = quantize8(c[k]);
        }
    return out;
}

/// A generated clip: HR frames, mono audio and the openness driver.
struct SyntheticClip {
    std::uint64_t seed = 0;
    Tensor frames;  // (k, 3, 128, 128)
    Tensor audio;   // (k * 640,) at 16 kHz
    std::vector<double> openness;

    std::size_t length() const { return openness.size(); }
    Tensor frame(std::size_t i) const {
        const std::size_t plane = 3 * kFrameSize * kFrameSize;
        Tensor f({3, kFrameSize, kFrameSize});
        std::copy_n(frames.ptr() + i * plane, plane, f.ptr());
        return f;
    }
};

/// Audio envelope at sample s: openness linearly interpolated between frame centres.
inline double audio_envelope(const std::vector<double>& openness, std::size_t s) {
    const double pos = (static_cast<double>(s) + 0.5) / static_cast<double>(kSamplesPerFrame) - 0.5;
    if (pos <= 0.0) return openness.front();
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= openness.size()) return openness.back();
    const double f = pos - static_cast<double>(i);
    return openness[i] * (1.0 - f) + openness[i + 1] * f;
}

inline Tensor synthesize_audio(const Identity& id, const std::vector<double>& openness) {
    const std::size_t n = openness.size() * kSamplesPerFrame;
    Tensor audio({n});
    const double amps[3] = {0.5, 0.3, 0.15};
    for (std::size_t s = 0; s < n; ++s) {
        const double t = static_cast<double>(s) / kSampleRate;
        double tone = 0.0;
        for (int h = 0; h < 3; ++h) tone += amps[h] * std::sin(2.0 * std::numbers::pi * (h + 1) * id.f0 * t + 0.7 * h);
        audio[s] = quantize16(0.9 * audio_envelope(openness, s) * tone);
    }
    return audio;
}

inline SyntheticClip generate_clip(std::uint64_t seed, std::size_t k, std::size_t min_frames = 5) {
    if (k < min_frames) throw std::invalid_argument("generate_clip: " + std::to_string(k) + " frames is fewer than the window of " +
                                                    std::to_string(min_frames));
    const Identity id = draw_identity(seed);
    SyntheticClip clip;
    clip.seed = seed;
    clip.openness.resize(k);
    for (std::size_t i = 0; i < k; ++i) clip.openness[i] = mouth_openness(id, i);
    const std::size_t plane = 3 * kFrameSize * kFrameSize;
    clip.frames = Tensor({k, 3, kFrameSize, kFrameSize});
    for (std::size_t i = 0; i < k; ++i) {
        const Tensor f = render_face(id, clip.openness[i]);
        std::copy_n(f.ptr(), plane, clip.frames.ptr() + i * plane);
    }
    clip.audio = synthesize_audio(id, clip.openness);
    return clip;
}

}  // namespace vfh::data
