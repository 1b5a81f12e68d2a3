#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "vfh/data/synthetic.hpp"
#include "vfh/model/mouth.hpp"
#include "vfh/signal/mel.hpp"
#include "vfh/signal/resize.hpp"

namespace vfh::data {

inline constexpr std::size_t kLrSize = 32;

/// One training/eval example centred on frame t.
struct VideoSample {
    std::uint64_t clip_seed = 0;
    std::size_t t = 0;
    std::size_t j = 0;
    Tensor lr_window;  // (3(2j+1), 32, 32), frames t-j..t+j stacked on channels
    Tensor hr_center;  // (3, 128, 128)
    Tensor mouth_gt;   // (2j+1, 1, 48, 64) luma crops of the HR window
    Tensor mel;        // (n_mels, mel_frames) log-mel of the audio under the window
    std::size_t audio_begin = 0, audio_end = 0;  // sample range the mel was computed from
};

/// Mel frames produced for a window of 2j+1 video frames.
inline std::size_t mel_frames_for(std::size_t j, const signal::MelConfig& cfg = {}) {
    return signal::stft_frame_count((2 * j + 1) * kSamplesPerFrame, cfg.n_fft, cfg.hop);
}

/// LR copies of every frame: bicubic 128 -> 32, unquantized.
inline Tensor downsample_frames(const SyntheticClip& clip, std::size_t lr = kLrSize) {
    const std::size_t k = clip.length();
    Tensor out({k, 3, lr, lr});
    for (std::size_t i = 0; i < k; ++i) {
        const Tensor small = signal::bicubic_resize_chw(clip.frame(i), lr, lr);
        std::copy_n(small.ptr(), small.size(), out.ptr() + i * small.size());
    }
    return out;
}

/// Builds the sample at centre t from a clip and its precomputed LR frames.
inline VideoSample make_sample(const SyntheticClip& clip, const Tensor& lr_frames, std::size_t t, std::size_t j,
                               const signal::MelConfig& mel_cfg = {}) {
    const std::size_t k = clip.length(), win = 2 * j + 1;
    if (k < win) throw std::invalid_argument("make_samples: clip of " + std::to_string(k) + " frames is shorter than the window");
    if (t < j || t + j >= k) throw std::out_of_range("make_sample: centre " + std::to_string(t) + " has no full window");
    const std::size_t lr = lr_frames.dim(2), lr_plane = 3 * lr * lr;
    VideoSample s;
    s.clip_seed = clip.seed;
    s.t = t;
    s.j = j;
    s.lr_window = Tensor({3 * win, lr, lr});
    std::copy_n(lr_frames.ptr() + (t - j) * lr_plane, win * lr_plane, s.lr_window.ptr());
    s.hr_center = clip.frame(t);
    s.mouth_gt = Tensor({win, 1, model::MouthBox::kHeight, model::MouthBox::kWidth});
    const std::size_t crop = model::MouthBox::kHeight * model::MouthBox::kWidth;
    for (std::size_t i = 0; i < win; ++i) {
        const Tensor c = model::mouth_crop(clip.frame(t - j + i));
        std::copy_n(c.ptr(), crop, s.mouth_gt.ptr() + i * crop);
    }
    s.audio_begin = (t - j) * kSamplesPerFrame;
    s.audio_end = (t + j + 1) * kSamplesPerFrame;
    if (s.audio_end > clip.audio.size()) throw std::invalid_argument("make_sample: audio shorter than the video");
    Tensor slice({s.audio_end - s.audio_begin});
    std::copy_n(clip.audio.ptr() + s.audio_begin, slice.size(), slice.ptr());
    s.mel = signal::mel_spectrogram(slice, mel_cfg).values;
    return s;
}

/// All full windows of a clip; the first and last j frames are not centres.
inline std::vector<VideoSample> make_samples(const SyntheticClip& clip, std::size_t j, const signal::MelConfig& mel_cfg = {}) {
    if (clip.length() < 2 * j + 1)
        throw std::invalid_argument("make_samples: clip of " + std::to_string(clip.length()) + " frames is shorter than the window");
    const Tensor lr = downsample_frames(clip);
    std::vector<VideoSample> out;
    for (std::size_t t = j; t + j < clip.length(); ++t) out.push_back(make_sample(clip, lr, t, j, mel_cfg));
    return out;
}

}  // namespace vfh::data
