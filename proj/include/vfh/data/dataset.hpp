#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "vfh/core/parallel.hpp"
#include "vfh/data/io.hpp"
#include "vfh/data/synthetic.hpp"

namespace vfh::data {

namespace fs = std::filesystem;

enum class Split { Train, Val, Test };

inline const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

inline Split parse_split(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw std::invalid_argument("unknown split '" + s + "' (expected train, val or test)");
}

/// Clip seeds are consecutive from `seed`: train first, then val, then test.
struct DatasetSpec {
    std::uint64_t seed = 1;
    std::size_t train = 32, val = 4, test = 4;
    std::size_t frames = 24;

    std::vector<std::pair<std::uint64_t, Split>> assignments() const {
        std::vector<std::pair<std::uint64_t, Split>> out;
        std::uint64_t s = seed;
        for (std::size_t i = 0; i < train; ++i) out.emplace_back(s++, Split::Train);
        for (std::size_t i = 0; i < val; ++i) out.emplace_back(s++, Split::Val);
        for (std::size_t i = 0; i < test; ++i) out.emplace_back(s++, Split::Test);
        return out;
    }
};

inline fs::path clip_dir(const fs::path& root, std::uint64_t seed) { return root / "clips" / std::to_string(seed); }

inline std::string frame_file(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%04zu.ppm", i);
    return buf;
}

inline void write_clip(const fs::path& root, const SyntheticClip& clip) {
    const fs::path dir = clip_dir(root, clip.seed);
    fs::create_directories(dir);
    for (std::size_t i = 0; i < clip.length(); ++i) write_ppm(dir / frame_file(i), clip.frame(i));
    write_wav(dir / "audio.wav", clip.audio, kSampleRate);
    CsvRows meta{{"frame", "mouth_openness"}};
    for (std::size_t i = 0; i < clip.length(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", clip.openness[i]);
        meta.push_back({std::to_string(i), buf});
    }
    write_csv(dir / "meta.csv", meta);
}

inline SyntheticClip read_clip(const fs::path& root, std::uint64_t seed) {
    const fs::path dir = clip_dir(root, seed);
    const CsvRows meta = read_csv(dir / "meta.csv");
    if (meta.size() < 2 || meta[0] != std::vector<std::string>{"frame", "mouth_openness"})
        throw FormatError("meta.csv: bad header in " + dir.string());
    SyntheticClip clip;
    clip.seed = seed;
    for (std::size_t r = 1; r < meta.size(); ++r) {
        if (meta[r].size() != 2) throw FormatError("meta.csv: bad row " + std::to_string(r) + " in " + dir.string());
        clip.openness.push_back(parse_double(meta[r][1]));
    }
    const std::size_t k = clip.openness.size(), plane = 3 * kFrameSize * kFrameSize;
    clip.frames = Tensor({k, 3, kFrameSize, kFrameSize});
    for (std::size_t i = 0; i < k; ++i) {
        const Tensor f = read_ppm(dir / frame_file(i));
        if (f.shape() != core::Shape{3, kFrameSize, kFrameSize})
            throw FormatError("frame " + (dir / frame_file(i)).string() + " is " + core::shape_str(f.shape()));
        std::copy_n(f.ptr(), plane, clip.frames.ptr() + i * plane);
    }
    Audio a = read_wav(dir / "audio.wav");
    if (a.sample_rate != kSampleRate) throw FormatError("audio.wav: expected 16000 Hz, got " + std::to_string(a.sample_rate));
    if (a.samples.size() != k * kSamplesPerFrame)
        throw FormatError("audio.wav: " + std::to_string(a.samples.size()) + " samples for " + std::to_string(k) + " frames");
    clip.audio = std::move(a.samples);
    return clip;
}

/// Generates every clip of the spec and writes clips/ plus splits.csv.
inline void generate_dataset(const fs::path& root, const DatasetSpec& spec) {
    const auto assign = spec.assignments();
    core::parallel_for(assign.size(), [&](std::size_t i) { write_clip(root, generate_clip(assign[i].first, spec.frames)); });
    CsvRows splits{{"seed", "split"}};
    for (const auto& [seed, split] : assign) splits.push_back({std::to_string(seed), split_name(split)});
    write_csv(root / "splits.csv", splits);
}

inline std::vector<std::uint64_t> split_seeds(const fs::path& root, Split split) {
    const CsvRows rows = read_csv(root / "splits.csv");
    if (rows.empty() || rows[0] != std::vector<std::string>{"seed", "split"})
        throw FormatError("splits.csv: bad header in " + root.string());
    std::vector<std::uint64_t> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 2) throw FormatError("splits.csv: bad row " + std::to_string(r));
        if (parse_split(rows[r][1]) == split) out.push_back(std::stoull(rows[r][0]));
    }
    return out;
}

inline std::vector<SyntheticClip> load_split(const fs::path& root, Split split) {
    const auto seeds = split_seeds(root, split);
    std::vector<SyntheticClip> clips(seeds.size());
    core::parallel_for(seeds.size(), [&](std::size_t i) { clips[i] = read_clip(root, seeds[i]); });
    return clips;
}

}  // namespace vfh::data
