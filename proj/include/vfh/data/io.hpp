#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vfh/core/tensor.hpp"

namespace vfh::data {

using core::Tensor;

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

/// 8-bit quantization used by every image written to disk.
inline double quantize8(double v) { return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; }

/// 16-bit quantization of audio samples in [-1, 1].
inline double quantize16(double v) { return std::round(std::clamp(v, -1.0, 1.0) * 32767.0) / 32767.0; }

// ---- PPM (binary P6, maxval 255) ----

inline std::vector<unsigned char> encode_ppm(const Tensor& chw) {
    if (chw.rank() != 3 || chw.dim(0) != 3) throw core::ShapeError("encode_ppm: expected (3,h,w), got " + core::shape_str(chw.shape()));
    const std::size_t h = chw.dim(1), w = chw.dim(2), n = h * w;
    const std::string header = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    std::vector<unsigned char> out(header.begin(), header.end());
    out.reserve(header.size() + 3 * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < 3; ++c)
            out.push_back(static_cast<unsigned char>(std::lround(std::clamp(chw[c * n + i], 0.0, 1.0) * 255.0)));
    return out;
}

inline Tensor decode_ppm(const std::vector<unsigned char>& bytes) {
    std::size_t pos = 0;
    const auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    const auto read_uint = [&](const char* what) {
        skip_space();
        if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw FormatError(std::string("ppm: malformed header (") + what + ")");
        std::size_t v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + static_cast<std::size_t>(bytes[pos++] - '0');
            if (v > (1u << 24)) throw FormatError(std::string("ppm: ") + what + " too large");
        }
        return v;
    };
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') throw FormatError("ppm: malformed header (expected P6)");
    pos = 2;
    const std::size_t w = read_uint("width"), h = read_uint("height"), maxval = read_uint("maxval");
    if (w == 0 || h == 0) throw FormatError("ppm: zero image size");
    if (maxval != 255) throw FormatError("ppm: only maxval 255 is supported, got " + std::to_string(maxval));
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw FormatError("ppm: malformed header (no separator)");
    ++pos;
    const std::size_t n = w * h;
    if (bytes.size() - pos < 3 * n) throw FormatError("ppm: truncated pixel data");
    Tensor out({3, h, w});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < 3; ++c) out[c * n + i] = bytes[pos + 3 * i + c] / 255.0;
    return out;
}

inline void write_ppm(const std::filesystem::path& path, const Tensor& chw) { write_bytes(path, encode_ppm(chw)); }
inline Tensor read_ppm(const std::filesystem::path& path) { return decode_ppm(read_bytes(path)); }

// ---- WAV (RIFF, 16-bit PCM mono) ----

namespace detail {

inline void put_le(std::vector<unsigned char>& out, std::uint32_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

inline std::uint32_t get_le(const std::vector<unsigned char>& b, std::size_t pos, int bytes) {
    if (pos + static_cast<std::size_t>(bytes) > b.size()) throw FormatError("wav: truncated file");
    std::uint32_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint32_t>(b[pos + i]) << (8 * i);
    return v;
}

inline bool tag_is(const std::vector<unsigned char>& b, std::size_t pos, const char* tag) {
    return pos + 4 <= b.size() && std::equal(tag, tag + 4, b.begin() + static_cast<std::ptrdiff_t>(pos));
}

}  // namespace detail

struct Audio {
    Tensor samples;  // (n,) in [-1, 1]
    std::uint32_t sample_rate = 16000;
};

inline std::vector<unsigned char> encode_wav(const Tensor& samples, std::uint32_t sample_rate) {
    if (samples.rank() != 1) throw core::ShapeError("encode_wav: expected (n,), got " + core::shape_str(samples.shape()));
    const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
    std::vector<unsigned char> out;
    out.reserve(44 + data_bytes);
    const auto put_tag = [&](const char* t) { out.insert(out.end(), t, t + 4); };
    put_tag("RIFF");
    detail::put_le(out, 36 + data_bytes, 4);
    put_tag("WAVE");
    put_tag("fmt ");
    detail::put_le(out, 16, 4);
    detail::put_le(out, 1, 2);  // PCM
    detail::put_le(out, 1, 2);  // mono
    detail::put_le(out, sample_rate, 4);
    detail::put_le(out, sample_rate * 2, 4);
    detail::put_le(out, 2, 2);
    detail::put_le(out, 16, 2);
    put_tag("data");
    detail::put_le(out, data_bytes, 4);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto s = static_cast<std::int16_t>(std::lround(std::clamp(samples[i], -1.0, 1.0) * 32767.0));
        detail::put_le(out, static_cast<std::uint16_t>(s), 2);
    }
    return out;
}

inline Audio decode_wav(const std::vector<unsigned char>& b) {
    if (!detail::tag_is(b, 0, "RIFF") || !detail::tag_is(b, 8, "WAVE")) throw FormatError("wav: malformed header (not RIFF/WAVE)");
    std::size_t pos = 12;
    bool have_fmt = false;
    Audio out;
    while (pos + 8 <= b.size()) {
        const std::uint32_t size = detail::get_le(b, pos + 4, 4);
        const std::size_t body = pos + 8;
        if (detail::tag_is(b, pos, "fmt ")) {
            if (size < 16) throw FormatError("wav: malformed fmt chunk");
            const auto format = detail::get_le(b, body, 2), channels = detail::get_le(b, body + 2, 2);
            const auto bits = detail::get_le(b, body + 14, 2);
            if (format != 1 || channels != 1 || bits != 16) throw FormatError("wav: only 16-bit PCM mono is supported");
            out.sample_rate = detail::get_le(b, body + 4, 4);
            have_fmt = true;
        } else if (detail::tag_is(b, pos, "data")) {
            if (!have_fmt) throw FormatError("wav: data chunk before fmt chunk");
            if (body + size > b.size()) throw FormatError("wav: truncated data chunk");
            if (size % 2) throw FormatError("wav: odd data chunk size");
            out.samples = Tensor({size / 2});
            for (std::size_t i = 0; i < size / 2; ++i)
                out.samples[i] = static_cast<std::int16_t>(detail::get_le(b, body + 2 * i, 2)) / 32767.0;
            return out;
        }
        pos = body + size + (size % 2);
    }
    throw FormatError(have_fmt ? "wav: missing data chunk" : "wav: truncated file");
}

inline void write_wav(const std::filesystem::path& path, const Tensor& samples, std::uint32_t sample_rate) {
    write_bytes(path, encode_wav(samples, sample_rate));
}
inline Audio read_wav(const std::filesystem::path& path) { return decode_wav(read_bytes(path)); }

// ---- CSV (comma separated, no quoting; cells must not contain commas or newlines) ----

using CsvRows = std::vector<std::vector<std::string>>;

inline std::string encode_csv(const CsvRows& rows) {
    std::string out;
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (row[i].find_first_of(",\n\r") != std::string::npos)
                throw FormatError("csv: cell contains a separator: " + row[i]);
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

/// Lines starting with '#' are comments and are skipped.
inline CsvRows decode_csv(const std::string& text) {
    CsvRows rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string> row;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            row.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void write_csv(const std::filesystem::path& path, const CsvRows& rows) {
    const std::string s = encode_csv(rows);
    write_bytes(path, std::vector<unsigned char>(s.begin(), s.end()));
}

inline CsvRows read_csv(const std::filesystem::path& path) {
    const auto b = read_bytes(path);
    return decode_csv(std::string(b.begin(), b.end()));
}

/// Parses a CSV cell as a double, accepting "inf".
inline double parse_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw FormatError("csv: not a number: '" + s + "'");
    return v;
}

}  // namespace vfh::data
