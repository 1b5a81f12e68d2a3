#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vfh/core/tensor.hpp"
#include "vfh/nn/layer.hpp"

namespace vfh::model {

/// On-disk layout, all integers little-endian:
///   magic "VFHCKPT\0" (8 bytes), version u32, seed u64,
///   config length u64 + config text, step u64, tensor count u64,
///   then per tensor in sorted name order:
///   name length u32, name bytes, rank u32, dims u64 x rank, values f64 x numel.
struct Checkpoint {
    static constexpr char kMagic[8] = {'V', 'F', 'H', 'C', 'K', 'P', 'T', '\0'};
    static constexpr std::uint32_t kVersion = 1;

    std::uint64_t seed = 0;
    std::string config_text;
    std::uint64_t step = 0;
    std::map<std::string, core::Tensor> tensors;
};

class CheckpointError : public std::runtime_error {
public:
    explicit CheckpointError(const std::string& what) : std::runtime_error("checkpoint: " + what) {}
};

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
public:
    explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::string str(std::size_t n) {
        need(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw CheckpointError("truncated file");
    }
    std::string bytes_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string encode_checkpoint(const Checkpoint& ck) {
    std::string out(Checkpoint::kMagic, sizeof Checkpoint::kMagic);
    detail::put_u32(out, Checkpoint::kVersion);
    detail::put_u64(out, ck.seed);
    detail::put_u64(out, ck.config_text.size());
    out += ck.config_text;
    detail::put_u64(out, ck.step);
    detail::put_u64(out, ck.tensors.size());
    for (const auto& [name, t] : ck.tensors) {
        detail::put_u32(out, static_cast<std::uint32_t>(name.size()));
        out += name;
        detail::put_u32(out, static_cast<std::uint32_t>(t.rank()));
        for (std::size_t d : t.shape()) detail::put_u64(out, d);
        for (double v : t.data()) detail::put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
    return out;
}

inline Checkpoint decode_checkpoint(std::string bytes) {
    detail::Reader r(std::move(bytes));
    if (r.str(8) != std::string(Checkpoint::kMagic, 8)) throw CheckpointError("bad magic");
    const std::uint32_t version = r.u32();
    if (version != Checkpoint::kVersion) throw CheckpointError("unsupported version " + std::to_string(version));
    Checkpoint ck;
    ck.seed = r.u64();
    ck.config_text = r.str(r.u64());
    ck.step = r.u64();
    const std::uint64_t count = r.u64();
    for (std::uint64_t i = 0; i < count; ++i) {
        std::string name = r.str(r.u32());
        const std::uint32_t rank = r.u32();
        core::Shape shape(rank);
        for (auto& d : shape) d = r.u64();
        std::vector<double> values(core::shape_numel(shape));
        for (double& v : values) v = std::bit_cast<double>(r.u64());
        ck.tensors.emplace(std::move(name), core::Tensor(std::move(shape), std::move(values)));
    }
    if (!r.done()) throw CheckpointError("trailing bytes");
    return ck;
}

inline void write_checkpoint(const std::string& path, const Checkpoint& ck) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw CheckpointError("cannot open " + path + " for writing");
    const std::string bytes = encode_checkpoint(ck);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw CheckpointError("write failed for " + path);
}

inline Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CheckpointError("cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_checkpoint(std::move(bytes));
}

/// Copies parameter values into `ck` under their names (with a prefix).
inline void store_params(Checkpoint& ck, const std::vector<nn::Param*>& params, const std::string& prefix = "") {
    for (const nn::Param* p : params) {
        if (!ck.tensors.emplace(prefix + p->name, p->value).second)
            throw CheckpointError("duplicate parameter name " + prefix + p->name);
    }
}

/// Loads values back; names and shapes must match exactly.
inline void load_params(const Checkpoint& ck, const std::vector<nn::Param*>& params, const std::string& prefix = "") {
    for (nn::Param* p : params) {
        const auto it = ck.tensors.find(prefix + p->name);
        if (it == ck.tensors.end()) throw CheckpointError("missing parameter " + prefix + p->name);
        if (it->second.shape() != p->value.shape())
            throw core::ShapeError("checkpoint: parameter " + prefix + p->name, it->second.shape(), p->value.shape());
        p->value = it->second;
    }
}

/// FNV-1a over names, shapes and raw value bytes of the given parameters.
inline std::uint64_t param_checksum(const std::vector<nn::Param*>& params) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (const nn::Param* p : params) {
        mix(p->name.data(), p->name.size());
        for (std::size_t d : p->value.shape()) {
            const std::uint64_t v = d;
            mix(&v, sizeof v);
        }
        for (double v : p->value.data()) {
            const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
            mix(&bits, sizeof bits);
        }
    }
    return h;
}

}  // namespace vfh::model
