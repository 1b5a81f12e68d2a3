#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vfh/losses/frequency.hpp"
#include "vfh/losses/total.hpp"
#include "vfh/model/generator.hpp"

namespace vfh::harness {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error("config: " + what) {}
};

/// Everything a run depends on. Serialized as flat key=value text; the text
/// is stored verbatim in checkpoints and at the top of every report.
struct TrainConfig {
    std::uint64_t seed = 1;
    std::uint64_t steps = 2000;
    std::size_t batch_size = 2;
    double lr_gen = 2e-4;
    double lr_disc = 2e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    losses::LossWeights weights;
    losses::FreqMode freq_mode = losses::FreqMode::Luma;

    std::size_t j = 2;
    std::size_t channels = 16;
    std::size_t blocks = 2;
    std::size_t branch_channels = 8;
    std::size_t se_reduction = 4;
    std::size_t heads = 2;
    std::size_t dim_per_head = 8;
    std::size_t audio_channels = 16;
    std::size_t disc_width = 8;
    bool no_audio = false;
    bool no_attention = false;
    std::uint64_t surrogate_seed = 7919;

    std::string data_dir = "data";
    std::string checkpoint_dir = "runs/default";
    std::uint64_t checkpoint_every = 500;
    std::string arms = "no_audio,audio,audio_attention,beta0,alpha0";

    model::GeneratorConfig generator_config() const;
    std::string to_text() const;
    static TrainConfig parse(const std::string& text);
    static TrainConfig load(const std::filesystem::path& path);
    void validate() const;
};

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename T>
T parse_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
        throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    return static_cast<T>(out);
}

inline double parse_real(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double out = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(out))
        throw ConfigError(key + ": expected a finite number, got '" + v + "'");
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

struct Field {
    const char* key;
    std::function<std::string(const TrainConfig&)> get;
    std::function<void(TrainConfig&, const std::string&)> set;
};

template <typename T>
Field uint_field(const char* key, T TrainConfig::*m) {
    return {key, [m](const TrainConfig& c) { return std::to_string(c.*m); },
            [m, key](TrainConfig& c, const std::string& v) { c.*m = parse_uint<T>(key, v); }};
}

inline Field real_field(const char* key, double TrainConfig::*m) {
    return {key, [m](const TrainConfig& c) { return fmt_double(c.*m); },
            [m, key](TrainConfig& c, const std::string& v) { c.*m = parse_real(key, v); }};
}

inline Field bool_field(const char* key, bool TrainConfig::*m) {
    return {key, [m](const TrainConfig& c) { return std::string(c.*m ? "true" : "false"); },
            [m, key](TrainConfig& c, const std::string& v) { c.*m = parse_bool(key, v); }};
}

inline Field string_field(const char* key, std::string TrainConfig::*m) {
    return {key, [m](const TrainConfig& c) { return c.*m; }, [m](TrainConfig& c, const std::string& v) { c.*m = v; }};
}

inline Field weight_field(const char* key, double losses::LossWeights::*m) {
    return {key, [m](const TrainConfig& c) { return fmt_double(c.weights.*m); },
            [m, key](TrainConfig& c, const std::string& v) { c.weights.*m = parse_real(key, v); }};
}

/// Keys in serialization order.
inline const std::vector<Field>& fields() {
    static const std::vector<Field> f = {
        uint_field("seed", &TrainConfig::seed),
        uint_field("steps", &TrainConfig::steps),
        uint_field("batch_size", &TrainConfig::batch_size),
        real_field("lr_gen", &TrainConfig::lr_gen),
        real_field("lr_disc", &TrainConfig::lr_disc),
        real_field("beta1", &TrainConfig::beta1),
        real_field("beta2", &TrainConfig::beta2),
        real_field("adam_eps", &TrainConfig::adam_eps),
        weight_field("alpha", &losses::LossWeights::alpha),
        weight_field("beta", &losses::LossWeights::beta),
        weight_field("gamma", &losses::LossWeights::gamma),
        {"freq_mode",
         [](const TrainConfig& c) { return std::string(c.freq_mode == losses::FreqMode::Luma ? "luma" : "per_channel"); },
         [](TrainConfig& c, const std::string& v) {
             if (v == "luma")
                 c.freq_mode = losses::FreqMode::Luma;
             else if (v == "per_channel")
                 c.freq_mode = losses::FreqMode::PerChannel;
             else
                 throw ConfigError("freq_mode: expected luma or per_channel, got '" + v + "'");
         }},
        uint_field("j", &TrainConfig::j),
        uint_field("channels", &TrainConfig::channels),
        uint_field("blocks", &TrainConfig::blocks),
        uint_field("branch_channels", &TrainConfig::branch_channels),
        uint_field("se_reduction", &TrainConfig::se_reduction),
        uint_field("heads", &TrainConfig::heads),
        uint_field("dim_per_head", &TrainConfig::dim_per_head),
        uint_field("audio_channels", &TrainConfig::audio_channels),
        uint_field("disc_width", &TrainConfig::disc_width),
        bool_field("no_audio", &TrainConfig::no_audio),
        bool_field("no_attention", &TrainConfig::no_attention),
        uint_field("surrogate_seed", &TrainConfig::surrogate_seed),
        string_field("data_dir", &TrainConfig::data_dir),
        string_field("checkpoint_dir", &TrainConfig::checkpoint_dir),
        uint_field("checkpoint_every", &TrainConfig::checkpoint_every),
        string_field("arms", &TrainConfig::arms),
    };
    return f;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

inline model::GeneratorConfig TrainConfig::generator_config() const {
    model::GeneratorConfig g;
    g.j = j;
    g.channels = channels;
    g.blocks = blocks;
    g.branch_channels = branch_channels;
    g.se_reduction = se_reduction;
    g.heads = heads;
    g.dim_per_head = dim_per_head;
    g.audio_channels = audio_channels;
    g.no_audio = no_audio;
    g.no_attention = no_attention;
    return g;
}

inline std::string TrainConfig::to_text() const {
    std::string out;
    for (const auto& f : detail::fields()) out += std::string(f.key) + "=" + f.get(*this) + "\n";
    return out;
}

inline void TrainConfig::validate() const {
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (j == 0) throw ConfigError("j must be positive");
    if (channels == 0 || blocks == 0 || branch_channels == 0 || heads == 0 || dim_per_head == 0 || audio_channels == 0 ||
        disc_width == 0)
        throw ConfigError("architecture sizes must be positive");
    if (se_reduction == 0 || channels % se_reduction != 0)
        throw ConfigError("se_reduction must divide channels");
    if (!(lr_gen > 0.0) || !(lr_disc > 0.0)) throw ConfigError("learning rates must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("Adam betas must lie in [0, 1)");
    if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
    if (weights.alpha < 0.0 || weights.beta < 0.0 || weights.gamma < 0.0) throw ConfigError("loss weights must be >= 0");
    if (checkpoint_every == 0) throw ConfigError("checkpoint_every must be positive");
}

/// Parses key=value lines. Blank lines and lines starting with '#' are
/// ignored; unknown or repeated keys are errors. Missing keys keep defaults.
inline TrainConfig TrainConfig::parse(const std::string& text) {
    TrainConfig cfg;
    std::vector<std::string> seen;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = detail::trim(t.substr(0, eq)), value = detail::trim(t.substr(eq + 1));
        const auto& fs = detail::fields();
        const auto it = std::find_if(fs.begin(), fs.end(), [&](const detail::Field& f) { return key == f.key; });
        if (it == fs.end()) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (std::find(seen.begin(), seen.end(), key) != seen.end())
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        seen.push_back(key);
        it->set(cfg, value);
    }
    cfg.validate();
    return cfg;
}

inline TrainConfig TrainConfig::load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

/// The config text as '#'-prefixed lines for report headers.
inline std::string config_comment(const TrainConfig& cfg) {
    std::string out;
    std::istringstream in(cfg.to_text());
    std::string line;
    while (std::getline(in, line)) out += "# " + line + "\n";
    return out;
}

}  // namespace vfh::harness
