#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "vfh/harness/evaluate.hpp"
#include "vfh/harness/trainer.hpp"

namespace vfh::harness {

/// Named arms, each a modification of the base config:
///   no_audio         audio branch and attention off
///   audio            audio on, attention off
///   audio_attention  both on
///   beta0            both on, beta = 0
///   alpha0           both on, alpha = 0
inline TrainConfig arm_config(const TrainConfig& base, const std::string& arm) {
    TrainConfig c = base;
    c.no_audio = false;
    c.no_attention = false;
    if (arm == "no_audio") {
        c.no_audio = true;
        c.no_attention = true;
    } else if (arm == "audio") {
        c.no_attention = true;
    } else if (arm == "beta0") {
        c.weights.beta = 0.0;
    } else if (arm == "alpha0") {
        c.weights.alpha = 0.0;
    } else if (arm != "audio_attention") {
        throw ConfigError("arms: unknown arm '" + arm + "' (expected no_audio, audio, audio_attention, beta0 or alpha0)");
    }
    c.checkpoint_dir = (fs::path(base.checkpoint_dir) / arm).string();
    return c;
}

inline std::vector<std::string> parse_arms(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string a;
    while (std::getline(ss, a, ','))
        if (!a.empty()) {
            if (std::find(out.begin(), out.end(), a) != out.end()) throw ConfigError("arms: duplicate arm '" + a + "'");
            out.push_back(a);
        }
    if (out.empty()) throw ConfigError("arms: no arms listed");
    return out;
}

struct ArmResult {
    std::string arm;
    TrainConfig cfg;
    EvalResult eval;
    double linf_vs_no_audio = NAN;  // max |output - no_audio output| on val, NaN without that arm
};

/// Trains every arm from the same seed for the same steps and evaluates on val.
inline std::vector<ArmResult> ablate(const TrainConfig& base, const std::function<void(const std::string&)>& log = {}) {
    base.validate();
    std::vector<ArmResult> out;
    for (const std::string& arm : parse_arms(base.arms)) {
        ArmResult r{arm, arm_config(base, arm), {}, NAN};
        if (log) log("arm " + arm + ": training " + std::to_string(r.cfg.steps) + " steps");
        const TrainResult tr = train(r.cfg);
        LoadedModel lm = load_model(tr.final_checkpoint);
        const ClipSet val = ClipSet::load(r.cfg.data_dir, data::Split::Val, r.cfg.j);
        r.eval = evaluate(*lm.models, lm.cfg, val, true);
        out.push_back(std::move(r));
    }
    const auto ref = std::find_if(out.begin(), out.end(), [](const ArmResult& a) { return a.arm == "no_audio"; });
    if (ref != out.end())
        for (auto& r : out) {
            double linf = 0.0;
            for (std::size_t i = 0; i < r.eval.outputs.size(); ++i)
                linf = std::max(linf, core::max_abs_diff(r.eval.outputs[i], ref->eval.outputs[i]));
            r.linf_vs_no_audio = linf;
        }
    return out;
}

inline std::string ablation_csv_header() {
    return "arm,psnr_y,ssim_y,erqa,bicubic_psnr_y,bicubic_ssim_y,bicubic_erqa,freq_mse,lip_loss,linf_vs_no_audio";
}

inline std::string ablation_csv(const std::vector<ArmResult>& arms, const TrainConfig& base) {
    using metrics::format_metric;
    std::string out = config_comment(base) + ablation_csv_header() + "\n";
    for (const auto& a : arms) {
        const auto& e = a.eval;
        out += a.arm + "," + format_metric(e.model.psnr_db) + "," + format_metric(e.model.ssim) + "," +
               format_metric(e.model.erqa) + "," + format_metric(e.bicubic.psnr_db) + "," + format_metric(e.bicubic.ssim) +
               "," + format_metric(e.bicubic.erqa) + "," + format_metric(e.freq_mse) + "," + format_metric(e.lip_loss) + "," +
               (std::isnan(a.linf_vs_no_audio) ? std::string("nan") : format_metric(a.linf_vs_no_audio)) + "\n";
    }
    return out;
}

}  // namespace vfh::harness
