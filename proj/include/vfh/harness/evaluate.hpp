#pragma once

#include <algorithm>
#include <fstream>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "vfh/harness/trainer.hpp"
#include "vfh/metrics/metrics.hpp"
#include "vfh/metrics/report.hpp"
#include "vfh/signal/resize.hpp"

namespace vfh::harness {

/// Per-frame metrics of the model and of the bicubic baseline on the same frames.
struct EvalResult {
    std::vector<metrics::MetricRow> model_rows, bicubic_rows;
    metrics::MetricSummary model, bicubic;
    double freq_mse = 0.0;  // mean over frames, luma
    double lip_loss = 0.0;  // mean over frames, hybrid sequence
    std::vector<Tensor> outputs;  // generator outputs, kept on request
};

inline Tensor frame_of(const Tensor& batch, std::size_t k) {
    const std::size_t n = batch.size() / batch.dim(0);
    return Tensor({3, batch.dim(2), batch.dim(3)}, std::vector<double>(batch.ptr() + k * n, batch.ptr() + (k + 1) * n));
}

/// Bicubic ×4 of the LR centre frame, clipped to the valid range.
inline Tensor bicubic_baseline(const Tensor& lr_window, std::size_t j, std::size_t size) {
    const std::size_t lr = lr_window.dim(1), plane = lr * lr;
    const Tensor centre({3, lr, lr}, std::vector<double>(lr_window.ptr() + 3 * j * plane, lr_window.ptr() + (3 * j + 3) * plane));
    Tensor up = signal::bicubic_resize_chw(centre, size, size);
    for (double& v : up.data()) v = std::clamp(v, 0.0, 1.0);
    return up;
}

inline metrics::MetricRow metric_row(const std::string& id, const Tensor& gt, const Tensor& sr) {
    return {id, metrics::psnr_y(gt, sr), metrics::ssim_y(gt, sr), metrics::erqa_y(gt, sr)};
}

/// Runs the generator over every window centre of the set. With `gt_vs_gt`
/// the model column is the ground truth scored against itself.
inline EvalResult evaluate(Models& m, const TrainConfig& cfg, const ClipSet& set, bool keep_outputs = false,
                           bool gt_vs_gt = false, std::size_t batch_size = 8) {
    EvalResult out;
    const std::size_t n = set.centres.size();
    if (n == 0) throw std::invalid_argument("evaluate: split has no windows");
    out.model_rows.resize(n);
    out.bicubic_rows.resize(n);
    const std::size_t hr = cfg.generator_config().hr_size();
    for (std::size_t start = 0; start < n; start += batch_size) {
        std::vector<std::size_t> picks(std::min(batch_size, n - start));
        std::iota(picks.begin(), picks.end(), start);
        const Batch batch = make_batch(set, picks, cfg.j);
        const Tensor sr = gt_vs_gt ? batch.hr : m.gen.forward(batch.lr, batch.mel);
        const double freq = losses::batch_freq_mse(batch.hr, sr, losses::FreqMode::Luma).value;
        const double lip = lip_loss_for(m, batch, sr, cfg.j).value;
        out.freq_mse += freq * static_cast<double>(picks.size());
        out.lip_loss += lip * static_cast<double>(picks.size());
        std::vector<Tensor> gts(picks.size()), srs(picks.size()), bics(picks.size());
        for (std::size_t k = 0; k < picks.size(); ++k) {
            gts[k] = frame_of(batch.hr, k);
            srs[k] = frame_of(sr, k);
            const std::size_t win = batch.lr.size() / batch.lr.dim(0);
            const Tensor lrw({batch.lr.dim(1), batch.lr.dim(2), batch.lr.dim(3)},
                             std::vector<double>(batch.lr.ptr() + k * win, batch.lr.ptr() + (k + 1) * win));
            bics[k] = bicubic_baseline(lrw, cfg.j, hr);
        }
        core::parallel_for(picks.size(), [&](std::size_t k) {
            out.model_rows[start + k] = metric_row(batch.ids[k], gts[k], srs[k]);
            out.bicubic_rows[start + k] = metric_row(batch.ids[k], gts[k], bics[k]);
        });
        if (keep_outputs)
            for (auto& s : srs) out.outputs.push_back(std::move(s));
    }
    out.freq_mse /= static_cast<double>(n);
    out.lip_loss /= static_cast<double>(n);
    out.model = metrics::summarize(out.model_rows);
    out.bicubic = metrics::summarize(out.bicubic_rows);
    return out;
}

inline std::string eval_csv_header() {
    return "frame,psnr_y,ssim_y,erqa,bicubic_psnr_y,bicubic_ssim_y,bicubic_erqa,psnr_inf,bicubic_psnr_inf";
}

/// One row per frame (id "clip:t") and a final "mean" row. The mean PSNR
/// skips identical frames; their count is in the *_psnr_inf columns.
inline std::string eval_csv(const EvalResult& r, const TrainConfig& cfg) {
    using metrics::format_metric;
    std::string out = config_comment(cfg) + eval_csv_header() + "\n";
    for (std::size_t i = 0; i < r.model_rows.size(); ++i) {
        const auto &a = r.model_rows[i], &b = r.bicubic_rows[i];
        out += a.frame + "," + format_metric(a.psnr_db) + "," + format_metric(a.ssim) + "," + format_metric(a.erqa) + "," +
               format_metric(b.psnr_db) + "," + format_metric(b.ssim) + "," + format_metric(b.erqa) + "," +
               (std::isinf(a.psnr_db) ? "1" : "0") + "," + (std::isinf(b.psnr_db) ? "1" : "0") + "\n";
    }
    out += "mean," + format_metric(r.model.psnr_db) + "," + format_metric(r.model.ssim) + "," + format_metric(r.model.erqa) +
           "," + format_metric(r.bicubic.psnr_db) + "," + format_metric(r.bicubic.ssim) + "," +
           format_metric(r.bicubic.erqa) + "," + std::to_string(r.model.psnr_inf) + "," + std::to_string(r.bicubic.psnr_inf) +
           "\n";
    return out;
}

struct LoadedModel {
    TrainConfig cfg;
    std::unique_ptr<Models> models;
};

/// Loads a checkpoint into fresh models. The architecture comes from
/// `override_cfg` when given, else from the checkpoint's own config; a
/// mismatch between the two surfaces as a shape error from the loader.
inline LoadedModel load_model(const fs::path& ckpt, const TrainConfig* override_cfg = nullptr) {
    const model::Checkpoint ck = model::read_checkpoint(ckpt.string());
    LoadedModel lm{override_cfg ? *override_cfg : TrainConfig::parse(ck.config_text), nullptr};
    lm.models = std::make_unique<Models>(lm.cfg);
    model::load_params(ck, lm.models->gen.parameters(), "g.");
    model::load_params(ck, lm.models->disc.parameters(), "d.");
    return lm;
}

inline void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
    if (!f) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace vfh::harness
