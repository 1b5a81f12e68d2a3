#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <type_traits>
#include <vector>

#include "vfh/data/dataset.hpp"
#include "vfh/data/samples.hpp"
#include "vfh/harness/adam.hpp"
#include "vfh/harness/config.hpp"
#include "vfh/losses/adversarial.hpp"
#include "vfh/losses/feature.hpp"
#include "vfh/losses/frequency.hpp"
#include "vfh/losses/total.hpp"
#include "vfh/model/checkpoint.hpp"
#include "vfh/model/discriminator.hpp"
#include "vfh/model/generator.hpp"
#include "vfh/model/mouth.hpp"
#include "vfh/model/surrogates.hpp"

namespace vfh::harness {

namespace fs = std::filesystem;
using core::Tensor;

/// Clips of one split with their LR frames and every valid window centre.
struct ClipSet {
    std::vector<data::SyntheticClip> clips;
    std::vector<Tensor> lr_frames;
    std::vector<std::pair<std::size_t, std::size_t>> centres;  // (clip index, t)

    ClipSet() = default;
    ClipSet(std::vector<data::SyntheticClip> c, std::size_t j) : clips(std::move(c)) {
        for (std::size_t i = 0; i < clips.size(); ++i) {
            if (clips[i].length() < 2 * j + 1)
                throw std::invalid_argument("clip " + std::to_string(clips[i].seed) + " has " +
                                            std::to_string(clips[i].length()) + " frames, fewer than the window");
            lr_frames.push_back(data::downsample_frames(clips[i]));
            for (std::size_t t = j; t + j < clips[i].length(); ++t) centres.emplace_back(i, t);
        }
    }

    static ClipSet load(const fs::path& root, data::Split split, std::size_t j) {
        auto clips = data::load_split(root, split);
        if (clips.empty()) throw std::invalid_argument(std::string("split '") + data::split_name(split) + "' is empty in " + root.string());
        return ClipSet(std::move(clips), j);
    }
};

/// A stacked minibatch.
struct Batch {
    Tensor lr;        // (b, 3(2j+1), 32, 32)
    Tensor mel;       // (b, 1, n_mels, mel_frames)
    Tensor hr;        // (b, 3, 128, 128)
    Tensor mouth_gt;  // (b, 2j+1, 1, 48, 64)
    std::vector<std::string> ids;

    std::size_t size() const { return lr.dim(0); }
};

inline Batch make_batch(const ClipSet& set, const std::vector<std::size_t>& picks, std::size_t j) {
    const std::size_t b = picks.size(), win = 2 * j + 1;
    Batch out;
    for (std::size_t k = 0; k < b; ++k) {
        const auto [ci, t] = set.centres.at(picks[k]);
        const data::VideoSample s = data::make_sample(set.clips[ci], set.lr_frames[ci], t, j);
        if (k == 0) {
            out.lr = Tensor({b, s.lr_window.dim(0), s.lr_window.dim(1), s.lr_window.dim(2)});
            out.mel = Tensor({b, 1, s.mel.dim(0), s.mel.dim(1)});
            out.hr = Tensor({b, 3, s.hr_center.dim(1), s.hr_center.dim(2)});
            out.mouth_gt = Tensor({b, win, 1, model::MouthBox::kHeight, model::MouthBox::kWidth});
        }
        std::copy_n(s.lr_window.ptr(), s.lr_window.size(), out.lr.ptr() + k * s.lr_window.size());
        std::copy_n(s.mel.ptr(), s.mel.size(), out.mel.ptr() + k * s.mel.size());
        std::copy_n(s.hr_center.ptr(), s.hr_center.size(), out.hr.ptr() + k * s.hr_center.size());
        std::copy_n(s.mouth_gt.ptr(), s.mouth_gt.size(), out.mouth_gt.ptr() + k * s.mouth_gt.size());
        out.ids.push_back(std::to_string(set.clips[ci].seed) + ":" + std::to_string(t));
    }
    return out;
}

/// Generator, discriminator and the two frozen surrogates. Trainable nets are
/// seeded from the run seed; surrogates from surrogate_seed so that every run
/// shares the same loss definition.
struct Models {
    core::Rng g_rng, d_rng, s_rng;
    model::Generator gen;
    model::Discriminator disc;
    model::PerceptNet percept;
    model::SurrogateLipNet lip;

    explicit Models(const TrainConfig& cfg)
        : g_rng(core::mix_seed(cfg.seed, 1)),
          d_rng(core::mix_seed(cfg.seed, 2)),
          s_rng(core::mix_seed(cfg.surrogate_seed, 3)),
          gen(cfg.generator_config(), g_rng),
          disc(cfg.generator_config().hr_size(), d_rng, cfg.disc_width),
          percept(s_rng),
          lip(s_rng) {}

    std::vector<nn::Param*> frozen_params() {
        auto out = percept.parameters();
        for (nn::Param* p : lip.parameters()) out.push_back(p);
        return out;
    }
};

/// Mouth sequence fed to the lip loss for generated output: the ground-truth
/// neighbour crops with the centre crop taken from sr.
inline Tensor hybrid_mouth_sequence(const Tensor& mouth_gt, const Tensor& sr, std::size_t j) {
    Tensor seq = mouth_gt;
    const std::size_t b = sr.dim(0), win = mouth_gt.dim(1), crop = model::MouthBox::kHeight * model::MouthBox::kWidth;
    const std::size_t frame = sr.size() / b;
    for (std::size_t k = 0; k < b; ++k) {
        const Tensor f({3, sr.dim(2), sr.dim(3)}, std::vector<double>(sr.ptr() + k * frame, sr.ptr() + (k + 1) * frame));
        const Tensor c = model::mouth_crop(f);
        std::copy_n(c.ptr(), crop, seq.ptr() + (k * win + j) * crop);
    }
    return seq;
}

/// Pulls the centre-crop gradient of a hybrid sequence back onto sr.
inline void hybrid_mouth_backward(const Tensor& dseq, std::size_t j, Tensor& dsr) {
    const std::size_t b = dsr.dim(0), win = dseq.dim(1), crop = model::MouthBox::kHeight * model::MouthBox::kWidth;
    const std::size_t frame = dsr.size() / b;
    for (std::size_t k = 0; k < b; ++k) {
        const Tensor dc({1, model::MouthBox::kHeight, model::MouthBox::kWidth},
                        std::vector<double>(dseq.ptr() + (k * win + j) * crop, dseq.ptr() + (k * win + j + 1) * crop));
        Tensor df({3, dsr.dim(2), dsr.dim(3)});
        model::mouth_crop_backward(dc, df);
        for (std::size_t i = 0; i < frame; ++i) dsr[k * frame + i] += df[i];
    }
}

inline losses::LossGrad lip_loss_for(Models& m, const Batch& batch, const Tensor& sr, std::size_t j) {
    const Tensor seq = hybrid_mouth_sequence(batch.mouth_gt, sr, j);
    losses::LossGrad lg = losses::lip_reading_loss(m.lip, batch.mouth_gt, seq);
    Tensor dsr(sr.shape());
    hybrid_mouth_backward(lg.grad, j, dsr);
    lg.grad = std::move(dsr);
    return lg;
}

/// Generator objective on a given output: parts of the loss and d total / d sr.
/// The discriminator is evaluated as is; its parameter gradients are cleared.
struct GeneratorObjective {
    losses::LossParts parts;
    Tensor d_sr;
};

inline GeneratorObjective generator_objective(Models& m, const Batch& batch, const Tensor& sr, const losses::LossWeights& w,
                                              losses::FreqMode mode, std::size_t j,
                                              const std::vector<Tensor>* fixed_m = nullptr) {
    GeneratorObjective out;
    const losses::LossGrad vgg = losses::perceptual_loss(m.percept, batch.hr, sr);
    const losses::LossGrad lip = lip_loss_for(m, batch, sr, j);
    const losses::LossGrad freq = losses::batch_weighted_freq_loss(batch.hr, sr, mode, fixed_m);
    const Tensor real_logits = m.disc.forward(batch.hr);
    const Tensor fake_logits = m.disc.forward(sr);
    const losses::AdversarialLosses adv = losses::adversarial_losses(real_logits, fake_logits);
    m.disc.zero_grad();
    const Tensor dadv = m.disc.backward(adv.d_gen_fake);
    m.disc.zero_grad();
    out.parts = {vgg.value, lip.value, freq.value, adv.gen, adv.disc};
    losses::total_loss(out.parts, w);  // throws naming the first non-finite term
    out.d_sr = vgg.grad;
    for (std::size_t i = 0; i < out.d_sr.size(); ++i)
        out.d_sr[i] += w.alpha * lip.grad[i] + w.beta * freq.grad[i] + w.gamma * dadv[i];
    return out;
}

inline std::uint64_t frozen_checksum(Models& m) { return model::param_checksum(m.frozen_params()); }

/// Alternating GAN training: per step one discriminator update on the current
/// generator output, then one generator update on the weighted total loss.
class Trainer {
public:
    Trainer(TrainConfig cfg, ClipSet train)
        : cfg_(std::move(cfg)),
          train_(std::move(train)),
          models_(cfg_),
          opt_g_(models_.gen.parameters(), {cfg_.lr_gen, cfg_.beta1, cfg_.beta2, cfg_.adam_eps}),
          opt_d_(models_.disc.parameters(), {cfg_.lr_disc, cfg_.beta1, cfg_.beta2, cfg_.adam_eps}),
          frozen_sum_(frozen_checksum(models_)) {
        if (train_.centres.empty()) throw std::invalid_argument("train: no training windows");
    }

    const TrainConfig& config() const { return cfg_; }
    Models& models() { return models_; }
    std::uint64_t step_index() const { return step_; }

    /// Minibatch for a step; depends only on (seed, step).
    Batch batch_for(std::uint64_t step) const {
        core::Rng rng(core::mix_seed(cfg_.seed ^ 0xba7c4ULL, step));
        std::vector<std::size_t> picks(cfg_.batch_size);
        for (auto& p : picks) p = static_cast<std::size_t>(rng.below(train_.centres.size()));
        return make_batch(train_, picks, cfg_.j);
    }

    /// Runs one step and returns its report (losses measured before the updates).
    losses::LossReport step() {
        const Batch batch = batch_for(step_);
        Models& m = models_;
        const Tensor sr = m.gen.forward(batch.lr, batch.mel);

        m.disc.zero_grad();
        const Tensor real_logits = m.disc.forward(batch.hr);
        const Tensor fake_logits = m.disc.forward(sr);
        const losses::AdversarialLosses adv = named_term("l_adv_d", [&] { return losses::adversarial_losses(real_logits, fake_logits); });
        m.disc.backward(adv.d_disc_fake);
        m.disc.forward(batch.hr);
        m.disc.backward(adv.d_disc_real);
        const double disc_loss = adv.disc;
        opt_d_.step();

        const GeneratorObjective obj =
            named_term("l_adv_g", [&] { return generator_objective(m, batch, sr, cfg_.weights, cfg_.freq_mode, cfg_.j); });
        losses::LossParts parts = obj.parts;
        parts.adv_d = disc_loss;
        const losses::LossReport report = named_term("", [&] { return losses::total_loss(parts, cfg_.weights, step_); });
        m.gen.zero_grad();
        m.gen.backward(obj.d_sr);
        opt_g_.step();
        ++step_;
        return report;
    }

    /// Generator objective on a fixed batch without updating anything.
    losses::LossReport probe(const Batch& batch) {
        const Tensor sr = models_.gen.forward(batch.lr, batch.mel);
        const GeneratorObjective obj = generator_objective(models_, batch, sr, cfg_.weights, cfg_.freq_mode, cfg_.j);
        return losses::total_loss(obj.parts, cfg_.weights, step_);
    }

    model::Checkpoint snapshot() {
        if (frozen_checksum(models_) != frozen_sum_) throw std::logic_error("train: frozen surrogate weights changed");
        model::Checkpoint ck;
        ck.seed = cfg_.seed;
        ck.config_text = cfg_.to_text();
        ck.step = step_;
        model::store_params(ck, models_.gen.parameters(), "g.");
        model::store_params(ck, models_.disc.parameters(), "d.");
        opt_g_.store(ck, "adam.g.");
        opt_d_.store(ck, "adam.d.");
        ck.tensors.emplace("frozen.checksum", checksum_tensor(frozen_sum_));
        return ck;
    }

    /// Restores weights, optimizer state and step. The checkpoint's config
    /// must match this trainer's except for steps, paths and checkpoint_every.
    void restore(const model::Checkpoint& ck) {
        TrainConfig a = TrainConfig::parse(ck.config_text), b = cfg_;
        for (TrainConfig* c : {&a, &b}) {
            c->steps = 0;
            c->checkpoint_every = 1;
            c->data_dir.clear();
            c->checkpoint_dir.clear();
        }
        if (a.to_text() != b.to_text()) throw model::CheckpointError("resume: checkpoint config differs from the run config");
        const auto it = ck.tensors.find("frozen.checksum");
        if (it == ck.tensors.end() || !(it->second == checksum_tensor(frozen_sum_)))
            throw model::CheckpointError("frozen surrogate checksum mismatch");
        model::load_params(ck, models_.gen.parameters(), "g.");
        model::load_params(ck, models_.disc.parameters(), "d.");
        opt_g_.load(ck, "adam.g.");
        opt_d_.load(ck, "adam.d.");
        step_ = ck.step;
    }

private:
    /// Runs f, turning a non-finite failure into one that names the step and
    /// the loss term (total_loss names its own term; pass "" for it).
    template <typename F>
    std::invoke_result_t<F&> named_term(const char* term, F&& f) const {
        try {
            return f();
        } catch (const core::NonFiniteError& e) {
            const std::string where = "train: step " + std::to_string(step_) + ": ";
            if (*term) throw core::NonFiniteError(where + "non-finite term " + term + " (" + e.what() + ")");
            throw core::NonFiniteError(where + e.what());
        }
    }

    static Tensor checksum_tensor(std::uint64_t h) {
        return Tensor({2}, std::vector<double>{static_cast<double>(h >> 32), static_cast<double>(h & 0xffffffffULL)});
    }

    TrainConfig cfg_;
    ClipSet train_;
    Models models_;
    Adam opt_g_, opt_d_;
    std::uint64_t frozen_sum_;
    std::uint64_t step_ = 0;
};

inline std::string checkpoint_name(std::uint64_t step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "step_%06llu.ckpt", static_cast<unsigned long long>(step));
    return buf;
}

struct TrainResult {
    fs::path final_checkpoint;
    fs::path loss_csv;
    std::vector<losses::LossReport> reports;  // this invocation's steps only
};

/// Trains to cfg.steps, writing <checkpoint_dir>/loss.csv, a checkpoint every
/// checkpoint_every steps and final.ckpt. With `resume`, continues from that
/// checkpoint and keeps the existing CSV rows before its step.
inline TrainResult train(const TrainConfig& cfg, const fs::path& resume = {},
                         const std::function<void(const losses::LossReport&)>& on_step = {}) {
    cfg.validate();
    Trainer trainer(cfg, ClipSet::load(cfg.data_dir, data::Split::Train, cfg.j));
    const fs::path dir = cfg.checkpoint_dir;
    fs::create_directories(dir);
    TrainResult result{dir / "final.ckpt", dir / "loss.csv", {}};

    std::vector<std::string> kept;
    if (!resume.empty()) {
        const model::Checkpoint ck = model::read_checkpoint(resume.string());
        trainer.restore(ck);
        std::ifstream old(result.loss_csv);
        std::string line;
        while (std::getline(old, line)) {
            if (line.empty() || line.front() == '#' || line == losses::loss_csv_header()) continue;
            if (std::stoull(line.substr(0, line.find(','))) < ck.step) kept.push_back(line);
        }
    }
    std::ofstream csv(result.loss_csv, std::ios::trunc);
    if (!csv) throw std::runtime_error("train: cannot write " + result.loss_csv.string());
    csv << config_comment(cfg) << losses::loss_csv_header() << "\n";
    for (const auto& l : kept) csv << l << "\n";

    while (trainer.step_index() < cfg.steps) {
        const losses::LossReport r = trainer.step();
        csv << losses::loss_csv_row(r) << "\n";
        result.reports.push_back(r);
        if (on_step) on_step(r);
        if (trainer.step_index() % cfg.checkpoint_every == 0)
            model::write_checkpoint((dir / checkpoint_name(trainer.step_index())).string(), trainer.snapshot());
    }
    csv.flush();
    if (!csv) throw std::runtime_error("train: write failed for " + result.loss_csv.string());
    model::write_checkpoint(result.final_checkpoint.string(), trainer.snapshot());
    return result;
}

}  // namespace vfh::harness
