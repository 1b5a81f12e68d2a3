#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "vfh/nn/activations.hpp"
#include "vfh/nn/axial_attention.hpp"
#include "vfh/nn/channel_ops.hpp"
#include "vfh/nn/conv.hpp"
#include "vfh/nn/dense.hpp"
#include "vfh/nn/multi_kernel.hpp"
#include "vfh/nn/pixel_shuffle.hpp"
#include "vfh/nn/sequential.hpp"
#include "vfh/nn/upsample.hpp"

namespace vfh::model {

using core::Rng;
using core::Shape;
using core::ShapeError;
using core::Tensor;
using nn::Param;

struct GeneratorConfig {
    std::size_t j = 2;  // neighbours on each side of the centre frame
    std::size_t channels = 16;
    std::size_t blocks = 2;
    std::size_t branch_channels = 8;
    std::size_t se_reduction = 4;
    std::size_t heads = 2;
    std::size_t dim_per_head = 8;
    std::size_t lr_size = 32;
    std::size_t scale = 4;
    std::size_t n_mels = 40;
    std::size_t mel_frames = 17;
    std::size_t audio_channels = 16;
    bool no_audio = false;
    bool no_attention = false;
    double out_init_gain = 1e-3;  // output starts at the bicubic upscale

    std::size_t window() const { return 2 * j + 1; }
    std::size_t hr_size() const { return lr_size * scale; }
};

/// Super-resolves the centre frame of an LR window, helped by its neighbours
/// and the mel spectrogram of the window's audio.
///
/// Visual branch: head conv over all frames, then PHFE blocks.
/// Cross-modal branch: xi(centre frame) and psi(mel) are concatenated, fused
/// by a 1x1 conv, and passed through axial attention. The result is added to
/// the visual features, upsampled by conv + pixel shuffle, and applied as a
/// logit-space residual on the bicubic upscale of the centre frame, so the
/// output is always in (0, 1).
class Generator {
public:
    static constexpr double kEps = 1e-3;

    Generator(const GeneratorConfig& cfg, Rng& rng)
        : cfg_(cfg),
          head_("gen.head"),
          blocks_("gen.phfe"),
          xi_("gen.xi"),
          psi_conv_("gen.psi"),
          psi_dense_("gen.psi.dense", 2 * cfg.audio_channels, cfg.channels, rng),
          psi_relu_("gen.psi.relu_out"),
          fuse_("gen.fuse"),
          attention_("gen.attn", cfg.channels, {cfg.heads, cfg.dim_per_head}, rng),
          up_("gen.up", {cfg.channels, 3 * cfg.scale * cfg.scale, 3, 1, 1, true}, rng, cfg.out_init_gain),
          shuffle_("gen.shuffle", cfg.scale),
          base_("gen.base", cfg.lr_size, cfg.lr_size, cfg.hr_size(), cfg.hr_size()) {
        const std::size_t c = cfg.channels;
        head_.add<nn::Conv2d>("gen.head.conv", nn::ConvSpec{3 * cfg.window(), c, 3, 1, 1, true}, rng);
        head_.add<nn::ReLU>("gen.head.relu");
        for (std::size_t i = 0; i < cfg.blocks; ++i)
            blocks_.add<nn::PhfeBlock>("gen.phfe" + std::to_string(i), c, cfg.branch_channels, cfg.se_reduction, rng);
        xi_.add<nn::Conv2d>("gen.xi.conv0", nn::ConvSpec{3, c, 3, 1, 1, true}, rng);
        xi_.add<nn::ReLU>("gen.xi.relu0");
        xi_.add<nn::Conv2d>("gen.xi.conv1", nn::ConvSpec{c, c, 3, 1, 1, true}, rng);
        xi_.add<nn::ReLU>("gen.xi.relu1");
        psi_conv_.add<nn::Conv2d>("gen.psi.conv0", nn::ConvSpec{1, cfg.audio_channels, 3, 2, 1, true}, rng);
        psi_conv_.add<nn::ReLU>("gen.psi.relu0");
        psi_conv_.add<nn::Conv2d>("gen.psi.conv1", nn::ConvSpec{cfg.audio_channels, 2 * cfg.audio_channels, 3, 2, 1, true},
                                  rng);
        psi_conv_.add<nn::ReLU>("gen.psi.relu1");
        fuse_.add<nn::Conv2d>("gen.fuse.conv", nn::ConvSpec{2 * c, c, 1, 1, 0, true}, rng);
        fuse_.add<nn::ReLU>("gen.fuse.relu");
    }

    const GeneratorConfig& config() const { return cfg_; }

    /// lr: (b, 3(2j+1), h, w), frames stacked oldest first. mel: (b, 1, n_mels, mel_frames).
    Tensor forward(const Tensor& lr, const Tensor& mel) {
        check_inputs(lr, mel);
        const std::size_t b = lr.dim(0), h = cfg_.lr_size, c = cfg_.channels;
        visual_ = blocks_.forward(head_.forward(lr));
        const Tensor centre = nn::slice_channels(lr, 3 * cfg_.j, 3);
        const Tensor v = xi_.forward(centre);
        Tensor a;
        if (cfg_.no_audio) {
            a = Tensor({b, c, h, h});
        } else {
            mel_shape_ = mel.shape();
            const Tensor conv = psi_conv_.forward(mel);
            psi_conv_shape_ = conv.shape();
            const Tensor emb = psi_relu_.forward(psi_dense_.forward(nn::global_avg_pool(conv)));
            a = nn::broadcast_spatial(emb, h, h);
        }
        fused_ = fuse_.forward(nn::concat_channels({&v, &a}));
        attended_ = cfg_.no_attention ? fused_ : attention_.forward(fused_);
        Tensor feat = visual_;
        feat += attended_;
        const Tensor residual = shuffle_.forward(up_.forward(feat));

        base_up_ = base_.forward(centre);
        out_ = Tensor(residual.shape());
        base_p_ = Tensor(residual.shape());
        for (std::size_t i = 0; i < out_.size(); ++i) {
            const double p = kEps + (1.0 - 2.0 * kEps) * std::clamp(base_up_[i], 0.0, 1.0);
            base_p_[i] = p;
            out_[i] = nn::sigmoid(std::log(p / (1.0 - p)) + residual[i]);
        }
        has_forward_ = true;
        return out_;
    }

    /// Accumulates parameter gradients and returns d(lr).
    Tensor backward(const Tensor& dout) {
        if (!has_forward_) throw std::logic_error("generator: backward called before forward");
        if (dout.shape() != out_.shape()) throw ShapeError("generator.backward", dout.shape(), out_.shape());
        Tensor dz(dout.shape()), dbase(dout.shape());
        for (std::size_t i = 0; i < dz.size(); ++i) {
            const double s = out_[i];
            dz[i] = dout[i] * s * (1.0 - s);
            const double p = base_p_[i];
            const bool inside = base_up_[i] > 0.0 && base_up_[i] < 1.0;
            dbase[i] = inside ? dz[i] * (1.0 - 2.0 * kEps) / (p * (1.0 - p)) : 0.0;
        }
        Tensor dcentre = base_.backward(dbase);
        const Tensor dfeat = up_.backward(shuffle_.backward(dz));
        const Tensor dfused = cfg_.no_attention ? dfeat : attention_.backward(dfeat);
        const Tensor dcat = fuse_.backward(dfused);
        const std::size_t c = cfg_.channels;
        dcentre += xi_.backward(nn::slice_channels(dcat, 0, c));
        if (!cfg_.no_audio) {
            const Tensor demb = nn::broadcast_spatial_backward(nn::slice_channels(dcat, c, c));
            const Tensor dpool = psi_dense_.backward(psi_relu_.backward(demb));
            psi_conv_.backward(nn::global_avg_pool_backward(dpool, psi_conv_shape_));
        }
        Tensor dlr = head_.backward(blocks_.backward(dfeat));
        nn::add_channel_slice(dlr, dcentre, 3 * cfg_.j);
        return dlr;
    }

    std::vector<Param*> parameters() {
        std::vector<Param*> out;
        head_.collect_params(out);
        blocks_.collect_params(out);
        xi_.collect_params(out);
        psi_conv_.collect_params(out);
        psi_dense_.collect_params(out);
        fuse_.collect_params(out);
        attention_.collect_params(out);
        up_.collect_params(out);
        return out;
    }

    void zero_grad() {
        for (Param* p : parameters()) p->zero_grad();
    }

    /// Fused cross-modal latent f^{lv'} and its attended version f^a from the last forward.
    const Tensor& fused() const { return fused_; }
    const Tensor& attended() const { return attended_; }

private:
    void check_inputs(const Tensor& lr, const Tensor& mel) const {
        const std::size_t s = cfg_.lr_size;
        if (lr.rank() != 4 || lr.dim(1) != 3 * cfg_.window() || lr.dim(2) != s || lr.dim(3) != s)
            throw ShapeError("generator: lr window", lr.shape(), Shape{lr.rank() ? lr.dim(0) : 0, 3 * cfg_.window(), s, s});
        const Shape want{lr.dim(0), 1, cfg_.n_mels, cfg_.mel_frames};
        if (mel.shape() != want) throw ShapeError("generator: window/mel length mismatch", mel.shape(), want);
    }

    GeneratorConfig cfg_;
    nn::Sequential head_, blocks_, xi_, psi_conv_;
    nn::Dense psi_dense_;
    nn::ReLU psi_relu_;
    nn::Sequential fuse_;
    nn::AxialAttention attention_;
    nn::Conv2d up_;
    nn::PixelShuffle shuffle_;
    nn::BicubicResize base_;

    bool has_forward_ = false;
    Shape mel_shape_, psi_conv_shape_;
    Tensor visual_, fused_, attended_, base_up_, base_p_, out_;
};

}  // namespace vfh::model
