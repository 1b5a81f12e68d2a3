#pragma once

#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "vfh/core/grad_check.hpp"
#include "vfh/harness/trainer.hpp"
#include "vfh/nn/layer_check.hpp"
#include "vfh/nn/multi_kernel.hpp"
#include "vfh/nn/squeeze_excitation.hpp"
#include "vfh/signal/dft2.hpp"

namespace vfh::harness {

inline constexpr double kGradTolerance = 1e-4;

struct GradCheckEntry {
    std::string name;
    std::function<double()> run;  // returns the max relative error
};

struct GradCheckLine {
    std::string name;
    double max_rel_error = 0.0;
    bool pass = false;
    std::string error;  // set when the check itself threw
};

namespace detail {

inline double check_layer(nn::Layer& layer, const Tensor& input, core::Rng& rng, double eps = 1e-5) {
    nn::LayerChecker checker(layer, input, rng, eps, 24);
    return checker.all_errors();
}

template <typename MakeLayer>
GradCheckEntry layer_entry(std::string name, std::uint64_t seed, core::Shape input_shape, MakeLayer make) {
    return {name, [=] {
                core::Rng rng(seed);
                auto layer = make(rng);
                const Tensor x = core::uniform_tensor(input_shape, rng);
                return check_layer(*layer, x, rng);
            }};
}

/// The per-element error of a scalar function of x with its analytic gradient.
inline double check_fn(const core::ValueAndGrad& f, const Tensor& x, core::Rng& rng, double eps = 1e-5,
                       std::size_t points = 32) {
    const auto idx = core::sample_indices(x.size(), points, rng);
    return core::grad_check(f, x, eps, idx);
}

/// Deliberately wrong backward: forward doubles, backward passes dy through.
class FaultyScale : public nn::Layer {
public:
    FaultyScale() : nn::Layer("faulty_scale") {}
    Tensor forward(const Tensor& x) override {
        Tensor y = x;
        y *= 2.0;
        return y;
    }
    Tensor backward(const Tensor& dy) override { return dy; }
};

inline model::GeneratorConfig small_generator() {
    model::GeneratorConfig g;
    g.channels = 8;
    g.blocks = 1;
    g.branch_channels = 4;
    g.se_reduction = 2;
    g.heads = 2;
    g.dim_per_head = 4;
    g.audio_channels = 4;
    return g;
}

/// End to end: the weighted total loss of a small generator on a real
/// synthetic window, w.r.t. its input window and a sample of every parameter.
/// Weight matrices of the frequency term are held at their base values.
inline double check_generator_end_to_end() {
    TrainConfig cfg;
    const auto g = small_generator();
    cfg.channels = g.channels;
    cfg.blocks = g.blocks;
    cfg.branch_channels = g.branch_channels;
    cfg.se_reduction = g.se_reduction;
    cfg.dim_per_head = g.dim_per_head;
    cfg.audio_channels = g.audio_channels;
    cfg.disc_width = 4;
    cfg.weights = {0.5, 0.1, 0.1};
    Models m(cfg);
    // Biases start at zero; over silent mel regions that puts audio-branch
    // ReLUs exactly on their kink, so check at a jittered point instead.
    core::Rng jitter(13);
    for (nn::Param* p : m.gen.parameters())
        if (p->name.ends_with(".bias"))
            for (double& v : p->value.data()) v = jitter.uniform(-0.05, 0.05);
    const ClipSet set({data::generate_clip(11, 2 * cfg.j + 1)}, cfg.j);
    const Batch batch = make_batch(set, {0}, cfg.j);
    const Tensor sr0 = m.gen.forward(batch.lr, batch.mel);
    const std::vector<Tensor> fixed_m = losses::batch_weight_matrices(batch.hr, sr0, cfg.freq_mode);
    auto objective = [&](const Tensor& lr) {
        const Tensor sr = m.gen.forward(lr, batch.mel);
        const GeneratorObjective obj = generator_objective(m, batch, sr, cfg.weights, cfg.freq_mode, cfg.j, &fixed_m);
        m.gen.zero_grad();
        Tensor dlr = m.gen.backward(obj.d_sr);
        return std::pair{losses::total_loss(obj.parts, cfg.weights).total, std::move(dlr)};
    };
    core::Rng rng(12);
    double worst = check_fn(objective, batch.lr, rng, 1e-6, 8);
    for (nn::Param* p : m.gen.parameters()) {
        const Tensor saved = p->value;
        core::ValueAndGrad f = [&](const Tensor& w) {
            p->value = w;
            auto r = objective(batch.lr);
            return std::pair{r.first, p->grad};
        };
        worst = std::max(worst, check_fn(f, saved, rng, 1e-6, 2));
        p->value = saved;
    }
    return worst;
}

}  // namespace detail

/// Every registered layer and loss, each exactly once.
inline std::vector<GradCheckEntry> gradcheck_registry() {
    using detail::layer_entry;
    using L = std::unique_ptr<nn::Layer>;
    std::vector<GradCheckEntry> r;
    r.push_back(layer_entry("conv2d", 1, {2, 3, 7, 6}, [](core::Rng& g) -> L {
        return std::make_unique<nn::Conv2d>("conv2d", nn::ConvSpec{3, 4, 3, 1, 1, true}, g);
    }));
    r.push_back(layer_entry("conv2d_stride2", 2, {1, 2, 8, 8}, [](core::Rng& g) -> L {
        return std::make_unique<nn::Conv2d>("conv2d_s2", nn::ConvSpec{2, 3, 4, 2, 1, true}, g);
    }));
    r.push_back(layer_entry("depthwise_conv2d", 3, {2, 3, 6, 6}, [](core::Rng& g) -> L {
        return std::make_unique<nn::DepthwiseConv2d>("dw", 3, 3, 1, 1, g);
    }));
    r.push_back(layer_entry("conv3d", 4, {1, 4, 2, 8, 8}, [](core::Rng& g) -> L {
        return std::make_unique<nn::Conv3d>("conv3d", nn::Conv3dSpec{2, 3, 3, 3, 2, 1, 1, 1}, g);
    }));
    r.push_back(layer_entry("conv3d_dilated", 5, {1, 6, 2, 5, 5}, [](core::Rng& g) -> L {
        return std::make_unique<nn::Conv3d>("conv3d_d2", nn::Conv3dSpec{2, 2, 3, 1, 1, 2, 0, 2}, g);
    }));
    r.push_back(layer_entry("dense", 6, {4, 5}, [](core::Rng& g) -> L { return std::make_unique<nn::Dense>("dense", 5, 3, g); }));
    r.push_back(layer_entry("relu", 7, {2, 3, 4, 4}, [](core::Rng&) -> L { return std::make_unique<nn::ReLU>(); }));
    r.push_back(layer_entry("leaky_relu", 8, {2, 3, 4, 4}, [](core::Rng&) -> L { return std::make_unique<nn::LeakyReLU>(); }));
    r.push_back(layer_entry("sigmoid", 9, {2, 3, 4, 4}, [](core::Rng&) -> L { return std::make_unique<nn::Sigmoid>(); }));
    r.push_back(layer_entry("squeeze_excitation", 10, {2, 8, 5, 5}, [](core::Rng& g) -> L {
        return std::make_unique<nn::SqueezeExcitation>("se", 8, 4, g);
    }));
    r.push_back(layer_entry("multi_kernel", 11, {1, 4, 8, 8}, [](core::Rng& g) -> L {
        return std::make_unique<nn::MultiKernelBlock>("mk", 4, 2, g);
    }));
    r.push_back(layer_entry("phfe_block", 12, {1, 8, 6, 6}, [](core::Rng& g) -> L {
        return std::make_unique<nn::PhfeBlock>("phfe", 8, 4, 4, g);
    }));
    r.push_back(layer_entry("axial_attention", 13, {2, 4, 5, 6}, [](core::Rng& g) -> L {
        return std::make_unique<nn::AxialAttention>("attn", 4, nn::AxialAttentionConfig{2, 2}, g);
    }));
    r.push_back(layer_entry("pixel_shuffle", 14, {1, 8, 3, 3}, [](core::Rng&) -> L {
        return std::make_unique<nn::PixelShuffle>("ps", 2);
    }));
    r.push_back(layer_entry("bicubic_resize", 15, {1, 2, 5, 6}, [](core::Rng&) -> L {
        return std::make_unique<nn::BicubicResize>("up", 5, 6, 10, 12);
    }));
    r.push_back(layer_entry("discriminator", 16, {2, 3, 16, 16}, [](core::Rng& g) -> L {
        return std::make_unique<model::Discriminator>(16, g, 4);
    }));
    r.push_back(layer_entry("percept_net", 17, {1, 3, 16, 16}, [](core::Rng& g) -> L {
        auto net = std::make_unique<model::PerceptNet>(g);
        for (nn::Param* p : net->parameters()) p->frozen = false;
        return net;
    }));
    r.push_back({"lip_net", [] {
                     core::Rng rng(18);
                     model::SurrogateLipNet net(rng);
                     const Tensor frames = core::uniform_tensor({1, 3, 1, 48, 64}, rng, 0.0, 1.0);
                     const auto taps = net.forward(frames);
                     std::vector<Tensor> probes;
                     for (const auto& t : taps) probes.push_back(core::uniform_tensor(t.shape(), rng));
                     core::ValueAndGrad f = [&](const Tensor& x) {
                         const auto ts = net.forward(x);
                         double v = 0.0;
                         for (std::size_t i = 0; i < ts.size(); ++i) v += core::dot(ts[i], probes[i]);
                         return std::pair{v, net.backward(probes)};
                     };
                     return detail::check_fn(f, frames, rng, 1e-6, 24);
                 }});
    r.push_back({"generator", [] {
                     core::Rng rng(19);
                     auto cfg = detail::small_generator();
                     cfg.lr_size = 8;
                     model::Generator gen(cfg, rng);
                     const Tensor lr = core::uniform_tensor({1, 3 * cfg.window(), 8, 8}, rng, 0.0, 1.0);
                     const Tensor mel = core::uniform_tensor({1, 1, cfg.n_mels, cfg.mel_frames}, rng, 0.0, 3.0);
                     const Tensor probe = core::uniform_tensor({1, 3, 32, 32}, rng);
                     core::ValueAndGrad f = [&](const Tensor& x) {
                         const Tensor out = gen.forward(x, mel);
                         gen.zero_grad();
                         return std::pair{core::dot(out, probe), gen.backward(probe)};
                     };
                     double worst = detail::check_fn(f, lr, rng, 1e-5, 16);
                     for (nn::Param* p : gen.parameters()) {
                         const Tensor saved = p->value;
                         core::ValueAndGrad fp = [&](const Tensor& w) {
                             p->value = w;
                             const Tensor out = gen.forward(lr, mel);
                             gen.zero_grad();
                             gen.backward(probe);
                             return std::pair{core::dot(out, probe), p->grad};
                         };
                         worst = std::max(worst, detail::check_fn(fp, saved, rng, 1e-5, 3));
                         p->value = saved;
                     }
                     return worst;
                 }});
    r.push_back({"mouth_crop", [] {
                     core::Rng rng(20);
                     const Tensor frame = core::uniform_tensor({3, 128, 128}, rng, 0.0, 1.0);
                     const Tensor probe = core::uniform_tensor({1, 48, 64}, rng);
                     core::ValueAndGrad f = [&](const Tensor& x) {
                         Tensor d(x.shape());
                         model::mouth_crop_backward(probe, d);
                         return std::pair{core::dot(model::mouth_crop(x), probe), d};
                     };
                     return detail::check_fn(f, frame, rng);
                 }});
    r.push_back({"dft2", [] {
                     core::Rng rng(21);
                     const Tensor x = core::uniform_tensor({6, 5}, rng);
                     const Tensor pr = core::uniform_tensor({6, 5}, rng), pi = core::uniform_tensor({6, 5}, rng);
                     core::ValueAndGrad f = [&](const Tensor& in) {
                         const auto s = signal::dft2(in);
                         return std::pair{core::dot(s.real, pr) + core::dot(s.imag, pi), signal::dft2_backward(pr, pi)};
                     };
                     return detail::check_fn(f, x, rng);
                 }});
    r.push_back({"freq_mse", [] {
                     core::Rng rng(22);
                     const Tensor gt = core::uniform_tensor({8, 6}, rng, 0.0, 1.0), sr = core::uniform_tensor({8, 6}, rng, 0.0, 1.0);
                     core::ValueAndGrad f = [&](const Tensor& x) {
                         const auto r = losses::freq_mse_grad(gt, x);
                         return std::pair{r.value, r.grad};
                     };
                     return detail::check_fn(f, sr, rng);
                 }});
    r.push_back({"weighted_freq_loss", [] {
                     core::Rng rng(23);
                     const Tensor gt = core::uniform_tensor({8, 6}, rng, 0.0, 1.0), sr = core::uniform_tensor({8, 6}, rng, 0.0, 1.0);
                     const Tensor m = losses::weight_matrix(signal::dft2(gt), signal::dft2(sr));
                     core::ValueAndGrad f = [&](const Tensor& x) {
                         const auto r = losses::weighted_freq_loss_grad(gt, x, &m);
                         return std::pair{r.value, r.grad};
                     };
                     return detail::check_fn(f, sr, rng);
                 }});
    r.push_back({"perceptual_loss", [] {
                     core::Rng rng(24);
                     model::PerceptNet net(rng);
                     const Tensor gt = core::uniform_tensor({1, 3, 16, 16}, rng, 0.0, 1.0);
                     const Tensor sr = core::uniform_tensor({1, 3, 16, 16}, rng, 0.0, 1.0);
                     core::ValueAndGrad f = [&](const Tensor& x) {
                         const auto r = losses::perceptual_loss(net, gt, x);
                         return std::pair{r.value, r.grad};
                     };
                     return detail::check_fn(f, sr, rng);
                 }});
    r.push_back({"lip_reading_loss", [] {
                     core::Rng rng(25);
                     model::SurrogateLipNet net(rng);
                     const Tensor gt = core::uniform_tensor({1, 3, 1, 48, 64}, rng, 0.0, 1.0);
                     const Tensor sr = core::uniform_tensor({1, 3, 1, 48, 64}, rng, 0.0, 1.0);
                     core::ValueAndGrad f = [&](const Tensor& x) {
                         const auto r = losses::lip_reading_loss(net, gt, x);
                         return std::pair{r.value, r.grad};
                     };
                     return detail::check_fn(f, sr, rng, 1e-7, 24);
                 }});
    r.push_back({"adversarial_gen", [] {
                     core::Rng rng(26);
                     const Tensor real = core::uniform_tensor({4, 1}, rng, -3.0, 3.0);
                     const Tensor fake = core::uniform_tensor({4, 1}, rng, -3.0, 3.0);
                     core::ValueAndGrad f = [&](const Tensor& x) {
                         auto a = losses::adversarial_losses(real, x);
                         return std::pair{a.gen, a.d_gen_fake};
                     };
                     return detail::check_fn(f, fake, rng);
                 }});
    r.push_back({"adversarial_disc", [] {
                     core::Rng rng(27);
                     const Tensor both = core::uniform_tensor({8, 1}, rng, -3.0, 3.0);
                     core::ValueAndGrad f = [&](const Tensor& x) {
                         const Tensor real({4, 1}, std::vector<double>(x.ptr(), x.ptr() + 4));
                         const Tensor fake({4, 1}, std::vector<double>(x.ptr() + 4, x.ptr() + 8));
                         auto a = losses::adversarial_losses(real, fake);
                         Tensor g({8, 1});
                         for (std::size_t i = 0; i < 4; ++i) {
                             g[i] = a.d_disc_real[i];
                             g[4 + i] = a.d_disc_fake[i];
                         }
                         return std::pair{a.disc, g};
                     };
                     return detail::check_fn(f, both, rng);
                 }});
    r.push_back({"generator_end_to_end", detail::check_generator_end_to_end});
    return r;
}

/// A corrupted backward that must be reported as a failure.
inline GradCheckEntry negative_control_entry() {
    return detail::layer_entry("negative_control", 99, {2, 3}, [](core::Rng&) -> std::unique_ptr<nn::Layer> {
        return std::make_unique<detail::FaultyScale>();
    });
}

inline std::vector<GradCheckLine> run_gradchecks(const std::vector<GradCheckEntry>& entries,
                                                 const std::function<void(const GradCheckLine&)>& on_line = {}) {
    std::vector<GradCheckLine> out;
    for (const auto& e : entries) {
        GradCheckLine line{e.name, 0.0, false, ""};
        try {
            line.max_rel_error = e.run();
            line.pass = std::isfinite(line.max_rel_error) && line.max_rel_error < kGradTolerance;
        } catch (const std::exception& ex) {
            line.error = ex.what();
        }
        if (on_line) on_line(line);
        out.push_back(std::move(line));
    }
    return out;
}

inline std::string format_gradcheck_line(const GradCheckLine& l) {
    char buf[256];
    if (!l.error.empty())
        std::snprintf(buf, sizeof buf, "FAIL %-22s error: %s", l.name.c_str(), l.error.c_str());
    else
        std::snprintf(buf, sizeof buf, "%s %-22s max_rel_err=%.3e", l.pass ? "PASS" : "FAIL", l.name.c_str(), l.max_rel_error);
    return buf;
}

}  // namespace vfh::harness
