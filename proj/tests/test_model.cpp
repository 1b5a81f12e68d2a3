#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <set>

#include "vfh/core/grad_check.hpp"
#include "vfh/core/rng.hpp"
#include "vfh/model/checkpoint.hpp"
#include "vfh/model/discriminator.hpp"
#include "vfh/model/generator.hpp"
#include "vfh/model/mouth.hpp"
#include "vfh/model/surrogates.hpp"
#include "vfh/nn/layer_check.hpp"

using namespace vfh;
using core::Rng;
using core::Shape;
using core::Tensor;

namespace {

model::GeneratorConfig small_config() {
    model::GeneratorConfig cfg;
    cfg.channels = 8;
    cfg.blocks = 1;
    cfg.branch_channels = 4;
    cfg.se_reduction = 2;
    cfg.heads = 2;
    cfg.dim_per_head = 4;
    cfg.lr_size = 8;
    cfg.audio_channels = 4;
    return cfg;
}

struct GenInputs {
    Tensor lr, mel;
};

GenInputs random_inputs(const model::GeneratorConfig& cfg, std::size_t b, Rng& rng) {
    return {core::uniform_tensor({b, 3 * cfg.window(), cfg.lr_size, cfg.lr_size}, rng, 0.05, 0.95),
            core::uniform_tensor({b, 1, cfg.n_mels, cfg.mel_frames}, rng, 0.0, 3.0)};
}

}  // namespace

TEST(Generator, ShapeContractAtDefaultSize) {
    Rng rng(1);
    model::GeneratorConfig cfg;
    model::Generator g(cfg, rng);
    const auto in = random_inputs(cfg, 2, rng);
    const Tensor out = g.forward(in.lr, in.mel);
    EXPECT_EQ(out.shape(), (Shape{2, 3, 128, 128}));
    for (double v : out.data()) {
        ASSERT_GT(v, 0.0);
        ASSERT_LT(v, 1.0);
    }
}

TEST(Generator, OutputInUnitRangeForExtremeInputs) {
    Rng rng(2);
    const auto cfg = small_config();
    model::Generator g(cfg, rng);
    const Tensor lr = core::uniform_tensor({2, 15, 8, 8}, rng, -50.0, 50.0);
    const Tensor mel = core::uniform_tensor({2, 1, 40, 17}, rng, 0.0, 100.0);
    const Tensor out = g.forward(lr, mel);
    for (double v : out.data()) {
        ASSERT_GE(v, 0.0);
        ASSERT_LE(v, 1.0);
    }
}

TEST(Generator, MelLengthMismatch) {
    Rng rng(3);
    const auto cfg = small_config();
    model::Generator g(cfg, rng);
    const auto in = random_inputs(cfg, 1, rng);
    EXPECT_THROW(g.forward(in.lr, Tensor({1, 1, 40, 16})), core::ShapeError);
    EXPECT_THROW(g.forward(in.lr, Tensor({2, 1, 40, 17})), core::ShapeError);
    EXPECT_THROW(g.forward(Tensor({1, 12, 8, 8}), in.mel), core::ShapeError);
}

TEST(Generator, AudioPathwayChangesOutput) {
    Rng rng(4);
    const auto cfg = small_config();
    model::Generator g(cfg, rng);
    const auto in = random_inputs(cfg, 1, rng);
    const Tensor a = g.forward(in.lr, in.mel);
    const Tensor mel2 = core::uniform_tensor(in.mel.shape(), rng, 0.0, 3.0);
    const Tensor b = g.forward(in.lr, mel2);
    EXPECT_GT(core::max_abs_diff(a, b), 0.0);
}

TEST(Generator, NoAudioIgnoresMel) {
    Rng rng(5);
    auto cfg = small_config();
    cfg.no_audio = true;
    model::Generator g(cfg, rng);
    const auto in = random_inputs(cfg, 2, rng);
    const Tensor a = g.forward(in.lr, in.mel);
    const Tensor b = g.forward(in.lr, core::uniform_tensor(in.mel.shape(), rng, 0.0, 3.0));
    EXPECT_EQ(a, b);
    for (double v : a.data()) ASSERT_TRUE(v > 0.0 && v < 1.0);
}

TEST(Generator, NoAttentionPassesFusedLatent) {
    Rng rng(6);
    auto cfg = small_config();
    cfg.no_attention = true;
    model::Generator g(cfg, rng);
    const auto in = random_inputs(cfg, 1, rng);
    g.forward(in.lr, in.mel);
    EXPECT_EQ(g.fused(), g.attended());
}

TEST(Generator, GradCheckOnInputPatch) {
    Rng rng(7);
    const auto cfg = small_config();
    model::Generator g(cfg, rng);
    const auto in = random_inputs(cfg, 1, rng);
    const Tensor probe = core::uniform_tensor({1, 3, 32, 32}, rng);
    core::ValueAndGrad f = [&](const Tensor& lr) {
        const Tensor out = g.forward(lr, in.mel);
        g.zero_grad();
        return std::pair{core::dot(out, probe), g.backward(probe)};
    };
    // 2x2 patch of the centre frame's green channel plus one neighbour pixel.
    std::vector<std::size_t> idx;
    for (std::size_t y = 3; y < 5; ++y)
        for (std::size_t x = 3; x < 5; ++x) idx.push_back(in.lr.offset(0, 7, y, x));
    idx.push_back(in.lr.offset(0, 1, 2, 2));
    EXPECT_LT(core::grad_check(f, in.lr, 1e-5, idx), 1e-4);
}

TEST(Generator, GradCheckOnParameters) {
    Rng rng(8);
    const auto cfg = small_config();
    model::Generator g(cfg, rng);
    const auto in = random_inputs(cfg, 2, rng);
    const Tensor probe = core::uniform_tensor({2, 3, 32, 32}, rng);
    for (nn::Param* p : g.parameters()) {
        const Tensor saved = p->value;
        core::ValueAndGrad f = [&](const Tensor& w) {
            p->value = w;
            const Tensor out = g.forward(in.lr, in.mel);
            g.zero_grad();
            g.backward(probe);
            return std::pair{core::dot(out, probe), p->grad};
        };
        const auto idx = core::sample_indices(saved.size(), 3, rng);
        EXPECT_LT(core::grad_check(f, saved, 1e-5, idx), 1e-4) << p->name;
        p->value = saved;
    }
}

TEST(Generator, GradientsReachEveryParameter) {
    Rng rng(9);
    model::GeneratorConfig cfg;
    model::Generator g(cfg, rng);
    const auto in = random_inputs(cfg, 2, rng);
    const Tensor out = g.forward(in.lr, in.mel);
    g.zero_grad();
    g.backward(core::uniform_tensor(out.shape(), rng));
    for (const nn::Param* p : g.parameters()) {
        double mx = 0.0;
        for (double v : p->grad.data()) mx = std::max(mx, std::abs(v));
        EXPECT_GT(mx, 0.0) << p->name;
    }
}

TEST(Generator, ParameterNamesUnique) {
    Rng rng(10);
    model::Generator g(model::GeneratorConfig{}, rng);
    std::set<std::string> names;
    for (const nn::Param* p : g.parameters()) EXPECT_TRUE(names.insert(p->name).second) << p->name;
}

TEST(Generator, SeededInitIsDeterministic) {
    Rng r1(11), r2(11);
    model::Generator a(small_config(), r1), b(small_config(), r2);
    const auto pa = a.parameters(), pb = b.parameters();
    ASSERT_EQ(pa.size(), pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->value, pb[i]->value);
}

TEST(Discriminator, FiniteLogitsAndShape) {
    Rng rng(12);
    model::Discriminator d(128, rng);
    const Tensor logits = d.forward(core::uniform_tensor({3, 3, 128, 128}, rng, 0.0, 1.0));
    EXPECT_EQ(logits.shape(), (Shape{3, 1}));
    EXPECT_TRUE(logits.all_finite());
    EXPECT_THROW(d.forward(Tensor({1, 3, 64, 64})), core::ShapeError);
}

TEST(Discriminator, GradCheck) {
    Rng rng(13);
    model::Discriminator d(32, rng);
    const Tensor x = core::uniform_tensor({2, 3, 32, 32}, rng, 0.0, 1.0);
    nn::LayerChecker check(d, x, rng, 1e-5, 24);
    EXPECT_LT(check.all_errors(), 1e-4);
}

TEST(Discriminator, SensitiveToEveryProbedPixel) {
    Rng rng(14);
    model::Discriminator d(128, rng);
    Tensor x = core::uniform_tensor({1, 3, 128, 128}, rng, 0.0, 1.0);
    const double base = d.forward(x)[0];
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t i = rng.below(x.size());
        const double orig = x[i];
        x[i] = orig > 0.5 ? orig - 0.5 : orig + 0.5;
        EXPECT_NE(d.forward(x)[0], base) << "pixel " << i;
        x[i] = orig;
    }
}

TEST(PerceptNet, FrozenAndDeterministic) {
    Rng r1(15), r2(15);
    model::PerceptNet a(r1), b(r2);
    for (const nn::Param* p : a.parameters()) EXPECT_TRUE(p->frozen);
    Rng rng(16);
    const Tensor x = core::uniform_tensor({1, 3, 128, 128}, rng, 0.0, 1.0);
    const Tensor fa = a.forward(x);
    EXPECT_EQ(fa.shape(), (Shape{1, 32, 32, 32}));
    EXPECT_EQ(fa, b.forward(x));
    EXPECT_EQ(a.forward_full(x).shape(), (Shape{1, 32, 16, 16}));
}

TEST(PerceptNet, InputGradCheck) {
    Rng rng(17);
    model::PerceptNet net(rng);
    nn::LayerChecker check(net, core::uniform_tensor({1, 3, 16, 16}, rng, 0.0, 1.0), rng);
    EXPECT_LT(check.input_error(), 1e-4);
}

TEST(LipNet, TapShapesAndDeterminism) {
    Rng rng(18);
    model::SurrogateLipNet net(rng);
    const Tensor frames = core::uniform_tensor({2, 5, 1, 48, 64}, rng, 0.0, 1.0);
    const auto t1 = net.forward(frames);
    const auto t2 = net.forward(frames);
    ASSERT_EQ(t1.size(), 2u);
    EXPECT_EQ(t1[0].shape(), (Shape{2, 5, 16, 12, 16}));
    EXPECT_EQ(t1[1].shape(), (Shape{2, 5, 16, 12, 16}));
    EXPECT_EQ(t1[0], t2[0]);
    EXPECT_EQ(t1[1], t2[1]);
    EXPECT_THROW(net.forward(Tensor({1, 5, 3, 48, 64})), core::ShapeError);
}

TEST(LipNet, FramePermutationChangesTaps) {
    Rng rng(19);
    model::SurrogateLipNet net(rng);
    const Tensor frames = core::uniform_tensor({1, 5, 1, 48, 64}, rng, 0.0, 1.0);
    Tensor shuffled(frames.shape());
    const std::size_t order[5] = {3, 0, 4, 1, 2}, per = 48 * 64;
    for (std::size_t t = 0; t < 5; ++t) std::copy_n(frames.ptr() + order[t] * per, per, shuffled.ptr() + t * per);
    const auto a = net.forward(frames);
    const auto b = net.forward(shuffled);
    EXPECT_GT(core::max_abs_diff(a[1], b[1]), 0.0);
}

TEST(LipNet, InputGradCheck) {
    Rng rng(20);
    model::SurrogateLipNet net(rng);
    const Tensor frames = core::uniform_tensor({1, 5, 1, 48, 64}, rng, 0.0, 1.0);
    const auto taps = net.forward(frames);
    const Tensor r1 = core::uniform_tensor(taps[0].shape(), rng), r2 = core::uniform_tensor(taps[1].shape(), rng);
    core::ValueAndGrad f = [&](const Tensor& x) {
        const auto t = net.forward(x);
        return std::pair{core::dot(t[0], r1) + core::dot(t[1], r2), net.backward({r1, r2})};
    };
    // Thousands of ReLUs sit between input and taps; a smaller step keeps the
    // central difference from straddling a kink.
    const auto idx = core::sample_indices(frames.size(), 40, rng);
    EXPECT_LT(core::grad_check(f, frames, 1e-6, idx), 1e-4);
}

TEST(MouthCrop, ShapeWhiteAndErrors) {
    const Tensor white = Tensor::ones({3, 128, 128});
    const Tensor crop = model::mouth_crop(white);
    EXPECT_EQ(crop.shape(), (Shape{1, 48, 64}));
    for (double v : crop.data()) EXPECT_NEAR(v, 1.0, 1e-15);
    EXPECT_THROW(model::mouth_crop(Tensor({3, 100, 128})), core::ShapeError);
    EXPECT_THROW(model::mouth_crop(Tensor({1, 128, 128})), core::ShapeError);
}

TEST(MouthCrop, BackwardIsAdjoint) {
    Rng rng(21);
    const Tensor frame = core::uniform_tensor({3, 128, 128}, rng);
    const Tensor d = core::uniform_tensor({1, 48, 64}, rng);
    Tensor back({3, 128, 128});
    model::mouth_crop_backward(d, back);
    EXPECT_NEAR(core::dot(model::mouth_crop(frame), d), core::dot(frame, back), 1e-10);
}

TEST(Checkpoint, RoundTripAndErrors) {
    Rng rng(22);
    model::Checkpoint ck;
    ck.seed = 99;
    ck.step = 1234;
    ck.config_text = "seed=99\nsteps=10\n";
    ck.tensors["b"] = core::uniform_tensor({2, 3}, rng);
    ck.tensors["a.weight"] = core::uniform_tensor({4}, rng);
    const std::string bytes = model::encode_checkpoint(ck);
    const auto back = model::decode_checkpoint(bytes);
    EXPECT_EQ(back.seed, 99u);
    EXPECT_EQ(back.step, 1234u);
    EXPECT_EQ(back.config_text, ck.config_text);
    EXPECT_EQ(back.tensors, ck.tensors);
    EXPECT_EQ(bytes.substr(0, 7), "VFHCKPT");
    // Version 1, little-endian, right after the magic.
    EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 1);
    EXPECT_EQ(static_cast<unsigned char>(bytes[9]), 0);
    EXPECT_THROW(model::decode_checkpoint(bytes.substr(0, bytes.size() - 3)), model::CheckpointError);
    EXPECT_THROW(model::decode_checkpoint("NOTACKPT" + bytes.substr(8)), model::CheckpointError);
}

TEST(Checkpoint, FileRoundTripAndParamLoading) {
    Rng rng(23);
    model::Generator g(small_config(), rng);
    model::Checkpoint ck;
    model::store_params(ck, g.parameters(), "g/");
    const auto path = (std::filesystem::temp_directory_path() / "vfh_test_ckpt.bin").string();
    model::write_checkpoint(path, ck);
    Rng other(24);
    model::Generator h(small_config(), other);
    model::load_params(model::read_checkpoint(path), h.parameters(), "g/");
    EXPECT_EQ(model::param_checksum(g.parameters()), model::param_checksum(h.parameters()));
    std::filesystem::remove(path);

    auto cfg = small_config();
    cfg.channels = 4;
    cfg.dim_per_head = 2;
    model::Generator wrong(cfg, other);
    EXPECT_THROW(model::load_params(ck, wrong.parameters(), "g/"), core::ShapeError);
}

TEST(Checkpoint, ChecksumTracksValues) {
    Rng rng(25);
    model::PerceptNet net(rng);
    const auto before = model::param_checksum(net.parameters());
    EXPECT_EQ(before, model::param_checksum(net.parameters()));
    net.parameters()[0]->value[0] += 1e-12;
    EXPECT_NE(before, model::param_checksum(net.parameters()));
}
