#include <gtest/gtest.h>

#include "oracles.hpp"
#include "vfh/core/rng.hpp"
#include "vfh/nn/activations.hpp"
#include "vfh/nn/axial_attention.hpp"
#include "vfh/nn/channel_ops.hpp"
#include "vfh/nn/conv.hpp"
#include "vfh/nn/dense.hpp"
#include "vfh/nn/layer_check.hpp"
#include "vfh/nn/multi_kernel.hpp"
#include "vfh/nn/pixel_shuffle.hpp"
#include "vfh/nn/squeeze_excitation.hpp"
#include "vfh/nn/upsample.hpp"

using namespace vfh;
using core::Rng;
using core::Shape;
using core::Tensor;

namespace {

constexpr double kTol = 1e-4;

double layer_error(nn::Layer& layer, const Shape& in_shape, std::uint64_t seed) {
    Rng rng(seed);
    const Tensor x = core::uniform_tensor(in_shape, rng);
    nn::LayerChecker check(layer, x, rng);
    return check.all_errors();
}

}  // namespace

TEST(Conv2d, OneByOneIdentity) {
    Rng rng(1);
    nn::Conv2d conv("c", {3, 3, 1, 1, 0, true}, rng);
    conv.weight().value.fill(0.0);
    for (std::size_t c = 0; c < 3; ++c) conv.weight().value.at(c, c, 0, 0) = 1.0;
    const Tensor x = core::uniform_tensor({2, 3, 5, 4}, rng);
    EXPECT_EQ(conv.forward(x), x);
}

TEST(Conv2d, OnesKernelInteriorSumsNine) {
    Rng rng(2);
    nn::Conv2d conv("c", {1, 1, 3, 1, 1, true}, rng);
    conv.weight().value.fill(1.0);
    const Tensor y = conv.forward(Tensor::ones({1, 1, 5, 5}));
    EXPECT_EQ(y.at(0, 0, 2, 2), 9.0);
    EXPECT_EQ(y.at(0, 0, 0, 0), 4.0);
    EXPECT_EQ(y.at(0, 0, 0, 2), 6.0);
}

TEST(Conv2d, MatchesDirectOracle) {
    Rng rng(3);
    for (auto [k, s, p] : {std::tuple<std::size_t, std::size_t, std::size_t>{3, 1, 1}, {4, 2, 1}, {5, 2, 2}, {7, 1, 3},
                           {3, 2, 0}, {1, 1, 0}}) {
        nn::Conv2d conv("c", {3, 4, k, s, p, true}, rng);
        conv.bias().value = core::uniform_tensor({4}, rng);
        const Tensor x = core::uniform_tensor({2, 3, 9, 8}, rng);
        const Tensor expect = oracle::conv2d_direct(x, conv.weight().value, conv.bias().value, s, p);
        EXPECT_LT(core::max_abs_diff(conv.forward(x), expect), 1e-12) << "k=" << k << " s=" << s;
    }
}

TEST(Conv2d, GradCheck) {
    Rng rng(4);
    nn::Conv2d conv("c", {3, 4, 3, 1, 1, true}, rng);
    EXPECT_LT(layer_error(conv, {2, 3, 6, 6}, 40), kTol);
}

TEST(Conv2d, GradCheckRandomShapes) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        Rng rng(100 + seed);
        const std::size_t ic = 1 + rng.below(3), oc = 1 + rng.below(3), k = 1 + 2 * rng.below(3);
        const std::size_t stride = 1 + rng.below(2);
        nn::Conv2d conv("c", {ic, oc, k, stride, k / 2, true}, rng);
        EXPECT_LT(layer_error(conv, {1 + rng.below(2), ic, 5 + rng.below(4), 5 + rng.below(4)}, seed), kTol);
    }
    Rng rng(9);
    nn::Conv2d strided("s", {2, 3, 4, 2, 1, true}, rng);
    EXPECT_LT(layer_error(strided, {2, 2, 8, 6}, 9), kTol);
}

TEST(Conv2d, Errors) {
    Rng rng(5);
    nn::Conv2d conv("c", {3, 2, 5, 1, 0, true}, rng);
    EXPECT_THROW(conv.forward(Tensor({1, 2, 8, 8})), core::ShapeError);
    EXPECT_THROW(conv.forward(Tensor({1, 3, 3, 8})), core::ShapeError);
    nn::Conv2d fresh("f", {1, 1, 3, 1, 1, true}, rng);
    EXPECT_THROW(fresh.backward(Tensor({1, 1, 3, 3})), std::logic_error);
}

TEST(Conv2d, SamePaddingPreservesDims) {
    Rng rng(6);
    for (std::size_t k : {1, 3, 5, 7}) {
        nn::Conv2d conv("c", {2, 2, k, 1, k / 2, true}, rng);
        for (auto [h, w] : {std::pair<std::size_t, std::size_t>{7, 7}, {9, 13}, {16, 8}}) {
            const Tensor y = conv.forward(Tensor({1, 2, h, w}));
            EXPECT_EQ(y.dim(2), h);
            EXPECT_EQ(y.dim(3), w);
        }
    }
}

TEST(Depthwise, MatchesBlockDiagonalConv) {
    Rng rng(7);
    nn::DepthwiseConv2d dw("dw", 2, 3, 1, 1, rng);
    dw.bias().value = core::uniform_tensor({2}, rng);
    nn::Conv2d full("full", {2, 2, 3, 1, 1, true}, rng);
    full.weight().value.fill(0.0);
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < 9; ++i) full.weight().value[(c * 2 + c) * 9 + i] = dw.weight().value[c * 9 + i];
    full.bias().value = dw.bias().value;
    const Tensor x = core::uniform_tensor({2, 2, 6, 5}, rng);
    EXPECT_LT(core::max_abs_diff(dw.forward(x), full.forward(x)), 1e-12);
    EXPECT_EQ(dw.weight().value.size(), 2u * 9u);
}

TEST(Depthwise, IdentityKernel) {
    Rng rng(8);
    nn::DepthwiseConv2d dw("dw", 3, 3, 1, 1, rng);
    dw.weight().value.fill(0.0);
    for (std::size_t c = 0; c < 3; ++c) dw.weight().value.at(c, 0, 1, 1) = 1.0;
    const Tensor x = core::uniform_tensor({1, 3, 4, 4}, rng);
    EXPECT_EQ(dw.forward(x), x);
}

TEST(Depthwise, GradCheckAndGroupMismatch) {
    Rng rng(9);
    nn::DepthwiseConv2d dw("dw", 3, 3, 1, 1, rng);
    EXPECT_LT(layer_error(dw, {2, 3, 5, 6}, 1), kTol);
    nn::DepthwiseConv2d dw2("dw2", 2, 5, 2, 2, rng);
    EXPECT_LT(layer_error(dw2, {1, 2, 9, 7}, 2), kTol);
    EXPECT_THROW(dw.forward(Tensor({1, 4, 5, 5})), core::ShapeError);
}

TEST(Conv3d, UnitTemporalKernelIsPerFrameConv2d) {
    Rng rng(10);
    nn::Conv3d c3("c3", {2, 3, 1, 3, 2, 0, 1, 1}, rng);
    c3.bias().value = core::uniform_tensor({3}, rng);
    const Tensor x = core::uniform_tensor({2, 4, 2, 7, 6}, rng);
    const Tensor y = c3.forward(x);
    const Tensor w2 = c3.weight().value.reshaped({3, 2, 3, 3});
    for (std::size_t n = 0; n < 2; ++n)
        for (std::size_t t = 0; t < 4; ++t) {
            Tensor frame({1, 2, 7, 6});
            std::copy_n(x.ptr() + (n * 4 + t) * 84, 84, frame.ptr());
            const Tensor expect = oracle::conv2d_direct(frame, w2, c3.bias().value, 2, 1);
            for (std::size_t i = 0; i < expect.size(); ++i)
                ASSERT_NEAR(y[(n * 4 + t) * expect.size() + i], expect[i], 1e-12);
        }
}

TEST(Conv3d, ConstantVideoMeanKernel) {
    Rng rng(11);
    nn::Conv3d c3("c3", {1, 1, 3, 3, 1, 0, 0, 1}, rng);
    c3.weight().value.fill(1.0 / 27.0);
    const Tensor y = c3.forward(Tensor({1, 5, 1, 6, 6}, 0.4));
    ASSERT_EQ(y.shape(), (Shape{1, 3, 1, 4, 4}));
    for (double v : y.data()) EXPECT_NEAR(v, 0.4, 1e-15);
}

TEST(Conv3d, GradCheckIncludingDilation) {
    Rng rng(12);
    nn::Conv3d a("a", {1, 2, 3, 5, 2, 1, 2, 1}, rng);
    EXPECT_LT(layer_error(a, {2, 3, 1, 8, 6}, 3), kTol);
    nn::Conv3d b("b", {2, 2, 3, 1, 1, 2, 0, 2}, rng);
    EXPECT_LT(layer_error(b, {1, 5, 2, 3, 4}, 4), kTol);
    nn::Conv3d c("c", {2, 1, 2, 3, 1, 0, 1, 1}, rng);
    EXPECT_LT(layer_error(c, {1, 4, 2, 5, 5}, 5), kTol);
}

TEST(Conv3d, TemporalKernelTooLarge) {
    Rng rng(13);
    nn::Conv3d c3("c3", {1, 1, 5, 3, 1, 0, 1, 1}, rng);
    EXPECT_THROW(c3.forward(Tensor({1, 3, 1, 5, 5})), core::ShapeError);
}

TEST(Dense, ForwardAndGradCheck) {
    Rng rng(14);
    nn::Dense d("d", 5, 3, rng);
    d.bias().value = core::uniform_tensor({3}, rng);
    const Tensor x = core::uniform_tensor({2, 5}, rng);
    const Tensor y = d.forward(x);
    for (std::size_t n = 0; n < 2; ++n)
        for (std::size_t o = 0; o < 3; ++o) {
            double acc = d.bias().value[o];
            for (std::size_t i = 0; i < 5; ++i) acc += d.weight().value[o * 5 + i] * x[n * 5 + i];
            EXPECT_NEAR(y.at(n, o), acc, 1e-14);
        }
    for (std::uint64_t s = 0; s < 3; ++s) {
        nn::Dense e("e", 2 + s, 4 - s, rng);
        EXPECT_LT(layer_error(e, {1 + s, 2 + s}, s), kTol);
    }
}

TEST(Activations, GradCheck) {
    nn::LeakyReLU lrelu("l", 0.2);
    nn::ReLU relu("r");
    nn::Sigmoid sig("s");
    for (std::uint64_t s = 0; s < 3; ++s) {
        EXPECT_LT(layer_error(lrelu, {2, 3, 4, 1 + s}, s), kTol);
        EXPECT_LT(layer_error(relu, {2, 3, 4, 1 + s}, s), kTol);
        EXPECT_LT(layer_error(sig, {2, 3, 4, 1 + s}, s), kTol);
    }
    EXPECT_EQ(nn::sigmoid(0.0), 0.5);
    EXPECT_EQ(nn::sigmoid(-1000.0), 0.0);
    EXPECT_EQ(nn::sigmoid(1000.0), 1.0);
}

TEST(SqueezeExcitation, GateOverrideGivesIdentity) {
    Rng rng(15);
    nn::SqueezeExcitation se("se", 8, 4, rng);
    se.excite().weight().value.fill(0.0);
    se.excite().bias().value.fill(1e3);
    const Tensor x = core::uniform_tensor({2, 8, 3, 3}, rng);
    EXPECT_EQ(se.forward(x), x);
}

TEST(SqueezeExcitation, OutputIsGateTimesInput) {
    Rng rng(16);
    nn::SqueezeExcitation se("se", 6, 3, rng);
    const Tensor x = core::uniform_tensor({2, 6, 4, 5}, rng);
    const Tensor y = se.forward(x);
    const Tensor& g = se.gates();
    ASSERT_EQ(g.shape(), (Shape{2, 6}));
    for (std::size_t n = 0; n < 2; ++n)
        for (std::size_t c = 0; c < 6; ++c)
            for (std::size_t i = 0; i < 20; ++i)
                EXPECT_EQ(y[(n * 6 + c) * 20 + i], g.at(n, c) * x[(n * 6 + c) * 20 + i]);
}

TEST(SqueezeExcitation, GradCheckAndDivisibility) {
    for (std::uint64_t s = 0; s < 3; ++s) {
        Rng rng(17 + s);
        nn::SqueezeExcitation se("se", 4 * (s + 1), 2, rng);
        EXPECT_LT(layer_error(se, {2, 4 * (s + 1), 3, 2 + s}, s), kTol);
    }
    Rng rng(20);
    EXPECT_THROW(nn::SqueezeExcitation("bad", 6, 4, rng), core::ShapeError);
}

TEST(MultiKernel, PreservesSpatialDims) {
    Rng rng(21);
    nn::MultiKernelBlock mk("mk", 4, 2, rng);
    for (auto [h, w] : {std::pair<std::size_t, std::size_t>{7, 7}, {8, 11}, {12, 9}}) {
        const Tensor y = mk.forward(Tensor({1, 4, h, w}, 0.5));
        EXPECT_EQ(y.shape(), (Shape{1, 4, h, w}));
    }
    EXPECT_THROW(nn::MultiKernelBlock("small", 3, 2, rng), core::ShapeError);
}

TEST(MultiKernel, ZeroBranchesLeaveOneByOnePath) {
    Rng rng(22);
    const std::size_t c = 4;
    nn::MultiKernelBlock mk("mk", c, c, rng);
    for (std::size_t i = 1; i < 4; ++i) {
        mk.branch(i).weight().value.fill(0.0);
        mk.branch(i).bias().value.fill(0.0);
    }
    auto& b1 = mk.branch(0).weight().value;
    b1.fill(0.0);
    for (std::size_t k = 0; k < c; ++k) b1.at(k, k, 0, 0) = 1.0;
    auto& fw = mk.fuse().weight().value;
    fw.fill(0.0);
    for (std::size_t k = 0; k < c; ++k) fw.at(k, k, 0, 0) = 1.0;
    const Tensor x = core::uniform_tensor({2, c, 7, 8}, rng);
    EXPECT_EQ(mk.forward(x), x);
}

TEST(MultiKernel, GradCheck) {
    for (std::uint64_t s = 0; s < 3; ++s) {
        Rng rng(23 + s);
        nn::MultiKernelBlock mk("mk", 4, 2 + s, rng);
        EXPECT_LT(layer_error(mk, {1 + s % 2, 4, 7, 8 + s}, s), kTol);
    }
}

TEST(PhfeBlock, GradCheck) {
    Rng rng(26);
    nn::PhfeBlock block("p", 8, 4, 4, rng);
    EXPECT_LT(layer_error(block, {2, 8, 7, 7}, 6), kTol);
}

TEST(AxialAttention, SingleTokenPassesValue) {
    Rng rng(27);
    nn::AxialAttentionConfig cfg{2, 2};
    nn::AxialAttention att("a", 4, cfg, rng);
    const Tensor x = core::uniform_tensor({3, 4, 1, 1}, rng);
    const Tensor y = att.forward(x);
    for (double a : att.height_pass().attention_weights().data()) EXPECT_EQ(a, 1.0);
    for (double a : att.width_pass().attention_weights().data()) EXPECT_EQ(a, 1.0);
    Tensor expect = att.width_pass().value().forward(att.height_pass().value().forward(x));
    expect += x;
    EXPECT_LT(core::max_abs_diff(y, expect), 1e-14);

    nn::AxisAttention single("s", 4, cfg, nn::Axis::Width, rng);
    EXPECT_LT(core::max_abs_diff(single.forward(x), single.value().forward(x)), 1e-14);
}

TEST(AxialAttention, SoftmaxRowsSumToOne) {
    Rng rng(28);
    nn::AxialAttention att("a", 4, {2, 2}, rng);
    att.forward(core::uniform_tensor({2, 4, 5, 6}, rng, -3.0, 3.0));
    for (auto* pass : {&att.height_pass(), &att.width_pass()}) {
        const Tensor& a = pass->attention_weights();
        const std::size_t L = a.dim(3);
        for (std::size_t r = 0; r < a.size() / L; ++r) {
            double s = 0.0;
            for (std::size_t j = 0; j < L; ++j) s += a[r * L + j];
            EXPECT_NEAR(s, 1.0, 1e-12);
        }
    }
}

TEST(AxialAttention, WidthPassMatchesFullAttention) {
    Rng rng(29);
    const std::size_t c = 6, n = 9, heads = 3;
    nn::AxisAttention att("w", c, {heads, 2}, nn::Axis::Width, rng);
    att.query().bias().value = core::uniform_tensor({c}, rng);
    att.key().bias().value = core::uniform_tensor({c}, rng);
    att.value().bias().value = core::uniform_tensor({c}, rng);
    const Tensor x = core::uniform_tensor({1, c, 1, n}, rng, -2.0, 2.0);
    const Tensor y = att.forward(x);
    std::vector<std::vector<double>> tokens(n, std::vector<double>(c));
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t ch = 0; ch < c; ++ch) tokens[t][ch] = x.at(0, ch, 0, t);
    const auto expect = oracle::full_attention(tokens, att.query().weight().value, att.query().bias().value,
                                               att.key().weight().value, att.key().bias().value,
                                               att.value().weight().value, att.value().bias().value, heads);
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t ch = 0; ch < c; ++ch) EXPECT_NEAR(y.at(0, ch, 0, t), expect[t][ch], 1e-12);
}

TEST(AxialAttention, HeightPassMatchesFullAttentionPerColumn) {
    Rng rng(30);
    const std::size_t c = 4, h = 5, w = 3;
    nn::AxisAttention att("h", c, {2, 2}, nn::Axis::Height, rng);
    const Tensor x = core::uniform_tensor({2, c, h, w}, rng);
    const Tensor y = att.forward(x);
    for (std::size_t n = 0; n < 2; ++n)
        for (std::size_t col = 0; col < w; ++col) {
            std::vector<std::vector<double>> tokens(h, std::vector<double>(c));
            for (std::size_t t = 0; t < h; ++t)
                for (std::size_t ch = 0; ch < c; ++ch) tokens[t][ch] = x.at(n, ch, t, col);
            const auto expect = oracle::full_attention(tokens, att.query().weight().value, att.query().bias().value,
                                                       att.key().weight().value, att.key().bias().value,
                                                       att.value().weight().value, att.value().bias().value, 2);
            for (std::size_t t = 0; t < h; ++t)
                for (std::size_t ch = 0; ch < c; ++ch) EXPECT_NEAR(y.at(n, ch, t, col), expect[t][ch], 1e-12);
        }
}

TEST(AxialAttention, EquivariantUnderBatchPermutation) {
    Rng rng(31);
    nn::AxialAttention att("a", 4, {2, 2}, rng);
    const Tensor x = core::uniform_tensor({3, 4, 4, 5}, rng);
    const Tensor y = att.forward(x);
    const std::size_t per = 4 * 4 * 5;
    const std::size_t order[3] = {2, 0, 1};
    Tensor xp(x.shape());
    for (std::size_t n = 0; n < 3; ++n) std::copy_n(x.ptr() + order[n] * per, per, xp.ptr() + n * per);
    const Tensor yp = att.forward(xp);
    for (std::size_t n = 0; n < 3; ++n)
        for (std::size_t i = 0; i < per; ++i) EXPECT_EQ(yp[n * per + i], y[order[n] * per + i]);
}

TEST(AxialAttention, GradCheck) {
    for (std::uint64_t s = 0; s < 3; ++s) {
        Rng rng(32 + s);
        nn::AxialAttention att("a", 4, {2, 2}, rng);
        EXPECT_LT(layer_error(att, {1 + s % 2, 4, 3 + s, 4}, s), kTol);
    }
}

TEST(AxialAttention, HeadMismatch) {
    Rng rng(35);
    EXPECT_THROW(nn::AxialAttention("a", 6, {2, 2}, rng), core::ShapeError);
}

TEST(PixelShuffle, RoundTripAndUnitScale) {
    Rng rng(36);
    const Tensor x = core::uniform_tensor({2, 8, 3, 4}, rng);
    const Tensor y = nn::pixel_shuffle(x, 2);
    EXPECT_EQ(y.shape(), (Shape{2, 2, 6, 8}));
    EXPECT_EQ(nn::pixel_unshuffle(y, 2), x);
    EXPECT_EQ(nn::pixel_shuffle(x, 1), x);
    EXPECT_THROW(nn::pixel_shuffle(Tensor({1, 6, 2, 2}), 2), core::ShapeError);
}

TEST(PixelShuffle, IndexEnumeration2x2) {
    // Input channel c·4 + i·2 + j at (y, x) lands at output (c, 2y + i, 2x + j).
    Tensor x({1, 8, 2, 2});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
    const Tensor y = nn::pixel_shuffle(x, 2);
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                for (std::size_t yy = 0; yy < 2; ++yy)
                    for (std::size_t xx = 0; xx < 2; ++xx)
                        EXPECT_EQ(y.at(0, c, 2 * yy + i, 2 * xx + j), x.at(0, c * 4 + i * 2 + j, yy, xx));
    EXPECT_EQ(y.at(0, 0, 0, 1), 4.0);
    EXPECT_EQ(y.at(0, 0, 1, 0), 8.0);
    EXPECT_EQ(y.at(0, 1, 0, 0), 16.0);
}

TEST(PixelShuffle, GradCheck) {
    nn::PixelShuffle ps("ps", 2);
    for (std::uint64_t s = 0; s < 3; ++s) EXPECT_LT(layer_error(ps, {1 + s, 4 * (s + 1), 2, 3}, s), kTol);
}

TEST(BicubicLayer, GradCheck) {
    nn::BicubicResize up("up", 5, 6, 20, 24);
    EXPECT_LT(layer_error(up, {1, 2, 5, 6}, 1), kTol);
    nn::BicubicResize down("down", 16, 12, 4, 3);
    EXPECT_LT(layer_error(down, {2, 1, 16, 12}, 2), kTol);
}

TEST(ChannelOps, ConcatSliceRoundTrip) {
    Rng rng(37);
    const Tensor a = core::uniform_tensor({2, 3, 2, 2}, rng), b = core::uniform_tensor({2, 1, 2, 2}, rng);
    const Tensor cat = nn::concat_channels({&a, &b});
    EXPECT_EQ(nn::slice_channels(cat, 0, 3), a);
    EXPECT_EQ(nn::slice_channels(cat, 3, 1), b);
    const Tensor pooled = nn::global_avg_pool(a);
    EXPECT_NEAR(pooled.at(1, 2), (a.at(1, 2, 0, 0) + a.at(1, 2, 0, 1) + a.at(1, 2, 1, 0) + a.at(1, 2, 1, 1)) / 4, 1e-15);
}

TEST(Init, SeededInitIsDeterministic) {
    Rng r1(38), r2(38);
    nn::Conv2d a("c", {3, 4, 3, 1, 1, true}, r1), b("c", {3, 4, 3, 1, 1, true}, r2);
    EXPECT_EQ(a.weight().value, b.weight().value);
    const double bound = std::sqrt(6.0 / 27.0);
    for (double v : a.weight().value.data()) EXPECT_LE(std::abs(v), bound);
}
