#pragma once

// Independent reference implementations used only by tests. These follow
// the textbook definitions directly and share no code with the library paths
// they check.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "vfh/core/tensor.hpp"

namespace oracle {

using vfh::core::Tensor;

/// Direct double sum F(u,v) = Σ_x Σ_y P(x,y)(cos θ - i sin θ), θ = 2π(ux/w + vy/h).
/// Returns (real, imag) planes indexed [v][u].
inline std::pair<Tensor, Tensor> dft2_direct(const Tensor& img) {
    const std::size_t h = img.dim(0), w = img.dim(1);
    Tensor re({h, w}), im({h, w});
    for (std::size_t v = 0; v < h; ++v)
        for (std::size_t u = 0; u < w; ++u) {
            double sr = 0.0, si = 0.0;
            for (std::size_t x = 0; x < w; ++x)
                for (std::size_t y = 0; y < h; ++y) {
                    const double th = 2.0 * std::numbers::pi *
                                      (static_cast<double>(u * x) / static_cast<double>(w) +
                                       static_cast<double>(v * y) / static_cast<double>(h));
                    const double p = img[y * w + x];
                    sr += p * std::cos(th);
                    si -= p * std::sin(th);
                }
            re[v * w + u] = sr;
            im[v * w + u] = si;
        }
    return {re, im};
}

/// Naive NCHW cross-correlation with zero padding.
inline Tensor conv2d_direct(const Tensor& x, const Tensor& wgt, const Tensor& bias, std::size_t stride,
                            std::size_t pad) {
    const std::size_t b = x.dim(0), ic = x.dim(1), h = x.dim(2), w = x.dim(3);
    const std::size_t oc = wgt.dim(0), k = wgt.dim(2);
    const std::size_t oh = (h + 2 * pad - k) / stride + 1, ow = (w + 2 * pad - k) / stride + 1;
    Tensor y({b, oc, oh, ow});
    for (std::size_t n = 0; n < b; ++n)
        for (std::size_t o = 0; o < oc; ++o)
            for (std::size_t i = 0; i < oh; ++i)
                for (std::size_t j = 0; j < ow; ++j) {
                    double acc = bias.empty() ? 0.0 : bias[o];
                    for (std::size_t c = 0; c < ic; ++c)
                        for (std::size_t p = 0; p < k; ++p)
                            for (std::size_t q = 0; q < k; ++q) {
                                const long yy = static_cast<long>(i * stride + p) - static_cast<long>(pad);
                                const long xx = static_cast<long>(j * stride + q) - static_cast<long>(pad);
                                if (yy < 0 || xx < 0 || yy >= static_cast<long>(h) || xx >= static_cast<long>(w))
                                    continue;
                                acc += wgt.at(o, c, p, q) * x.at(n, c, static_cast<std::size_t>(yy),
                                                                  static_cast<std::size_t>(xx));
                            }
                    y.at(n, o, i, j) = acc;
                }
    return y;
}

/// Standard multi-head self-attention over tokens (L, c) with projection
/// matrices (c, c) applied as W·token + b. Returns (L, c).
inline std::vector<std::vector<double>> full_attention(const std::vector<std::vector<double>>& tokens,
                                                       const Tensor& wq, const Tensor& bq, const Tensor& wk,
                                                       const Tensor& bk, const Tensor& wv, const Tensor& bv,
                                                       std::size_t heads) {
    const std::size_t L = tokens.size(), c = tokens[0].size(), d = c / heads;
    auto project = [&](const Tensor& W, const Tensor& B) {
        std::vector<std::vector<double>> out(L, std::vector<double>(c));
        for (std::size_t t = 0; t < L; ++t)
            for (std::size_t o = 0; o < c; ++o) {
                double acc = B[o];
                for (std::size_t i = 0; i < c; ++i) acc += W[o * c + i] * tokens[t][i];
                out[t][o] = acc;
            }
        return out;
    };
    const auto q = project(wq, bq), k = project(wk, bk), v = project(wv, bv);
    std::vector<std::vector<double>> out(L, std::vector<double>(c, 0.0));
    for (std::size_t hd = 0; hd < heads; ++hd)
        for (std::size_t i = 0; i < L; ++i) {
            std::vector<double> s(L);
            double mx = -1e300;
            for (std::size_t j = 0; j < L; ++j) {
                double acc = 0.0;
                for (std::size_t e = hd * d; e < (hd + 1) * d; ++e) acc += q[i][e] * k[j][e];
                s[j] = acc / std::sqrt(static_cast<double>(d));
                mx = std::max(mx, s[j]);
            }
            double z = 0.0;
            for (auto& e : s) z += (e = std::exp(e - mx));
            for (std::size_t e = hd * d; e < (hd + 1) * d; ++e) {
                double acc = 0.0;
                for (std::size_t j = 0; j < L; ++j) acc += s[j] / z * v[j][e];
                out[i][e] = acc;
            }
        }
    return out;
}

}  // namespace oracle
