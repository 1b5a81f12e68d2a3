#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "vfh/signal/color.hpp"

namespace vfh::metrics {

using core::ShapeError;
using core::Tensor;

namespace detail {

inline void check_rgb_pair(const Tensor& gt, const Tensor& sr, const char* op) {
    if (gt.rank() != 3 || gt.dim(0) != 3) throw ShapeError(std::string(op) + ": expected (3,h,w), got " + core::shape_str(gt.shape()));
    if (gt.shape() != sr.shape()) throw ShapeError(op, gt.shape(), sr.shape());
}

inline void check_plane_pair(const Tensor& gt, const Tensor& sr, const char* op) {
    if (gt.rank() != 2) throw ShapeError(std::string(op) + ": expected (h,w), got " + core::shape_str(gt.shape()));
    if (gt.shape() != sr.shape()) throw ShapeError(op, gt.shape(), sr.shape());
}

/// Sum of a row-major plane, adding each row's mirrored pairs first so the
/// result does not depend on horizontal orientation.
inline double mirror_sum(const Tensor& p) {
    const std::size_t h = p.dim(0), w = p.dim(1);
    double total = 0.0;
    for (std::size_t y = 0; y < h; ++y) {
        const double* r = p.ptr() + y * w;
        double row = 0.0;
        for (std::size_t x = 0; x < w / 2; ++x) row += r[x] + r[w - 1 - x];
        if (w % 2) row += r[w / 2];
        total += row;
    }
    return total;
}

}  // namespace detail

/// Returned for identical frames; written as "inf" in CSV output.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

inline double psnr_plane(const Tensor& gt, const Tensor& sr) {
    detail::check_plane_pair(gt, sr, "psnr");
    double acc = 0.0;
    for (std::size_t i = 0; i < gt.size(); ++i) acc += (gt[i] - sr[i]) * (gt[i] - sr[i]);
    const double mse = acc / static_cast<double>(gt.size());
    if (mse == 0.0) return kPsnrIdentical;
    return 10.0 * std::log10(1.0 / mse);
}

/// PSNR on luma of (3, h, w) frames in [0,1].
inline double psnr_y(const Tensor& gt, const Tensor& sr) {
    detail::check_rgb_pair(gt, sr, "psnr_y");
    return psnr_plane(signal::luma_chw(gt), signal::luma_chw(sr));
}

struct SsimParams {
    std::size_t window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double range = 1.0;
};

inline std::vector<double> gaussian_window(std::size_t n, double sigma) {
    std::vector<double> g(n);
    const double c = (static_cast<double>(n) - 1.0) / 2.0;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(i) - c;
        g[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        s += g[i];
    }
    for (double& v : g) v /= s;
    return g;
}

/// Mean SSIM over all fully contained windows of two (h, w) planes.
inline double ssim_plane(const Tensor& a, const Tensor& b, const SsimParams& p = {}) {
    detail::check_plane_pair(a, b, "ssim");
    const std::size_t h = a.dim(0), w = a.dim(1), n = p.window;
    if (h < n || w < n)
        throw ShapeError("ssim: frame " + core::shape_str(a.shape()) + " smaller than the " + std::to_string(n) + "x" +
                         std::to_string(n) + " window");
    const auto g = gaussian_window(n, p.sigma);
    const double c1 = (p.k1 * p.range) * (p.k1 * p.range), c2 = (p.k2 * p.range) * (p.k2 * p.range);
    double total = 0.0;
    for (std::size_t y0 = 0; y0 + n <= h; ++y0)
        for (std::size_t x0 = 0; x0 + n <= w; ++x0) {
            double ma = 0.0, mb = 0.0;
            for (std::size_t dy = 0; dy < n; ++dy)
                for (std::size_t dx = 0; dx < n; ++dx) {
                    const double wt = g[dy] * g[dx];
                    const std::size_t i = (y0 + dy) * w + x0 + dx;
                    ma += wt * a[i];
                    mb += wt * b[i];
                }
            double va = 0.0, vb = 0.0, cov = 0.0;
            for (std::size_t dy = 0; dy < n; ++dy)
                for (std::size_t dx = 0; dx < n; ++dx) {
                    const double wt = g[dy] * g[dx];
                    const std::size_t i = (y0 + dy) * w + x0 + dx;
                    const double ea = a[i] - ma, eb = b[i] - mb;
                    va += wt * ea * ea;
                    vb += wt * eb * eb;
                    cov += wt * ea * eb;
                }
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        }
    return total / static_cast<double>((h - n + 1) * (w - n + 1));
}

inline double ssim_y(const Tensor& gt, const Tensor& sr, const SsimParams& p = {}) {
    detail::check_rgb_pair(gt, sr, "ssim_y");
    return ssim_plane(signal::luma_chw(gt), signal::luma_chw(sr), p);
}

/// Sobel gradient magnitude; the one-pixel border is zero.
inline Tensor sobel_magnitude(const Tensor& p) {
    if (p.rank() != 2) throw ShapeError("sobel_magnitude: expected (h,w), got " + core::shape_str(p.shape()));
    const std::size_t h = p.dim(0), w = p.dim(1);
    Tensor m({h, w});
    for (std::size_t y = 1; y + 1 < h; ++y)
        for (std::size_t x = 1; x + 1 < w; ++x) {
            const auto at = [&](std::size_t yy, std::size_t xx) { return p[yy * w + xx]; };
            const double gx = ((at(y - 1, x + 1) - at(y - 1, x - 1)) + (at(y + 1, x + 1) - at(y + 1, x - 1))) +
                              2.0 * (at(y, x + 1) - at(y, x - 1));
            const double gy = ((at(y + 1, x - 1) - at(y - 1, x - 1)) + (at(y + 1, x + 1) - at(y - 1, x + 1))) +
                              2.0 * (at(y + 1, x) - at(y - 1, x));
            m[y * w + x] = std::hypot(gx, gy);
        }
    return m;
}

/// Edge map threshold: mean + standard deviation of the (GT) magnitude map.
inline double edge_threshold(const Tensor& mag) {
    const double n = static_cast<double>(mag.size());
    const double mean = detail::mirror_sum(mag) / n;
    Tensor sq(mag.shape());
    for (std::size_t i = 0; i < mag.size(); ++i) sq[i] = (mag[i] - mean) * (mag[i] - mean);
    return mean + std::sqrt(detail::mirror_sum(sq) / n);
}

/// Size of a maximum matching between SR and GT edge pixels where a pair may
/// match when their Chebyshev distance is at most `tolerance`.
inline std::size_t match_edges(const std::vector<char>& sr_edges, const std::vector<char>& gt_edges, std::size_t h,
                               std::size_t w, int tolerance = 1) {
    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    std::vector<std::size_t> sr_list;
    for (std::size_t i = 0; i < h * w; ++i)
        if (sr_edges[i]) sr_list.push_back(i);
    std::vector<std::vector<std::size_t>> adj(sr_list.size());
    for (std::size_t k = 0; k < sr_list.size(); ++k) {
        const long y = static_cast<long>(sr_list[k] / w), x = static_cast<long>(sr_list[k] % w);
        for (long dy = -tolerance; dy <= tolerance; ++dy)
            for (long dx = -tolerance; dx <= tolerance; ++dx) {
                const long yy = y + dy, xx = x + dx;
                if (yy < 0 || xx < 0 || yy >= static_cast<long>(h) || xx >= static_cast<long>(w)) continue;
                const std::size_t j = static_cast<std::size_t>(yy) * w + static_cast<std::size_t>(xx);
                if (gt_edges[j]) adj[k].push_back(j);
            }
    }
    std::vector<std::size_t> gt_owner(h * w, kNone);
    std::vector<std::size_t> seen(h * w, 0);
    std::size_t stamp = 0, matched = 0;

    // Augmenting-path search, iterative to keep stack depth bounded.
    struct Frame {
        std::size_t sr;
        std::size_t next;
    };
    std::vector<Frame> stack;
    std::vector<std::size_t> path_gt;
    for (std::size_t root = 0; root < sr_list.size(); ++root) {
        ++stamp;
        stack.assign(1, {root, 0});
        path_gt.clear();
        bool found = false;
        while (!stack.empty() && !found) {
            Frame& f = stack.back();
            if (f.next == adj[f.sr].size()) {
                stack.pop_back();
                if (!path_gt.empty()) path_gt.pop_back();
                continue;
            }
            const std::size_t g = adj[f.sr][f.next++];
            if (seen[g] == stamp) continue;
            seen[g] = stamp;
            path_gt.push_back(g);
            if (gt_owner[g] == kNone) {
                found = true;
            } else {
                stack.push_back({gt_owner[g], 0});
            }
        }
        if (!found) continue;
        // stack[i].sr takes path_gt[i].
        for (std::size_t i = 0; i < stack.size(); ++i) gt_owner[path_gt[i]] = stack[i].sr;
        ++matched;
    }
    return matched;
}

/// Edge-restoration F1 score between two (h, w) luma planes. Edges are Sobel
/// magnitudes above the GT threshold; SR and GT edge pixels match one-to-one
/// within one pixel. Both edge sets empty scores 1.
inline double erqa(const Tensor& gt, const Tensor& sr) {
    detail::check_plane_pair(gt, sr, "erqa");
    const std::size_t h = gt.dim(0), w = gt.dim(1);
    const Tensor mg = sobel_magnitude(gt), ms = sobel_magnitude(sr);
    const double t = edge_threshold(mg);
    std::vector<char> eg(h * w), es(h * w);
    std::size_t ng = 0, ns = 0;
    for (std::size_t i = 0; i < h * w; ++i) {
        eg[i] = mg[i] > t;
        es[i] = ms[i] > t;
        ng += eg[i];
        ns += es[i];
    }
    if (ng + ns == 0) return 1.0;
    const std::size_t m = match_edges(es, eg, h, w);
    return 2.0 * static_cast<double>(m) / static_cast<double>(ng + ns);
}

inline double erqa_y(const Tensor& gt, const Tensor& sr) {
    detail::check_rgb_pair(gt, sr, "erqa_y");
    return erqa(signal::luma_chw(gt), signal::luma_chw(sr));
}

}  // namespace vfh::metrics
