#pragma once

#include <cmath>
#include <cstdio>
#include <span>
#include <string>

namespace vfh::metrics {

struct MetricRow {
    std::string frame;
    double psnr_db = 0.0;
    double ssim = 0.0;
    double erqa = 0.0;
};

/// Means over a set of rows. Identical-frame PSNR rows (+inf) are left out of
/// the PSNR mean and counted separately.
struct MetricSummary {
    double psnr_db = 0.0;
    double ssim = 0.0;
    double erqa = 0.0;
    std::size_t rows = 0;
    std::size_t psnr_inf = 0;
};

inline MetricSummary summarize(std::span<const MetricRow> rows) {
    MetricSummary s;
    s.rows = rows.size();
    std::size_t finite = 0;
    for (const auto& r : rows) {
        if (std::isinf(r.psnr_db)) {
            ++s.psnr_inf;
        } else {
            s.psnr_db += r.psnr_db;
            ++finite;
        }
        s.ssim += r.ssim;
        s.erqa += r.erqa;
    }
    if (finite) s.psnr_db /= static_cast<double>(finite);
    else s.psnr_db = rows.empty() ? 0.0 : INFINITY;
    if (!rows.empty()) {
        s.ssim /= static_cast<double>(rows.size());
        s.erqa /= static_cast<double>(rows.size());
    }
    return s;
}

/// "inf" for the identical-frame sentinel, otherwise round-trip precision.
inline std::string format_metric(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace vfh::metrics
