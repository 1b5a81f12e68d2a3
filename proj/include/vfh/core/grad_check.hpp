#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "vfh/core/rng.hpp"
#include "vfh/core/tensor.hpp"

namespace vfh::core {

/// A scalar function together with its analytic gradient.
using ValueAndGrad = std::function<std::pair<double, Tensor>(const Tensor&)>;

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;
    std::size_t checked = 0;
};

/// Compares the analytic gradient against central differences at the given
/// flat indices (all elements when empty). Error per element is
/// |analytic - numeric| / max(1, |analytic|, |numeric|).
inline GradCheckResult grad_check_detailed(const ValueAndGrad& f, const Tensor& x, double eps,
                                           std::span<const std::size_t> indices = {}) {
    if (!(eps >= 1e-7 && eps <= 1e-3)) throw std::invalid_argument("grad_check: eps must lie in [1e-7, 1e-3]");
    auto [value, analytic] = f(x);
    if (!std::isfinite(value)) throw NonFiniteError("grad_check: f(x) is not finite");
    if (analytic.shape() != x.shape()) throw ShapeError("grad_check: gradient", analytic.shape(), x.shape());

    std::vector<std::size_t> all;
    if (indices.empty()) {
        all.resize(x.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        indices = all;
    }

    GradCheckResult result;
    Tensor probe = x;
    for (std::size_t idx : indices) {
        const double orig = probe[idx];
        probe[idx] = orig + eps;
        const double fp = f(probe).first;
        probe[idx] = orig - eps;
        const double fm = f(probe).first;
        probe[idx] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm)) throw NonFiniteError("grad_check: f(x ± eps) is not finite");
        const double numeric = (fp - fm) / (2.0 * eps);
        const double a = analytic[idx];
        const double err = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
        if (err > result.max_rel_error || result.checked == 0) {
            result.max_rel_error = err;
            result.worst_index = idx;
        }
        ++result.checked;
    }
    return result;
}

inline double grad_check(const ValueAndGrad& f, const Tensor& x, double eps,
                         std::span<const std::size_t> indices = {}) {
    return grad_check_detailed(f, x, eps, indices).max_rel_error;
}

/// Up to `count` distinct flat indices drawn from [0, n), sorted.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (count >= n) return idx;
    for (std::size_t i = 0; i < count; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace vfh::core
