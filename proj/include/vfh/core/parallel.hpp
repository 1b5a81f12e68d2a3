#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace vfh::core {

/// Worker count: VFH_THREADS if set (>= 1), otherwise hardware concurrency.
inline std::size_t thread_count() {
    static const std::size_t count = [] {
        std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
        if (const char* env = std::getenv("VFH_THREADS")) {
            try {
                const long v = std::stol(env);
                if (v >= 1) return std::min<std::size_t>(static_cast<std::size_t>(v), hw);
            } catch (...) {
            }
        }
        return hw;
    }();
    return count;
}

/// Runs fn(i) for i in [0, n). Callers must write disjoint outputs per index,
/// so results do not depend on the worker count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::min(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    // Lowest worker first, so the reported error does not depend on timing.
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace vfh::core
