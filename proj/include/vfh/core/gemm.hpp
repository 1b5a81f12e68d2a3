#pragma once

#include <algorithm>
#include <cstddef>
#include <cstring>

namespace vfh::core {

namespace detail {

// Eight-lane vectors; the arithmetic is elementwise multiply then add, which
// rounds the same at any hardware vector width.
using v8d = double __attribute__((vector_size(64)));

inline v8d load8(const double* p) {
    v8d v;
    std::memcpy(&v, p, sizeof v);
    return v;
}

inline void store8(double* p, v8d v) { std::memcpy(p, &v, sizeof v); }

inline v8d splat8(double x) { return v8d{x, x, x, x, x, x, x, x}; }

template <std::size_t MR, std::size_t NV>
inline void gemm_tile(std::size_t k, const double* a, std::size_t lda, const double* b, std::size_t ldb, double* c,
                      std::size_t ldc) {
    v8d acc[MR][NV];
    for (std::size_t r = 0; r < MR; ++r)
        for (std::size_t q = 0; q < NV; ++q) acc[r][q] = load8(c + r * ldc + 8 * q);
    for (std::size_t p = 0; p < k; ++p) {
        v8d bv[NV];
        for (std::size_t q = 0; q < NV; ++q) bv[q] = load8(b + p * ldb + 8 * q);
        for (std::size_t r = 0; r < MR; ++r) {
            const v8d av = splat8(a[r * lda + p]);
            for (std::size_t q = 0; q < NV; ++q) acc[r][q] += av * bv[q];
        }
    }
    for (std::size_t r = 0; r < MR; ++r)
        for (std::size_t q = 0; q < NV; ++q) store8(c + r * ldc + 8 * q, acc[r][q]);
}

inline void gemm_edge(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda, const double* b,
                      std::size_t ldb, double* c, std::size_t ldc) {
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = c[r * ldc + j];
            for (std::size_t p = 0; p < k; ++p) acc += a[r * lda + p] * b[p * ldb + j];
            c[r * ldc + j] = acc;
        }
}

}  // namespace detail

/// C(m×n) += A(m×k)·B(k×n), all row-major with leading dimensions. Every
/// C(i,j) is accumulated as C + A(i,0)B(0,j) + A(i,1)B(1,j) + ... in that
/// order, so the result does not depend on the blocking.
inline void gemm(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda, const double* b,
                 std::size_t ldb, double* c, std::size_t ldc) {
    constexpr std::size_t MR = 4, NV = 4, NR = 8 * NV;
    std::size_t i = 0;
    for (; i + MR <= m; i += MR) {
        std::size_t j = 0;
        for (; j + NR <= n; j += NR) detail::gemm_tile<MR, NV>(k, a + i * lda, lda, b + j, ldb, c + i * ldc + j, ldc);
        for (; j + 8 <= n; j += 8) detail::gemm_tile<MR, 1>(k, a + i * lda, lda, b + j, ldb, c + i * ldc + j, ldc);
        if (j < n) detail::gemm_edge(MR, n - j, k, a + i * lda, lda, b + j, ldb, c + i * ldc + j, ldc);
    }
    for (; i < m; ++i) {
        std::size_t j = 0;
        for (; j + NR <= n; j += NR) detail::gemm_tile<1, NV>(k, a + i * lda, lda, b + j, ldb, c + i * ldc + j, ldc);
        for (; j + 8 <= n; j += 8) detail::gemm_tile<1, 1>(k, a + i * lda, lda, b + j, ldb, c + i * ldc + j, ldc);
        if (j < n) detail::gemm_edge(1, n - j, k, a + i * lda, lda, b + j, ldb, c + i * ldc + j, ldc);
    }
}

namespace detail {

/// Dot product with eight interleaved partial sums combined in a fixed tree.
template <std::size_t MR, std::size_t NR>
inline void gemm_nt_tile(std::size_t k, const double* a, std::size_t lda, const double* b, std::size_t ldb, double* c,
                         std::size_t ldc) {
    v8d acc[MR][NR] = {};
    const std::size_t kk = k - k % 8;
    for (std::size_t p = 0; p < kk; p += 8) {
        v8d bv[NR];
        for (std::size_t q = 0; q < NR; ++q) bv[q] = load8(b + q * ldb + p);
        for (std::size_t r = 0; r < MR; ++r) {
            const v8d av = load8(a + r * lda + p);
            for (std::size_t q = 0; q < NR; ++q) acc[r][q] += av * bv[q];
        }
    }
    for (std::size_t r = 0; r < MR; ++r)
        for (std::size_t q = 0; q < NR; ++q) {
            const v8d x = acc[r][q];
            double sum = ((x[0] + x[4]) + (x[2] + x[6])) + ((x[1] + x[5]) + (x[3] + x[7]));
            for (std::size_t p = kk; p < k; ++p) sum += a[r * lda + p] * b[q * ldb + p];
            c[r * ldc + q] += sum;
        }
}

}  // namespace detail

/// C(m×n) += A(m×k)·B(n×k)ᵀ. Each entry is a fixed-order reduction, so the
/// result does not depend on the blocking.
inline void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda, const double* b,
                    std::size_t ldb, double* c, std::size_t ldc) {
    constexpr std::size_t MR = 4, NR = 4;
    std::size_t i = 0;
    for (; i + MR <= m; i += MR) {
        std::size_t j = 0;
        for (; j + NR <= n; j += NR) detail::gemm_nt_tile<MR, NR>(k, a + i * lda, lda, b + j * ldb, ldb, c + i * ldc + j, ldc);
        for (; j < n; ++j) detail::gemm_nt_tile<MR, 1>(k, a + i * lda, lda, b + j * ldb, ldb, c + i * ldc + j, ldc);
    }
    for (; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) detail::gemm_nt_tile<1, 1>(k, a + i * lda, lda, b + j * ldb, ldb, c + i * ldc + j, ldc);
}

/// out(cols×rows) = in(rows×cols)ᵀ.
inline void transpose_into(std::size_t rows, std::size_t cols, const double* in, double* out) {
    constexpr std::size_t B = 32;
    for (std::size_t r0 = 0; r0 < rows; r0 += B)
        for (std::size_t c0 = 0; c0 < cols; c0 += B)
            for (std::size_t r = r0; r < std::min(rows, r0 + B); ++r)
                for (std::size_t c = c0; c < std::min(cols, c0 + B); ++c) out[c * rows + r] = in[r * cols + c];
}

}  // namespace vfh::core
