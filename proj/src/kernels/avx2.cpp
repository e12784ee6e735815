// Compiled with -mavx2 -mfma when the toolchain targets x86-64. Nothing in
// this file may run unless dispatch.cpp confirmed CPU support.

#include "gsub/kernels.hpp"

#if defined(GSUB_HAVE_AVX2)
#include <immintrin.h>

namespace gsub::kernels {
namespace {

inline double hsum(__m256d v) {
    // (l0+l1)+(l2+l3), matching the scalar combine order
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, v);
    return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double tail = 0.0;
    for (; i < n; ++i) tail += x[i];
    return hsum(acc) + tail;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return hsum(acc0) + tail;
}

double shifted_dot_avx2(const double* a, const double* b, std::size_t n, double shift) {
    const __m256d s = _mm256_set1_pd(shift);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d da = _mm256_sub_pd(_mm256_loadu_pd(a + i), s);
        const __m256d db = _mm256_sub_pd(_mm256_loadu_pd(b + i), s);
        acc = _mm256_fmadd_pd(da, db, acc);
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += (a[i] - shift) * (b[i] - shift);
    return hsum(acc) + tail;
}

constexpr KernelTable kAvx2{"avx2", &sum_avx2, &dot_avx2, &shifted_dot_avx2};

}  // namespace

const KernelTable* avx2_table_unchecked() noexcept { return &kAvx2; }

}  // namespace gsub::kernels

#else

namespace gsub::kernels {
const KernelTable* avx2_table_unchecked() noexcept { return nullptr; }
}  // namespace gsub::kernels

#endif
