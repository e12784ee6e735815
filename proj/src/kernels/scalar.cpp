#include "gsub/kernels.hpp"

namespace gsub::kernels {
namespace {

// Four interleaved accumulators, combined as (a0+a1)+(a2+a3). The AVX2 path
// uses the same lane assignment, which keeps the two variants numerically close.

double sum_scalar(const double* x, std::size_t n) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc[0] += x[i];
        acc[1] += x[i + 1];
        acc[2] += x[i + 2];
        acc[3] += x[i + 3];
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += x[i];
    return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + tail;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + tail;
}

double shifted_dot_scalar(const double* a, const double* b, std::size_t n, double shift) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        for (std::size_t l = 0; l < 4; ++l) acc[l] += (a[i + l] - shift) * (b[i + l] - shift);
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += (a[i] - shift) * (b[i] - shift);
    return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + tail;
}

constexpr KernelTable kScalar{"scalar", &sum_scalar, &dot_scalar, &shifted_dot_scalar};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace gsub::kernels
