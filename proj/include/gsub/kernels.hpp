#pragma once

// Data-parallel inner loops shared by the estimators and quadrature code.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The variant is picked once at startup from CPUID; GS_SIMD=scalar
// forces the reference path. Reductions use a fixed lane layout, so a given
// (input, variant) pair always produces the same bits.

#include <cstddef>
#include <span>
#include <string_view>

namespace gsub::kernels {

struct KernelTable {
    std::string_view name;
    double (*sum)(const double* x, std::size_t n);
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum_t (a_t - shift)(b_t - shift)
    double (*shifted_dot)(const double* a, const double* b, std::size_t n, double shift);
};

[[nodiscard]] const KernelTable& scalar_table() noexcept;

/// nullptr when the CPU (or the build) lacks AVX2+FMA.
[[nodiscard]] const KernelTable* avx2_table() noexcept;

/// Table chosen at first use; honors GS_SIMD=scalar|avx2|auto.
[[nodiscard]] const KernelTable& active() noexcept;

[[nodiscard]] inline double sum(std::span<const double> x) {
    return active().sum(x.data(), x.size());
}

[[nodiscard]] inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

/// sum_{t < n-lag} x_t x_{t+lag}
[[nodiscard]] inline double lagged_dot(std::span<const double> x, std::size_t lag) {
    if (lag >= x.size()) return 0.0;
    return active().dot(x.data(), x.data() + lag, x.size() - lag);
}

/// sum_{t < n-lag} (x_t - m)(x_{t+lag} - m)
[[nodiscard]] inline double centered_lagged_dot(std::span<const double> x, std::size_t lag,
                                                double m) {
    if (lag >= x.size()) return 0.0;
    return active().shifted_dot(x.data(), x.data() + lag, x.size() - lag, m);
}

}  // namespace gsub::kernels
