#pragma once

// Thin RAII layer over FFTW. Plans are built with FFTW_ESTIMATE |
// FFTW_UNALIGNED so results do not depend on buffer alignment or timing, and
// planner calls are serialized (the FFTW planner is not thread-safe).

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace gsub::detail {

class ComplexFft {
public:
    explicit ComplexFft(std::size_t n);
    ~ComplexFft();
    ComplexFft(const ComplexFft&) = delete;
    ComplexFft& operator=(const ComplexFft&) = delete;

    [[nodiscard]] std::size_t size() const noexcept { return n_; }

    /// Unnormalized forward transform, in place.
    void forward(std::span<std::complex<double>> data) const;

private:
    std::size_t n_;
    void* plan_;
};

/// Eigenvalues of the circulant matrix whose first row is `row` (assumed
/// symmetric: row[j] == row[n-j]); i.e. the real part of its DFT.
[[nodiscard]] std::vector<double> circulant_eigenvalues(std::span<const double> row);

/// Inverse of circulant_eigenvalues: the first row with the given spectrum.
[[nodiscard]] std::vector<double> circulant_row(std::span<const double> eigenvalues);

}  // namespace gsub::detail
