#include "fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace gsub::detail {
namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

constexpr unsigned kFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

}  // namespace

ComplexFft::ComplexFft(std::size_t n) : n_(n), plan_(nullptr) {
    std::vector<std::complex<double>> scratch(n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, kFlags);
    if (plan_ == nullptr) throw std::runtime_error("FFTW could not create a plan");
}

ComplexFft::~ComplexFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

void ComplexFft::forward(std::span<std::complex<double>> data) const {
    if (data.size() != n_) throw std::invalid_argument("ComplexFft: size mismatch");
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(static_cast<fftw_plan>(plan_), buf, buf);
}

std::vector<double> circulant_eigenvalues(std::span<const double> row) {
    std::vector<std::complex<double>> data(row.begin(), row.end());
    ComplexFft fft(row.size());
    fft.forward(data);
    std::vector<double> out(row.size());
    for (std::size_t k = 0; k < row.size(); ++k) out[k] = data[k].real();
    return out;
}

std::vector<double> circulant_row(std::span<const double> eigenvalues) {
    // for a real symmetric spectrum the inverse DFT equals the forward DFT / n
    std::vector<double> out = circulant_eigenvalues(eigenvalues);
    const double n = static_cast<double>(eigenvalues.size());
    for (double& v : out) v /= n;
    return out;
}

}  // namespace gsub::detail
