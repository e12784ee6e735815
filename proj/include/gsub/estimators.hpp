#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gsub/gaussim.hpp"

namespace gsub {

/// (1/T) sum_t z_t. InputError on an empty series.
[[nodiscard]] double mean_est(std::span<const double> z);

/// (1/T) sum_{t<T-tau} (z_t - m)(z_{t+tau} - m). DomainError for tau >= T.
[[nodiscard]] double acov_hat(std::span<const double> z, std::size_t tau);
/// Same sum divided by T - tau.
[[nodiscard]] double acov_tilde(std::span<const double> z, std::size_t tau);
/// (1/T) sum_{t<T-tau} z_t z_{t+tau}, no centering.
[[nodiscard]] double acov_bar(std::span<const double> z, std::size_t tau);

/// acov_hat = acov_bar - mean^2 + remainder, exactly, with
///   remainder = (m/T) sum_{last tau} z + (m/T) sum_{first tau} z - (tau/T) m^2.
struct DecompositionTerms {
    std::size_t tau = 0;
    double acov_bar = 0.0;
    double mean_sq = 0.0;
    double remainder = 0.0;
    double reconstructed = 0.0;  // acov_bar - mean_sq + remainder
    double acov_hat = 0.0;       // direct evaluation, for comparison
};

[[nodiscard]] DecompositionTerms lemma_decomposition(std::span<const double> z, std::size_t tau);

/// sigma^2 = r(0) + 2 sum_{tau>=1} r(tau) from the process's exact
/// autocovariance. Throws DivergingSumError when r decays like tau^{-d}, d <= 1.
[[nodiscard]] double longrun_variance_analytic(const StationaryProcess& process);

struct PluginVariance {
    double sigma2 = 0.0;
    std::size_t bandwidth = 0;
    bool negative = false;  // estimate below zero: the window is too wide or T too short
};

/// floor(T^{1/3}); at least 1.
[[nodiscard]] std::size_t default_bandwidth(std::size_t T) noexcept;

/// Bartlett-weighted r_hat(0) + 2 sum_{tau<=b} (1 - tau/(b+1)) r_hat(tau).
/// bandwidth 0 selects default_bandwidth(T).
[[nodiscard]] PluginVariance longrun_variance_plugin(std::span<const double> z, std::size_t bandwidth = 0);

/// Covariance matrix of the limiting law of sqrt(T)(r_hat(0..k) - r(0..k)).
struct SigmaMatrix {
    Eigen::MatrixXd matrix;       // symmetric, PSD after clipping
    double clip_magnitude = 0.0;  // sum of |negative eigenvalues| removed
    std::size_t tau_cut = 0;      // last lag included in the tau sum
    std::string mode;
};

struct OracleOptions {
    std::size_t paths = 32;
    std::size_t path_length = std::size_t{1} << 16;
    std::size_t max_tau = 4096;
    std::uint64_t seed = 0x5167a11ce5eedULL;
};

/// Sigma from long simulated paths of the process: the covariances
/// Cov(Y^i_tau, Y^j_0) of the products Y^i_t = (z_t - mu)(z_{t+i} - mu) are
/// pooled over independent paths, and the tau sum stops after max(k,1)
/// consecutive lags whose entries all fall below 1e-3 of the largest entry at
/// tau = 0. RefusalError without a finite fourth moment or for long memory.
[[nodiscard]] SigmaMatrix sigma_matrix_oracle(const StationaryProcess& process, std::size_t k,
                                              const OracleOptions& options = {});

/// Sigma from one observed path with Bartlett weights (bandwidth 0 = default).
[[nodiscard]] SigmaMatrix sigma_matrix_plugin(std::span<const double> z, std::size_t k, std::size_t bandwidth = 0);

/// Sigma of a zero-mean Gaussian process with autocovariance r, from the
/// fourth-moment identity Cov(X_a X_b, X_c X_d) = r(a-c) r(b-d) + r(a-d) r(b-c).
/// The tau sum runs to `max_tau`.
[[nodiscard]] SigmaMatrix gaussian_sigma_matrix(const std::function<double(std::size_t)>& r, std::size_t k,
                                                std::size_t max_tau);

/// Exact Var(sqrt(T) r_bar(tau)) for a zero-mean Gaussian series of length T.
[[nodiscard]] double gaussian_acov_variance(const std::function<double(std::size_t)>& r, std::size_t T,
                                            std::size_t tau);

/// Symmetrizes and clips eigenvalues at zero; returns the clip magnitude.
double clip_to_psd(Eigen::MatrixXd& m);

struct EstimatorReport {
    std::size_t T = 0;
    double mean = 0.0;
    std::vector<double> acov_hat;
    std::vector<double> acov_tilde;
    std::vector<double> acov_bar;
    std::vector<DecompositionTerms> decomposition;
    PluginVariance longrun;
    std::optional<SigmaMatrix> sigma;
    std::vector<std::string> warnings;
};

/// All estimators at lags 0..k. Lags >= T are dropped with a warning.
[[nodiscard]] EstimatorReport estimate(std::span<const double> z, std::size_t k, std::size_t bandwidth = 0,
                                       bool with_sigma_matrix = true);

/// CSV blocks: MEAN, ACOV_HAT, ACOV_TILDE, ACOV_BAR, DECOMPOSITION, SIGMA2, SIGMA_MATRIX.
void write_report_csv(std::ostream& out, const EstimatorReport& report);

}  // namespace gsub
