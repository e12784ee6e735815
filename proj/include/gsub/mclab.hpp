#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "gsub/estimators.hpp"
#include "gsub/gaussim.hpp"

namespace gsub {

/// Worker threads: GS_THREADS if set (>= 1), otherwise the hardware count.
[[nodiscard]] std::size_t worker_count();

/// Runs fn(0..n-1) on worker_count() threads. fn must write only to its own
/// slot, so results do not depend on the schedule. The first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::min(worker_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

/// sup_x |F_n(x) - cdf(x)|.
[[nodiscard]] double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);

/// c(alpha)/sqrt(n) with c(alpha) = sqrt(-ln(alpha/2)/2), the asymptotic
/// Kolmogorov critical value (1.628/sqrt(n) at alpha = 0.01).
[[nodiscard]] double kolmogorov_critical_value(double alpha, std::size_t n);

/// CDF of the chi-square law with `dof` degrees of freedom.
[[nodiscard]] double chi_square_cdf(double x, double dof);

struct MonteCarloSummary {
    std::size_t replications = 0;
    std::size_t T = 0;
    std::string statistic_name;
    std::vector<double> standardized_values;
    double empirical_variance = 0.0;  // of the unstandardized statistic
    double reference_variance = 0.0;  // the variance used to standardize
    double ks_distance = 0.0;
    double critical_value = 0.0;
    bool pass = false;
    std::uint64_t seed_root = 0;
};

/// sqrt(T)(m - mu)/sigma per replication, sigma^2 from the analytic long-run
/// variance. RefusalError for long memory or sigma^2 <= 0.
[[nodiscard]] MonteCarloSummary mean_clt_experiment(const StationaryProcess& process, std::size_t T, std::size_t R,
                                                    std::uint64_t seed, double alpha = 0.01);

struct AcovCltResult {
    std::vector<MonteCarloSummary> per_lag;  // sqrt(T)(r_hat(tau) - r(tau)) / sqrt(Sigma_tautau)
    MonteCarloSummary joint;                 // Mahalanobis values, KS against chi-square(k+1)
    SigmaMatrix sigma;
    /// max over replications of |standardized r_hat - standardized (r_bar - m^2)|, per lag
    std::vector<double> decomposition_max_diff;
};

/// RefusalError without a fourth moment, for long memory, or when Sigma is singular.
[[nodiscard]] AcovCltResult acov_clt_experiment(const StationaryProcess& process, std::size_t T, std::size_t R,
                                                std::size_t k, std::uint64_t seed, double alpha = 0.01,
                                                const OracleOptions& oracle = {});

struct LongMemoryScan {
    double hurst = 0.5;
    std::vector<std::size_t> T_grid;
    std::vector<double> variances;  // Var(sqrt(T) m) per T
    double slope = 0.0;
    double slope_se = 0.0;
    double intercept = 0.0;
    double target_slope = 0.0;  // 2H - 1
    bool slope_pass = false;    // |slope - target| <= 0.1
    /// sqrt(T)(r_bar(tau) - r(tau)) standardized by its exact Gaussian variance at the largest T.
    std::vector<MonteCarloSummary> lag_tests;
    bool pass = false;
};

/// Identity transport on fractional Gaussian noise. H must lie in [0.5, 0.75).
[[nodiscard]] LongMemoryScan long_memory_scan(double hurst, const std::vector<std::size_t>& T_grid, std::size_t R,
                                              std::uint64_t seed, const std::vector<std::size_t>& lags = {1},
                                              double alpha = 0.01);

struct LinearComparison {
    std::size_t prerun_length = 0;
    double marginal_ks = 0.0;             // surrogate path vs the pre-run empirical law
    std::vector<double> linear_acov;      // exact, lags 0..check_lags
    std::vector<double> surrogate_acov;   // sample, from a surrogate path of length check_length
    std::vector<double> standard_errors;  // sqrt(Sigma_tautau / check_length), Sigma of the linear process
    double acf_max_deviation = 0.0;  // in standard errors
    bool acf_pass = false;  // every lag within 3 standard errors
    MonteCarloSummary linear_mean;
    MonteCarloSummary surrogate_mean;
    std::vector<std::string> warnings;
    std::optional<SubordinatedModel> surrogate;
};

struct LinearComparisonOptions {
    std::size_t prerun_length = std::size_t{1} << 20;
    std::size_t fit_lags = 10;
    std::size_t check_lags = 5;
    std::size_t check_length = 100000;
    double alpha = 0.01;
};

/// Fits a subordinated surrogate (empirical marginal and sample ACF from a long
/// pre-run) to a linear process and compares the two.
[[nodiscard]] LinearComparison linear_vs_subordinated(const LinearProcess& linear, std::size_t T, std::size_t R,
                                                      std::uint64_t seed, const LinearComparisonOptions& options = {});

}  // namespace gsub
