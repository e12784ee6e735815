#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gsub/hermite.hpp"

namespace gsub {

enum class PsdStatus { unchecked, verified, failed };

[[nodiscard]] const char* to_string(PsdStatus s) noexcept;

/// How a finite sequence r(0..L) continues past lag L.
enum class TailExtension { zero, fgn };

/// Finite-lag autocovariance r(0..L) plus its PSD verdict.
class CovarianceSequence {
public:
    /// Requires r(0) > 0 and |r(tau)| <= r(0).
    explicit CovarianceSequence(std::vector<double> values, TailExtension tail = TailExtension::zero,
                                double hurst = 0.5);

    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::size_t max_lag() const noexcept { return values_.size() - 1; }
    [[nodiscard]] double operator[](std::size_t lag) const { return values_.at(lag); }
    /// r(lag) for any lag, continuing past max_lag by the tail rule.
    [[nodiscard]] double extended(std::size_t lag) const;

    [[nodiscard]] TailExtension tail() const noexcept { return tail_; }
    [[nodiscard]] double hurst() const noexcept { return hurst_; }
    [[nodiscard]] std::string tail_name() const;

    [[nodiscard]] PsdStatus psd_status() const noexcept { return status_; }
    /// Smallest Toeplitz eigenvalue found by psd_check (the failure witness).
    [[nodiscard]] double min_eigenvalue() const noexcept { return min_eigenvalue_; }
    /// Smallest eigenvalue of the even circulant extension of length 2L.
    [[nodiscard]] double circulant_min() const noexcept { return circulant_min_; }
    /// True for sequences produced by the nearest-PSD projection.
    [[nodiscard]] bool repaired() const noexcept { return repaired_; }

    [[nodiscard]] CovarianceSequence with_status(PsdStatus s, double min_eig, double circ_min) const;
    [[nodiscard]] CovarianceSequence marked_repaired() const;

private:
    std::vector<double> values_;
    TailExtension tail_;
    double hurst_;
    PsdStatus status_ = PsdStatus::unchecked;
    double min_eigenvalue_ = 0.0;
    double circulant_min_ = 0.0;
    bool repaired_ = false;
};

inline constexpr double kDefaultPsdTol = 1e-10;

/// Sets psd_status: verified iff the smallest eigenvalue of the symmetric
/// Toeplitz matrix is >= -tol * r(0). Past 1024 lags the witness is the
/// smallest Levinson prediction-error variance, which has the same sign.
[[nodiscard]] CovarianceSequence psd_check(const CovarianceSequence& r, double tol = kDefaultPsdTol);

/// Nearest PSD sequence: clip the even circulant extension's spectrum at zero,
/// transform back, rescale to the original r(0).
[[nodiscard]] CovarianceSequence repair_psd(const CovarianceSequence& r, double tol = kDefaultPsdTol);

/// g(beta) = sum_{k>=1} k! alpha_k^2 beta^k on [-1, 1].
class CovarianceLink {
public:
    explicit CovarianceLink(const HermiteExpansion& e);
    /// weights[j] is the coefficient of beta^{j+1}; all must be >= 0.
    static CovarianceLink from_weights(std::vector<double> weights, double tail_mass_bound = 0.0);

    [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }
    [[nodiscard]] double variance() const noexcept { return variance_; }  // g(1)
    [[nodiscard]] double gamma() const noexcept { return gamma_; }        // min over [-1,1]
    [[nodiscard]] double gamma_argmin() const noexcept { return gamma_at_; }
    [[nodiscard]] double tail_mass_bound() const noexcept { return tail_mass_; }
    [[nodiscard]] std::size_t truncation() const noexcept { return weights_.size(); }

    /// Smallest k with weight_k > tol * g(1).
    [[nodiscard]] std::size_t rank(double tol = kDefaultRankTol) const;

    /// Horner evaluation without the domain check.
    [[nodiscard]] double evaluate(double beta) const noexcept;

private:
    CovarianceLink() = default;
    void finalize();

    std::vector<double> weights_;
    double variance_ = 0.0;
    double gamma_ = 0.0;
    double gamma_at_ = 0.0;
    double tail_mass_ = 0.0;
};

/// g(beta); DomainError for |beta| > 1.
[[nodiscard]] double link_value(const CovarianceLink& link, double beta);

/// beta with g(beta) == target. Nonnegative targets use the unique root in
/// [0,1]; negative ones the root closest to zero. Throws AttainabilityError
/// below gamma and DomainError above g(1).
[[nodiscard]] double invert(const CovarianceLink& link, double target);

struct SandwichReport {
    std::size_t rank = 1;
    double upper_constant = 0.0;  // C = r_z(0)
    double lower_constant = 0.0;  // largest feasible c
    bool upper_holds = false;
    bool pass = false;
    std::vector<std::size_t> skipped_lags;  // r_X == r_z == 0
};

/// c |r_X|^q <= |r_z| <= C |r_X|^q lag by lag.
[[nodiscard]] SandwichReport sandwich_check(const CovarianceLink& link, const CovarianceSequence& r_x,
                                            const CovarianceSequence& r_z, std::size_t rank);

struct CalibrationOptions {
    bool repair_psd = false;
    double psd_tol = kDefaultPsdTol;
};

struct CalibrationResult {
    CovarianceSequence r_x;                   // psd_status set
    std::optional<CovarianceSequence> repaired;  // nearest PSD sequence, present whenever r_x failed
    std::vector<double> link_values;          // g(r_X(tau))
    double max_residual = 0.0;                // max |r_z - g(r_X)|
    double gamma = 0.0;
    std::size_t rank = 1;
    SandwichReport sandwich;
    double truncation_error_bound = 0.0;      // tail_mass * max|r_X|^{K+1} over lags >= 1
    std::vector<std::string> warnings;
    bool repair_allowed = false;

    /// The sequence a simulator should use: r_x if verified, else the repair
    /// when it was requested.
    [[nodiscard]] const CovarianceSequence* usable() const noexcept;
};

/// r_X(tau) = invert(g, r_z(tau)) for every lag, with r_X(0) = 1.
/// Requires r_z(0) == g(1). Unattainable lags are collected into one
/// AttainabilityError.
[[nodiscard]] CalibrationResult calibrate(const CovarianceLink& link, const CovarianceSequence& r_z,
                                          const CalibrationOptions& options = {});

/// Rows "tau,r_z,r_x,g_r_x,abs_error" followed by '#'-prefixed footer lines.
void write_calibration_csv(std::ostream& out, const CovarianceSequence& r_z, const CalibrationResult& result);

}  // namespace gsub
