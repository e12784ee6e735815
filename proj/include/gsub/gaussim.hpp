#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gsub/covlink.hpp"
#include "gsub/hermite.hpp"
#include "gsub/marginals.hpp"

namespace gsub {

struct SamplePath {
    std::vector<double> values;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::string generator_id;
    std::uint64_t fingerprint = 0;
};

/// Fractional Gaussian noise autocovariance
///   r(tau) = (|tau+1|^{2H} - 2|tau|^{2H} + |tau-1|^{2H}) / 2,  r(0) = 1,
/// continued past max_lag by the same formula.
[[nodiscard]] CovarianceSequence fgn_cov(double hurst, std::size_t max_lag);

/// Zero-mean stationary Gaussian paths of a fixed length with autocovariance r.
///
/// Uses circulant embedding on the smallest power-of-two even extension that
/// covers the path, doubling up to 2^20 until the spectrum is nonnegative.
/// If that fails, falls back to exact sampling of the first L+1 values
/// followed by conditional (order-L autoregressive) sampling, which matches r
/// exactly at lags <= L.
class GaussianSimulator {
public:
    /// Requires r.psd_status() == verified; throws PsdError otherwise.
    GaussianSimulator(const CovarianceSequence& r, std::size_t length);

    [[nodiscard]] std::size_t length() const noexcept;
    [[nodiscard]] const std::string& generator_id() const noexcept;
    [[nodiscard]] std::uint64_t fingerprint() const noexcept;

    /// Path number `stream` of the family keyed by `seed`.
    [[nodiscard]] std::vector<double> sample(std::uint64_t seed, std::uint64_t stream = 0) const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

[[nodiscard]] SamplePath simulate_gaussian(const CovarianceSequence& r, std::size_t length, std::uint64_t seed);

/// Draws path of length T for one replication; implementations are immutable.
class PathSampler {
public:
    virtual ~PathSampler() = default;
    [[nodiscard]] virtual std::vector<double> sample(std::uint64_t seed, std::uint64_t stream) const = 0;
    [[nodiscard]] virtual std::string generator_id() const = 0;
};

/// Exact autocovariance of a process at lags 0..L, plus its decay beyond L.
struct AcovProfile {
    std::vector<double> values;  // r(0..L)
    /// r(tau) ~ constant * tau^{-decay} past L; nullopt means r == 0 past L.
    std::optional<double> decay;
};

/// A weakly stationary process the Monte Carlo experiments can drive.
class StationaryProcess {
public:
    virtual ~StationaryProcess() = default;
    [[nodiscard]] virtual std::string describe() const = 0;
    [[nodiscard]] virtual double mean() const = 0;
    [[nodiscard]] virtual double acov(std::size_t lag) const = 0;
    [[nodiscard]] virtual AcovProfile acov_profile() const = 0;
    /// E[(z - mean)^4]; nullopt when infinite or unknown.
    [[nodiscard]] virtual std::optional<double> fourth_moment() const = 0;
    [[nodiscard]] virtual std::unique_ptr<PathSampler> sampler(std::size_t length) const = 0;
};

struct ModelOptions {
    std::size_t truncation = kDefaultTruncation;
    std::size_t quad_nodes = kDefaultQuadNodes;
    bool repair_psd = false;
};

/// z_t = f(X_t) with f = F^{-1}(Phi(.)) and a calibrated latent covariance.
class SubordinatedModel final : public StationaryProcess {
public:
    /// Calibrates r_X so that the model's autocorrelation at lags 0..L equals
    /// `target_acf` (target_acf[0] must be 1). Throws AttainabilityError, and
    /// PsdError when r_X fails the PSD check and no repair was requested.
    static SubordinatedModel calibrated(const MarginalDistribution& marginal, const std::vector<double>& target_acf,
                                        const ModelOptions& options = {},
                                        TailExtension latent_tail = TailExtension::zero, double hurst = 0.5);

    /// Uses `r_x` (unit variance) as the latent covariance directly.
    static SubordinatedModel from_latent(const MarginalDistribution& marginal, const CovarianceSequence& r_x,
                                         const ModelOptions& options = {});

    [[nodiscard]] const Transport& transport() const noexcept { return transport_; }
    [[nodiscard]] const HermiteExpansion& expansion() const noexcept { return expansion_; }
    [[nodiscard]] const CovarianceLink& link() const noexcept { return link_; }
    [[nodiscard]] const CovarianceSequence& r_x() const noexcept { return r_x_; }
    [[nodiscard]] const CovarianceSequence& r_z() const noexcept { return r_z_; }
    [[nodiscard]] const std::optional<CalibrationResult>& calibration() const noexcept { return calibration_; }
    [[nodiscard]] std::size_t rank() const noexcept { return rank_; }
    [[nodiscard]] std::size_t truncation() const noexcept { return truncation_; }
    [[nodiscard]] std::uint64_t fingerprint() const noexcept { return fingerprint_; }

    [[nodiscard]] std::string describe() const override;
    [[nodiscard]] double mean() const override { return transport_.mean(); }
    [[nodiscard]] double acov(std::size_t lag) const override;
    [[nodiscard]] AcovProfile acov_profile() const override;
    [[nodiscard]] std::optional<double> fourth_moment() const override;
    [[nodiscard]] std::unique_ptr<PathSampler> sampler(std::size_t length) const override;

private:
    SubordinatedModel(const MarginalDistribution& marginal, const ModelOptions& options);
    void finish();

    Transport transport_;
    HermiteExpansion expansion_;
    CovarianceLink link_;
    CovarianceSequence r_x_;
    CovarianceSequence r_z_;
    std::optional<CalibrationResult> calibration_;
    std::size_t rank_ = 1;
    std::size_t truncation_ = kDefaultTruncation;
    std::uint64_t fingerprint_ = 0;
};

[[nodiscard]] SamplePath simulate_subordinated(const SubordinatedModel& m, std::size_t length, std::uint64_t seed);

/// Causal moving average z_t = sum_j phi_j xi_{t-j} with i.i.d. innovations.
class LinearProcess final : public StationaryProcess {
public:
    /// With `center_innovations`, xi is shifted to mean zero.
    LinearProcess(std::vector<double> phi, MarginalDistribution innovation, bool center_innovations);

    [[nodiscard]] const std::vector<double>& coefficients() const noexcept { return phi_; }
    [[nodiscard]] const MarginalDistribution& innovation() const noexcept { return innovation_; }

    [[nodiscard]] std::string describe() const override;
    [[nodiscard]] double mean() const override;
    [[nodiscard]] double acov(std::size_t lag) const override;
    [[nodiscard]] AcovProfile acov_profile() const override;
    [[nodiscard]] std::optional<double> fourth_moment() const override;
    [[nodiscard]] std::unique_ptr<PathSampler> sampler(std::size_t length) const override;

private:
    std::vector<double> phi_;
    MarginalDistribution innovation_;
    bool centered_;
};

[[nodiscard]] SamplePath linear_process(const std::vector<double>& phi, const MarginalDistribution& innovation,
                                        bool center_innovations, std::size_t length, std::uint64_t seed);

/// 64-bit FNV-1a, used for model fingerprints.
[[nodiscard]] std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept;

}  // namespace gsub
