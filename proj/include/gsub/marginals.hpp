#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gsub {

/// A one-dimensional law exposed through its CDF, generalized quantile and moments.
///
/// Parametric families: normal(mu, sd), exponential(rate), uniform(a, b),
/// chisq1, student_t(df). Empirical laws put mass 1/n on each sorted sample
/// point. Instances are immutable; copies share the sample buffer.
class MarginalDistribution {
public:
    enum class Kind { normal, exponential, uniform, chisq1, student_t, empirical };

    static MarginalDistribution normal(double mean = 0.0, double sd = 1.0);
    static MarginalDistribution exponential(double rate = 1.0);
    static MarginalDistribution uniform(double lo = 0.0, double hi = 1.0);
    static MarginalDistribution chisq1();
    static MarginalDistribution student_t(double df);

    /// Empirical law of `data`. Requires at least `min_n` finite values.
    static MarginalDistribution empirical(std::span<const double> data, std::size_t min_n = 30);

    /// Parses "normal", "normal(0,2)", "exponential", "exponential(2)",
    /// "uniform", "uniform(-1,1)", "chisq1", "student_t(5)".
    static MarginalDistribution parse(std::string_view spec);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] bool is_empirical() const noexcept { return kind_ == Kind::empirical; }
    /// True when the law has atoms (every empirical law does).
    [[nodiscard]] bool is_discrete() const noexcept { return is_empirical(); }

    /// Canonical spec string, e.g. "exponential(1)" or "empirical(n=1000)".
    [[nodiscard]] std::string name() const;

    [[nodiscard]] double mean() const noexcept { return mean_; }
    [[nodiscard]] double variance() const noexcept { return variance_; }
    /// E[(z - mean)^4]; nullopt when infinite or undefined.
    [[nodiscard]] std::optional<double> central_fourth_moment() const noexcept { return fourth_; }

    [[nodiscard]] double cdf(double x) const;
    /// P(z > x), evaluated without cancellation for the parametric families.
    [[nodiscard]] double sf(double x) const;

    /// inf{x : F(x) >= y} for y in (0,1).
    [[nodiscard]] double quantile(double y) const;
    /// quantile(1 - q), computed from q directly so tiny upper tails stay accurate.
    [[nodiscard]] double upper_quantile(double q) const;

    /// Sorted support points of an empirical law; empty for parametric ones.
    [[nodiscard]] std::span<const double> sorted_sample() const noexcept;

private:
    MarginalDistribution() = default;

    double t_quantile_lower(double y) const;

    Kind kind_ = Kind::normal;
    double p0_ = 0.0;
    double p1_ = 1.0;
    double mean_ = 0.0;
    double variance_ = 1.0;
    std::optional<double> fourth_;
    std::shared_ptr<const std::vector<double>> sample_;
};

/// x -> F^{-1}(Phi(x)), optionally minus the mean of F.
///
/// Always stores the uncentered map; `centered()` only changes what
/// operator() returns.
class Transport {
public:
    Transport(MarginalDistribution marginal, bool centered);

    [[nodiscard]] const MarginalDistribution& marginal() const noexcept { return marginal_; }
    [[nodiscard]] bool centered() const noexcept { return centered_; }
    [[nodiscard]] double mean() const noexcept { return marginal_.mean(); }

    [[nodiscard]] double uncentered(double x) const;
    [[nodiscard]] double operator()(double x) const {
        return centered_ ? uncentered(x) - marginal_.mean() : uncentered(x);
    }

    [[nodiscard]] Transport as_centered() const { return Transport(marginal_, true); }

private:
    MarginalDistribution marginal_;
    bool centered_;
};

[[nodiscard]] Transport build_transport(const MarginalDistribution& d, bool centered);

/// E[f(X) X] for X ~ N(0,1). Strictly positive for any non-degenerate marginal;
/// throws DegenerateError otherwise. Step-function (empirical) transports are
/// integrated exactly between jump points.
[[nodiscard]] double verify_rank_one(const Transport& t, std::size_t quad_nodes = 200);

/// Reads a single-column CSV (optional non-numeric header, blank lines ignored).
[[nodiscard]] std::vector<double> read_column_csv(const std::string& path);

/// Kolmogorov distance sup_x |F_n(x) - F(x)| between a sample and a marginal.
[[nodiscard]] double ks_distance(std::span<const double> sample, const MarginalDistribution& d);

}  // namespace gsub
