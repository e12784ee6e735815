#include "gsub/mclab.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <cstdlib>
#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "gsub/error.hpp"
#include "gsub/kernels.hpp"
#include "gsub/normal.hpp"
#include "gsub/rng.hpp"

namespace gsub {
namespace {

// Seed tags, so each experiment draws from its own family of streams.
enum : std::uint64_t {
    kTagMean = 1,
    kTagAcov = 2,
    kTagOracle = 3,
    kTagScan = 4,
    kTagPrerun = 11,
    kTagSurrogatePath = 12,
    kTagLinearMean = 13,
    kTagSurrogateMean = 14,
    kTagLinearOracle = 15,
};

double sample_variance(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = kernels::sum(v) / static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

void finish_summary(MonteCarloSummary& s, const std::function<double(double)>& cdf, double alpha) {
    s.ks_distance = ks_statistic(s.standardized_values, cdf);
    s.critical_value = kolmogorov_critical_value(alpha, s.standardized_values.size());
    s.pass = s.ks_distance < s.critical_value;
}

double std_normal_cdf(double x) { return normal::cdf(x); }

}  // namespace

std::size_t worker_count() {
    if (const char* env = std::getenv("GS_THREADS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw InputError("KS statistic of an empty sample");
    std::vector<double> s(sample.begin(), sample.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = cdf(s[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double kolmogorov_critical_value(double alpha, std::size_t n) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
    if (n == 0) throw DomainError("critical value for zero samples");
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

double chi_square_cdf(double x, double dof) {
    if (x <= 0.0) return 0.0;
    return boost::math::gamma_p(0.5 * dof, 0.5 * x);
}

MonteCarloSummary mean_clt_experiment(const StationaryProcess& process, std::size_t T, std::size_t R,
                                      std::uint64_t seed, double alpha) {
    if (T == 0 || R < 2) throw DomainError("mean CLT experiment needs T >= 1 and R >= 2");
    double sigma2 = 0.0;
    try {
        sigma2 = longrun_variance_analytic(process);
    } catch (const DivergingSumError& e) {
        throw RefusalError(std::string("mean CLT refused: ") + e.what());
    }
    const double r0 = process.acov(0);
    if (!(sigma2 > 1e-12 * std::max(1.0, std::fabs(r0)))) {
        throw RefusalError("mean CLT refused: long-run variance " + std::to_string(sigma2) +
                           " is not positive (degenerate model)");
    }
    const double mu = process.mean();
    const auto sampler = process.sampler(T);
    const std::uint64_t s = derive_seed(seed, kTagMean);
    const double root_t = std::sqrt(static_cast<double>(T));

    std::vector<double> raw(R);
    parallel_for(R, [&](std::size_t r) {
        const auto z = sampler->sample(s, r);
        raw[r] = root_t * (mean_est(z) - mu);
    });

    MonteCarloSummary out;
    out.replications = R;
    out.T = T;
    out.statistic_name = "mean";
    out.seed_root = seed;
    out.reference_variance = sigma2;
    out.empirical_variance = sample_variance(raw);
    const double sigma = std::sqrt(sigma2);
    out.standardized_values.resize(R);
    for (std::size_t r = 0; r < R; ++r) out.standardized_values[r] = raw[r] / sigma;
    finish_summary(out, std_normal_cdf, alpha);
    return out;
}

AcovCltResult acov_clt_experiment(const StationaryProcess& process, std::size_t T, std::size_t R, std::size_t k,
                                  std::uint64_t seed, double alpha, const OracleOptions& oracle) {
    if (T <= 2 * (k + 1) || R < 2) throw DomainError("acov CLT experiment needs T > 2(k+1) and R >= 2");
    OracleOptions opts = oracle;
    opts.seed = derive_seed(seed, kTagOracle);

    AcovCltResult res;
    res.sigma = sigma_matrix_oracle(process, k, opts);
    const std::size_t dim = k + 1;
    const Eigen::MatrixXd& sig = res.sigma.matrix;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sig);
    if (!(es.eigenvalues().minCoeff() > 1e-10 * sig.trace())) {
        throw RefusalError("Sigma matrix is singular after clipping; the joint test is undefined");
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(sig);

    std::vector<double> target(dim);
    for (std::size_t i = 0; i < dim; ++i) target[i] = process.acov(i);
    const auto sampler = process.sampler(T);
    const std::uint64_t s = derive_seed(seed, kTagAcov);
    const double root_t = std::sqrt(static_cast<double>(T));

    // per replication: dim raw values, dim r_bar - m^2 variants, one Mahalanobis value
    std::vector<double> raw(R * dim), alt(R * dim), maha(R);
    parallel_for(R, [&](std::size_t r) {
        const auto z = sampler->sample(s, r);
        const double m = mean_est(z);
        Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
        for (std::size_t i = 0; i < dim; ++i) {
            const double hat = acov_hat(z, i);
            const double bar = acov_bar(z, i);
            raw[r * dim + i] = root_t * (hat - target[i]);
            alt[r * dim + i] = root_t * (bar - m * m - target[i]);
            v[static_cast<Eigen::Index>(i)] = raw[r * dim + i];
        }
        maha[r] = v.dot(llt.solve(v));
    });

    res.decomposition_max_diff.assign(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
        MonteCarloSummary sum;
        sum.replications = R;
        sum.T = T;
        sum.statistic_name = "acov_lag_" + std::to_string(i);
        sum.seed_root = seed;
        const double var = sig(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
        sum.reference_variance = var;
        std::vector<double> col(R);
        for (std::size_t r = 0; r < R; ++r) col[r] = raw[r * dim + i];
        sum.empirical_variance = sample_variance(col);
        const double sd = std::sqrt(var);
        sum.standardized_values.resize(R);
        for (std::size_t r = 0; r < R; ++r) {
            sum.standardized_values[r] = col[r] / sd;
            res.decomposition_max_diff[i] = std::max(res.decomposition_max_diff[i], std::fabs(col[r] - alt[r * dim + i]) / sd);
        }
        finish_summary(sum, std_normal_cdf, alpha);
        res.per_lag.push_back(std::move(sum));
    }

    res.joint.replications = R;
    res.joint.T = T;
    res.joint.statistic_name = "mahalanobis";
    res.joint.seed_root = seed;
    res.joint.reference_variance = 2.0 * static_cast<double>(dim);
    res.joint.empirical_variance = sample_variance(maha);
    res.joint.standardized_values = std::move(maha);
    const double dof = static_cast<double>(dim);
    finish_summary(res.joint, [dof](double x) { return chi_square_cdf(x, dof); }, alpha);
    return res;
}

LongMemoryScan long_memory_scan(double hurst, const std::vector<std::size_t>& T_grid, std::size_t R,
                                std::uint64_t seed, const std::vector<std::size_t>& lags, double alpha) {
    if (!(hurst >= 0.5 && hurst < 0.75)) throw DomainError("long-memory scan needs H in [0.5, 0.75)");
    if (T_grid.size() < 2 || R < 2) throw DomainError("long-memory scan needs at least two T values and R >= 2");
    for (std::size_t lag : lags) {
        for (std::size_t T : T_grid) {
            if (lag >= T) throw DomainError("scan lag must be below every T");
        }
    }
    const SubordinatedModel model = SubordinatedModel::from_latent(MarginalDistribution::normal(), fgn_cov(hurst, 16));

    LongMemoryScan out;
    out.hurst = hurst;
    out.T_grid = T_grid;
    out.target_slope = 2.0 * hurst - 1.0;
    const std::size_t T_top = *std::max_element(T_grid.begin(), T_grid.end());
    const std::uint64_t s = derive_seed(seed, kTagScan);
    auto acov = [&model](std::size_t lag) { return model.acov(lag); };

    std::vector<std::vector<double>> lag_raw(lags.size(), std::vector<double>(R));
    for (std::size_t g = 0; g < T_grid.size(); ++g) {
        const std::size_t T = T_grid[g];
        const auto sampler = model.sampler(T);
        const double root_t = std::sqrt(static_cast<double>(T));
        const bool top = T == T_top;
        std::vector<double> v(R);
        parallel_for(R, [&](std::size_t r) {
            // the grid index is part of the stream so each T gets fresh paths
            const auto z = sampler->sample(s, g * R + r);
            v[r] = root_t * mean_est(z);
            if (top) {
                for (std::size_t l = 0; l < lags.size(); ++l) {
                    lag_raw[l][r] = root_t * (acov_bar(z, lags[l]) - acov(lags[l]));
                }
            }
        });
        double ss = 0.0;
        for (double x : v) ss += x * x;
        out.variances.push_back(ss / static_cast<double>(R));
    }

    const std::size_t n = T_grid.size();
    double mx = 0.0, my = 0.0;
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = std::log(static_cast<double>(T_grid[i]));
        ys[i] = std::log(out.variances[i]);
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    if (n > 2) {
        double ssr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = ys[i] - out.intercept - out.slope * xs[i];
            ssr += e * e;
        }
        out.slope_se = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
    }
    out.slope_pass = std::fabs(out.slope - out.target_slope) <= 0.1;

    bool lags_pass = true;
    for (std::size_t l = 0; l < lags.size(); ++l) {
        MonteCarloSummary sum;
        sum.replications = R;
        sum.T = T_top;
        sum.statistic_name = "acov_bar_lag_" + std::to_string(lags[l]);
        sum.seed_root = seed;
        sum.reference_variance = gaussian_acov_variance(acov, T_top, lags[l]);
        sum.empirical_variance = sample_variance(lag_raw[l]);
        const double sd = std::sqrt(sum.reference_variance);
        sum.standardized_values.resize(R);
        for (std::size_t r = 0; r < R; ++r) sum.standardized_values[r] = lag_raw[l][r] / sd;
        finish_summary(sum, std_normal_cdf, alpha);
        lags_pass = lags_pass && sum.pass;
        out.lag_tests.push_back(std::move(sum));
    }
    out.pass = out.slope_pass && lags_pass;
    return out;
}

LinearComparison linear_vs_subordinated(const LinearProcess& linear, std::size_t T, std::size_t R, std::uint64_t seed,
                                        const LinearComparisonOptions& options) {
    LinearComparison out;
    out.prerun_length = options.prerun_length;
    const auto prerun = linear.sampler(options.prerun_length)->sample(derive_seed(seed, kTagPrerun), 0);
    const MarginalDistribution marginal = MarginalDistribution::empirical(prerun);

    const std::size_t L = std::min(options.fit_lags, prerun.size() - 1);
    std::vector<double> acf(L + 1);
    const double r0 = acov_hat(prerun, 0);
    for (std::size_t tau = 0; tau <= L; ++tau) acf[tau] = acov_hat(prerun, tau) / r0;
    acf[0] = 1.0;

    ModelOptions mopts;
    mopts.repair_psd = true;
    try {
        out.surrogate = SubordinatedModel::calibrated(marginal, acf, mopts);
    } catch (const AttainabilityError& e) {
        // pull unattainable lags up to just above the floor and retry
        const double var = marginal.variance();
        for (std::size_t lag : e.lags()) {
            out.warnings.push_back("lag " + std::to_string(lag) + " target " + std::to_string(acf[lag] * var) +
                                   " is below gamma " + std::to_string(e.gamma()) + "; clamped");
            acf[lag] = e.gamma() * (1.0 - 1e-6) / var;
        }
        out.surrogate = SubordinatedModel::calibrated(marginal, acf, mopts);
    }
    const auto& cal = out.surrogate->calibration();
    if (cal) {
        for (const auto& w : cal->warnings) out.warnings.push_back(w);
        if (cal->repaired) out.warnings.push_back("latent covariance was repaired to the nearest PSD sequence");
    }

    const auto path = out.surrogate->sampler(options.check_length)->sample(derive_seed(seed, kTagSurrogatePath), 0);
    out.marginal_ks = ks_distance(path, marginal);

    OracleOptions oracle;
    oracle.seed = derive_seed(seed, kTagLinearOracle);
    const SigmaMatrix sigma = sigma_matrix_oracle(linear, options.check_lags, oracle);
    out.acf_pass = true;
    for (std::size_t tau = 0; tau <= options.check_lags; ++tau) {
        out.linear_acov.push_back(linear.acov(tau));
        out.surrogate_acov.push_back(acov_hat(path, tau));
        const auto i = static_cast<Eigen::Index>(tau);
        const double se = std::sqrt(sigma.matrix(i, i) / static_cast<double>(options.check_length));
        out.standard_errors.push_back(se);
        const double dev = std::fabs(out.surrogate_acov.back() - out.linear_acov.back());
        out.acf_max_deviation = std::max(out.acf_max_deviation, dev / se);
        if (dev > 3.0 * se) out.acf_pass = false;
    }

    out.linear_mean = mean_clt_experiment(linear, T, R, derive_seed(seed, kTagLinearMean), options.alpha);
    out.surrogate_mean = mean_clt_experiment(*out.surrogate, T, R, derive_seed(seed, kTagSurrogateMean), options.alpha);
    return out;
}

}  // namespace gsub
