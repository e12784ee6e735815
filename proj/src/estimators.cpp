#include "gsub/estimators.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <ostream>

#include "gsub/error.hpp"
#include "gsub/kernels.hpp"
#include "gsub/mclab.hpp"

namespace gsub {
namespace {

void require_lag(std::span<const double> z, std::size_t tau) {
    if (z.empty()) throw InputError("empty series");
    if (tau >= z.size()) {
        throw DomainError("lag " + std::to_string(tau) + " must be below the series length " +
                          std::to_string(z.size()));
    }
}

constexpr std::size_t kTailLags = std::size_t{1} << 20;

// Products D^i_t = z_t z_{t+i} - shift_i for t < n - k, one row per i.
std::vector<std::vector<double>> lag_products(std::span<const double> z, std::size_t k,
                                              std::span<const double> shift) {
    const std::size_t m = z.size() - k;
    std::vector<std::vector<double>> d(k + 1, std::vector<double>(m));
    for (std::size_t i = 0; i <= k; ++i) {
        for (std::size_t t = 0; t < m; ++t) d[i][t] = z[t] * z[t + i] - shift[i];
    }
    return d;
}

// block[(tau - first) * (k+1)^2 + i*(k+1) + j] += sum_t D^i_{t+tau} D^j_t
void accumulate_cross(const std::vector<std::vector<double>>& d, std::size_t first, std::size_t count,
                      std::vector<double>& block) {
    const std::size_t dim = d.size();
    const std::size_t m = d.front().size();
    for (std::size_t s = 0; s < count; ++s) {
        const std::size_t tau = first + s;
        if (tau >= m) break;
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = 0; j < dim; ++j) {
                block[s * dim * dim + i * dim + j] +=
                    kernels::dot(std::span<const double>(d[i]).subspan(tau), std::span<const double>(d[j]));
            }
        }
    }
}

Eigen::MatrixXd block_matrix(const std::vector<double>& block, std::size_t s, std::size_t dim, double denom) {
    Eigen::MatrixXd g(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = block[s * dim * dim + i * dim + j] / denom;
    return g;
}

}  // namespace

double mean_est(std::span<const double> z) {
    if (z.empty()) throw InputError("mean of an empty series");
    return kernels::sum(z) / static_cast<double>(z.size());
}

double acov_hat(std::span<const double> z, std::size_t tau) {
    require_lag(z, tau);
    const double m = mean_est(z);
    return kernels::centered_lagged_dot(z, tau, m) / static_cast<double>(z.size());
}

double acov_tilde(std::span<const double> z, std::size_t tau) {
    require_lag(z, tau);
    const double m = mean_est(z);
    return kernels::centered_lagged_dot(z, tau, m) / static_cast<double>(z.size() - tau);
}

double acov_bar(std::span<const double> z, std::size_t tau) {
    require_lag(z, tau);
    return kernels::lagged_dot(z, tau) / static_cast<double>(z.size());
}

DecompositionTerms lemma_decomposition(std::span<const double> z, std::size_t tau) {
    require_lag(z, tau);
    const double n = static_cast<double>(z.size());
    DecompositionTerms out;
    out.tau = tau;
    const double m = mean_est(z);
    out.acov_bar = acov_bar(z, tau);
    out.mean_sq = m * m;
    if (tau > 0) {
        const double head = kernels::sum(z.first(tau));
        const double tail = kernels::sum(z.last(tau));
        out.remainder = m / n * tail + m / n * head - static_cast<double>(tau) / n * m * m;
    }
    out.reconstructed = out.acov_bar - out.mean_sq + out.remainder;
    out.acov_hat = acov_hat(z, tau);
    return out;
}

double longrun_variance_analytic(const StationaryProcess& process) {
    const AcovProfile p = process.acov_profile();
    if (p.decay && *p.decay <= 1.0) {
        throw DivergingSumError("long-run variance diverges: autocovariance decays like tau^-" +
                                std::to_string(*p.decay) +
                                " (long memory); the sample mean needs a T^{2H-1} normalization, use the long-memory scan");
    }
    double s = 0.0;
    for (std::size_t k = p.values.size() - 1; k >= 1; --k) s += p.values[k];
    if (p.decay) {
        double last = 0.0;
        // reverse order keeps the small tail terms from being swamped
        std::vector<double> tail;
        tail.reserve(kTailLags - p.values.size() + 1);
        for (std::size_t k = p.values.size(); k <= kTailLags; ++k) tail.push_back(process.acov(k));
        if (!tail.empty()) last = tail.back();
        double ts = 0.0;
        for (auto it = tail.rbegin(); it != tail.rend(); ++it) ts += *it;
        const double n = static_cast<double>(kTailLags);
        s += ts + last * n / (*p.decay - 1.0);
    }
    return p.values[0] + 2.0 * s;
}

std::size_t default_bandwidth(std::size_t T) noexcept {
    auto b = static_cast<std::size_t>(std::floor(std::cbrt(static_cast<double>(T)) + 1e-9));
    return std::max<std::size_t>(b, 1);
}

PluginVariance longrun_variance_plugin(std::span<const double> z, std::size_t bandwidth) {
    if (z.empty()) throw InputError("long-run variance of an empty series");
    PluginVariance out;
    out.bandwidth = bandwidth == 0 ? default_bandwidth(z.size()) : bandwidth;
    const double m = mean_est(z);
    const double n = static_cast<double>(z.size());
    double s = kernels::centered_lagged_dot(z, 0, m) / n;
    const std::size_t b = std::min(out.bandwidth, z.size() - 1);
    for (std::size_t tau = 1; tau <= b; ++tau) {
        const double w = 1.0 - static_cast<double>(tau) / static_cast<double>(out.bandwidth + 1);
        s += 2.0 * w * kernels::centered_lagged_dot(z, tau, m) / n;
    }
    out.sigma2 = s;
    out.negative = s < 0.0;
    return out;
}

double clip_to_psd(Eigen::MatrixXd& m) {
    m = 0.5 * (m + m.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    Eigen::VectorXd ev = es.eigenvalues();
    double clipped = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] < 0.0) {
            clipped += -ev[i];
            ev[i] = 0.0;
        }
    }
    if (clipped > 0.0) m = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    return clipped;
}

SigmaMatrix sigma_matrix_oracle(const StationaryProcess& process, std::size_t k, const OracleOptions& options) {
    if (!process.fourth_moment()) {
        throw RefusalError("Sigma matrix needs a finite fourth moment; " + process.describe() + " has none");
    }
    const AcovProfile profile = process.acov_profile();
    if (profile.decay && *profile.decay <= 1.0) {
        throw RefusalError("Sigma matrix needs summable autocovariances; " + process.describe() + " has long memory");
    }
    if (options.paths == 0 || options.path_length <= 4 * (k + 1)) {
        throw DomainError("sigma_matrix_oracle: paths too few or too short");
    }
    const std::size_t dim = k + 1;
    const double mu = process.mean();
    std::vector<double> shift(dim);
    for (std::size_t i = 0; i < dim; ++i) shift[i] = process.acov(i);

    const auto sampler = process.sampler(options.path_length);
    std::vector<std::vector<double>> paths(options.paths);
    parallel_for(options.paths, [&](std::size_t p) {
        auto z = sampler->sample(options.seed, p);
        for (double& v : z) v -= mu;
        paths[p] = std::move(z);
    });

    const std::size_t m = options.path_length - k;
    const std::size_t max_tau = std::min(options.max_tau, m / 4);
    const std::size_t patience = std::max<std::size_t>(k, 1);
    constexpr std::size_t kBlock = 8;

    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    double lead = 0.0;
    std::size_t quiet = 0;
    std::size_t tau_cut = 0;
    bool done = false;
    for (std::size_t first = 0; first <= max_tau && !done; first += kBlock) {
        const std::size_t count = std::min(kBlock, max_tau + 1 - first);
        std::vector<std::vector<double>> partial(options.paths, std::vector<double>(count * dim * dim, 0.0));
        parallel_for(options.paths, [&](std::size_t p) {
            const auto d = lag_products(paths[p], k, shift);
            accumulate_cross(d, first, count, partial[p]);
        });
        std::vector<double> block(count * dim * dim, 0.0);
        for (const auto& part : partial)
            for (std::size_t i = 0; i < block.size(); ++i) block[i] += part[i];

        for (std::size_t s = 0; s < count; ++s) {
            const std::size_t tau = first + s;
            const double denom = static_cast<double>(options.paths) * static_cast<double>(m - tau);
            const Eigen::MatrixXd g = block_matrix(block, s, dim, denom);
            if (tau == 0) {
                sigma += g;
                lead = g.cwiseAbs().maxCoeff();
                continue;
            }
            sigma += g + g.transpose();
            tau_cut = tau;
            if (g.cwiseAbs().maxCoeff() < 1e-3 * lead) {
                if (++quiet >= patience) {
                    done = true;
                    break;
                }
            } else {
                quiet = 0;
            }
        }
    }

    SigmaMatrix out;
    out.clip_magnitude = clip_to_psd(sigma);
    out.matrix = std::move(sigma);
    out.tau_cut = tau_cut;
    out.mode = "mc_oracle";
    return out;
}

SigmaMatrix sigma_matrix_plugin(std::span<const double> z, std::size_t k, std::size_t bandwidth) {
    if (z.size() < 2 * (k + 1)) throw InputError("series too short for the Sigma matrix at " + std::to_string(k) + " lags");
    const std::size_t dim = k + 1;
    const std::size_t b = bandwidth == 0 ? default_bandwidth(z.size()) : bandwidth;
    const double mu = mean_est(z);
    std::vector<double> c(z.begin(), z.end());
    for (double& v : c) v -= mu;
    std::vector<double> zero(dim, 0.0);
    auto d = lag_products(c, k, zero);
    const std::size_t m = d.front().size();
    for (auto& row : d) {
        const double mean = kernels::sum(row) / static_cast<double>(m);
        for (double& v : row) v -= mean;
    }
    const std::size_t last = std::min(b, m - 1);
    std::vector<double> block((last + 1) * dim * dim, 0.0);
    accumulate_cross(d, 0, last + 1, block);

    Eigen::MatrixXd sigma = block_matrix(block, 0, dim, static_cast<double>(m));
    for (std::size_t tau = 1; tau <= last; ++tau) {
        const double w = 1.0 - static_cast<double>(tau) / static_cast<double>(b + 1);
        const Eigen::MatrixXd g = block_matrix(block, tau, dim, static_cast<double>(m));
        sigma += w * (g + g.transpose());
    }
    SigmaMatrix out;
    out.clip_magnitude = clip_to_psd(sigma);
    out.matrix = std::move(sigma);
    out.tau_cut = last;
    out.mode = "plugin";
    return out;
}

SigmaMatrix gaussian_sigma_matrix(const std::function<double(std::size_t)>& r, std::size_t k, std::size_t max_tau) {
    const std::size_t dim = k + 1;
    auto rr = [&](long long lag) { return r(static_cast<std::size_t>(lag < 0 ? -lag : lag)); };
    Eigen::MatrixXd sigma(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    const auto top = static_cast<long long>(max_tau);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            const auto a = static_cast<long long>(i);
            const auto b = static_cast<long long>(j);
            double s = 0.0;
            for (long long t = -top; t <= top; ++t) s += rr(t) * rr(t + a - b) + rr(t - b) * rr(t + a);
            sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s;
        }
    }
    SigmaMatrix out;
    out.clip_magnitude = clip_to_psd(sigma);
    out.matrix = std::move(sigma);
    out.tau_cut = max_tau;
    out.mode = "gaussian";
    return out;
}

double gaussian_acov_variance(const std::function<double(std::size_t)>& r, std::size_t T, std::size_t tau) {
    if (tau >= T) throw DomainError("gaussian_acov_variance: lag must be below T");
    const auto n = static_cast<long long>(T - tau);
    const auto lag = static_cast<long long>(tau);
    auto rr = [&](long long d) { return r(static_cast<std::size_t>(d < 0 ? -d : d)); };
    double s = 0.0;
    for (long long d = -(n - 1); d < n; ++d) {
        const double w = static_cast<double>(n - (d < 0 ? -d : d));
        s += w * (rr(d) * rr(d) + rr(d + lag) * rr(d - lag));
    }
    return s / static_cast<double>(T);
}

EstimatorReport estimate(std::span<const double> z, std::size_t k, std::size_t bandwidth, bool with_sigma_matrix) {
    if (z.empty()) throw InputError("cannot estimate from an empty series");
    EstimatorReport rep;
    rep.T = z.size();
    std::size_t lags = k;
    if (k >= z.size()) {
        lags = z.size() - 1;
        rep.warnings.push_back("lags " + std::to_string(z.size()) + ".." + std::to_string(k) +
                               " are >= T and were skipped");
    }
    rep.mean = mean_est(z);
    for (std::size_t tau = 0; tau <= lags; ++tau) {
        rep.acov_hat.push_back(acov_hat(z, tau));
        rep.acov_tilde.push_back(acov_tilde(z, tau));
        rep.acov_bar.push_back(acov_bar(z, tau));
        rep.decomposition.push_back(lemma_decomposition(z, tau));
    }
    rep.longrun = longrun_variance_plugin(z, bandwidth);
    if (rep.longrun.negative) rep.warnings.push_back("plugin long-run variance is negative; reduce the bandwidth");
    if (with_sigma_matrix) {
        if (z.size() >= 2 * (lags + 1)) {
            rep.sigma = sigma_matrix_plugin(z, lags, bandwidth);
        } else {
            rep.warnings.push_back("series too short for the Sigma matrix");
        }
    }
    return rep;
}

void write_report_csv(std::ostream& out, const EstimatorReport& r) {
    const auto old = out.precision(17);
    out << "[MEAN]\nT,mean\n" << r.T << ',' << r.mean << '\n';
    auto series = [&](const char* name, const std::vector<double>& v) {
        out << '\n' << '[' << name << "]\ntau,value\n";
        for (std::size_t t = 0; t < v.size(); ++t) out << t << ',' << v[t] << '\n';
    };
    series("ACOV_HAT", r.acov_hat);
    series("ACOV_TILDE", r.acov_tilde);
    series("ACOV_BAR", r.acov_bar);
    out << "\n[DECOMPOSITION]\ntau,acov_bar,mean_sq,R_T,reconstructed,acov_hat\n";
    for (const auto& l : r.decomposition) {
        out << l.tau << ',' << l.acov_bar << ',' << l.mean_sq << ',' << l.remainder << ',' << l.reconstructed << ','
            << l.acov_hat << '\n';
    }
    out << "\n[SIGMA2]\nmode,bandwidth,sigma2\nplugin," << r.longrun.bandwidth << ',' << r.longrun.sigma2 << '\n';
    if (r.sigma) {
        out << "\n[SIGMA_MATRIX]\n";
        out << "# mode=" << r.sigma->mode << " bandwidth=" << r.sigma->tau_cut
            << " clip_magnitude=" << r.sigma->clip_magnitude << '\n';
        const auto& m = r.sigma->matrix;
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
            out << '\n';
        }
    }
    out.precision(old);
}

}  // namespace gsub
