#include "gsub/gaussim.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <sstream>

#include "fft.hpp"
#include "gsub/error.hpp"
#include "gsub/rng.hpp"

namespace gsub {
namespace {

constexpr std::size_t kMaxEmbedding = std::size_t{1} << 20;

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

std::uint64_t hash_sequence(const CovarianceSequence& r, std::uint64_t h) {
    h = fnv1a(r.values().data(), r.values().size() * sizeof(double), h);
    const std::string tail = r.tail_name();
    return fnv1a(tail.data(), tail.size(), h);
}

}  // namespace

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h) noexcept {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

CovarianceSequence fgn_cov(double hurst, std::size_t max_lag) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("fgn_cov: Hurst index must lie in (0,1)");
    std::vector<double> r(max_lag + 1);
    const double h2 = 2.0 * hurst;
    r[0] = 1.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        const double t = static_cast<double>(k);
        r[k] = 0.5 * (std::pow(t + 1.0, h2) - 2.0 * std::pow(t, h2) + std::pow(t - 1.0, h2));
    }
    return psd_check(CovarianceSequence(std::move(r), TailExtension::fgn, hurst));
}

// ---------------------------------------------------------------------------

struct GaussianSimulator::Impl {
    enum class Method { circulant, levinson };

    Method method = Method::circulant;
    std::size_t length = 0;
    std::string id;
    std::uint64_t fingerprint = 0;

    // circulant embedding
    std::vector<double> scale;  // sqrt(lambda_k / M)
    std::shared_ptr<detail::ComplexFft> fft;

    // window + conditional sampling
    Eigen::MatrixXd window_chol;  // lower factor of Toeplitz(r(0..L))
    std::vector<double> phi;      // phi[j-1] multiplies X_{t-j}
    double innovation_sd = 0.0;
};

GaussianSimulator::GaussianSimulator(const CovarianceSequence& r, std::size_t length) {
    if (length == 0) throw DomainError("GaussianSimulator: length must be >= 1");
    if (r.psd_status() != PsdStatus::verified) {
        throw PsdError("GaussianSimulator: covariance sequence is not verified PSD (status " +
                       std::string(to_string(r.psd_status())) + "); run psd_check or supply a repaired sequence");
    }
    auto impl = std::make_shared<Impl>();
    impl->length = length;
    impl->fingerprint = hash_sequence(r, 0xcbf29ce484222325ULL);
    const std::size_t lags = r.max_lag();

    std::size_t half = next_pow2(std::max<std::size_t>({length - 1, lags, 1}));
    bool embedded = false;
    while (2 * half <= kMaxEmbedding) {
        const std::size_t m = 2 * half;
        std::vector<double> row(m);
        for (std::size_t j = 0; j <= half; ++j) row[j] = r.extended(j);
        for (std::size_t j = 1; j < half; ++j) row[m - j] = row[j];
        auto lambda = detail::circulant_eigenvalues(row);
        const double top = *std::max_element(lambda.begin(), lambda.end());
        const double bottom = *std::min_element(lambda.begin(), lambda.end());
        if (bottom >= -1e-10 * top) {
            impl->scale.resize(m);
            for (std::size_t k = 0; k < m; ++k) {
                impl->scale[k] = std::sqrt(std::max(lambda[k], 0.0) / static_cast<double>(m));
            }
            impl->fft = std::make_shared<detail::ComplexFft>(m);
            impl->method = Impl::Method::circulant;
            impl->id = "circulant(M=" + std::to_string(m) + ",tail=" + r.tail_name() + ")";
            embedded = true;
            break;
        }
        half *= 2;
    }

    if (!embedded) {
        const auto n = static_cast<Eigen::Index>(lags + 1);
        Eigen::MatrixXd toeplitz(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) toeplitz(i, j) = r[static_cast<std::size_t>(std::abs(i - j))];
        Eigen::LLT<Eigen::MatrixXd> llt(toeplitz);
        if (llt.info() != Eigen::Success) {
            throw PsdError("GaussianSimulator: Toeplitz window is not positive definite");
        }
        impl->window_chol = llt.matrixL();

        // Durbin-Levinson for the order-L one-step predictor
        std::vector<double> phi;
        double v = r[0];
        for (std::size_t k = 1; k <= lags; ++k) {
            double acc = r[k];
            for (std::size_t j = 1; j < k; ++j) acc -= phi[j - 1] * r[k - j];
            const double kappa = acc / v;
            std::vector<double> next(k);
            for (std::size_t j = 1; j < k; ++j) next[j - 1] = phi[j - 1] - kappa * phi[k - j - 1];
            next[k - 1] = kappa;
            phi = std::move(next);
            v *= (1.0 - kappa * kappa);
            if (!(v > 0.0)) throw PsdError("GaussianSimulator: prediction variance vanished");
        }
        impl->phi = std::move(phi);
        impl->innovation_sd = std::sqrt(v);
        impl->method = Impl::Method::levinson;
        impl->id = "levinson(L=" + std::to_string(lags) + ")";
    }
    impl_ = std::move(impl);
}

std::size_t GaussianSimulator::length() const noexcept { return impl_->length; }
const std::string& GaussianSimulator::generator_id() const noexcept { return impl_->id; }
std::uint64_t GaussianSimulator::fingerprint() const noexcept { return impl_->fingerprint; }

std::vector<double> GaussianSimulator::sample(std::uint64_t seed, std::uint64_t stream) const {
    const Impl& im = *impl_;
    Philox rng(seed, stream);
    std::vector<double> out(im.length);
    if (im.method == Impl::Method::circulant) {
        const std::size_t m = im.scale.size();
        std::vector<std::complex<double>> data(m);
        for (std::size_t k = 0; k < m; ++k) {
            const double re = rng.normal();
            const double imag = rng.normal();
            data[k] = {im.scale[k] * re, im.scale[k] * imag};
        }
        im.fft->forward(data);
        for (std::size_t t = 0; t < im.length; ++t) out[t] = data[t].real();
        return out;
    }

    const auto window = static_cast<std::size_t>(im.window_chol.rows());
    Eigen::VectorXd eps(static_cast<Eigen::Index>(window));
    for (std::size_t i = 0; i < window; ++i) eps[static_cast<Eigen::Index>(i)] = rng.normal();
    const Eigen::VectorXd head = im.window_chol * eps;
    const std::size_t first = std::min(window, im.length);
    for (std::size_t t = 0; t < first; ++t) out[t] = head[static_cast<Eigen::Index>(t)];
    const std::size_t order = im.phi.size();
    for (std::size_t t = window; t < im.length; ++t) {
        double pred = 0.0;
        for (std::size_t j = 1; j <= order; ++j) pred += im.phi[j - 1] * out[t - j];
        out[t] = pred + im.innovation_sd * rng.normal();
    }
    return out;
}

SamplePath simulate_gaussian(const CovarianceSequence& r, std::size_t length, std::uint64_t seed) {
    const GaussianSimulator sim(r, length);
    SamplePath path;
    path.values = sim.sample(seed, 0);
    path.seed = seed;
    path.generator_id = sim.generator_id();
    path.fingerprint = sim.fingerprint();
    return path;
}

// ---------------------------------------------------------------------------

namespace {

class SubordinatedSampler final : public PathSampler {
public:
    SubordinatedSampler(GaussianSimulator sim, Transport transport)
        : sim_(std::move(sim)), transport_(std::move(transport)) {}

    std::vector<double> sample(std::uint64_t seed, std::uint64_t stream) const override {
        std::vector<double> x = sim_.sample(seed, stream);
        for (double& v : x) v = transport_.uncentered(v);
        return x;
    }
    std::string generator_id() const override { return sim_.generator_id(); }

private:
    GaussianSimulator sim_;
    Transport transport_;
};

std::vector<double> link_image(const CovarianceLink& link, const CovarianceSequence& r_x) {
    std::vector<double> out(r_x.values().size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = link.evaluate(r_x[k]);
    return out;
}

HermiteExpansion centered_expansion(const MarginalDistribution& marginal, const ModelOptions& options) {
    const Transport t = build_transport(marginal, true);
    return expand_transport(t, options.truncation, options.quad_nodes);
}

}  // namespace

SubordinatedModel::SubordinatedModel(const MarginalDistribution& marginal, const ModelOptions& options)
    : transport_(build_transport(marginal, false)),
      expansion_(centered_expansion(marginal, options)),
      link_(expansion_),
      r_x_(std::vector<double>{1.0}),
      r_z_(std::vector<double>{1.0}),
      truncation_(options.truncation) {}

SubordinatedModel SubordinatedModel::calibrated(const MarginalDistribution& marginal,
                                                const std::vector<double>& target_acf, const ModelOptions& options,
                                                TailExtension latent_tail, double hurst) {
    if (target_acf.empty() || std::fabs(target_acf[0] - 1.0) > 1e-12) {
        throw DomainError("calibrated model: target autocorrelation must start with 1");
    }
    SubordinatedModel m(marginal, options);
    const double var = m.link_.variance();
    std::vector<double> target(target_acf.size());
    for (std::size_t k = 0; k < target.size(); ++k) target[k] = target_acf[k] * var;
    target[0] = var;
    const CovarianceSequence r_z(std::move(target));

    CalibrationResult cal = calibrate(m.link_, r_z, {options.repair_psd, kDefaultPsdTol});
    const CovarianceSequence* use = cal.usable();
    if (use == nullptr) {
        throw PsdError("calibrated latent covariance is not positive semidefinite (min eigenvalue " +
                       std::to_string(cal.r_x.min_eigenvalue()) + "); enable PSD repair");
    }
    CovarianceSequence latent =
        CovarianceSequence(std::vector<double>(use->values().begin(), use->values().end()), latent_tail, hurst)
            .with_status(use->psd_status(), use->min_eigenvalue(), use->circulant_min());
    if (use->repaired()) latent = latent.marked_repaired();
    m.r_x_ = std::move(latent);
    m.r_z_ = CovarianceSequence(link_image(m.link_, m.r_x_));
    m.calibration_ = std::move(cal);
    m.finish();
    return m;
}

SubordinatedModel SubordinatedModel::from_latent(const MarginalDistribution& marginal, const CovarianceSequence& r_x,
                                                 const ModelOptions& options) {
    if (std::fabs(r_x[0] - 1.0) > 1e-12) throw DomainError("from_latent: latent covariance must have r(0) = 1");
    SubordinatedModel m(marginal, options);
    m.r_x_ = r_x.psd_status() == PsdStatus::unchecked ? psd_check(r_x) : r_x;
    m.r_z_ = CovarianceSequence(link_image(m.link_, m.r_x_));
    m.finish();
    return m;
}

void SubordinatedModel::finish() {
    rank_ = hermite_rank(expansion_);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const std::string name = transport_.marginal().name();
    h = fnv1a(name.data(), name.size(), h);
    h = hash_sequence(r_x_, h);
    const std::uint64_t k = truncation_;
    fingerprint_ = fnv1a(&k, sizeof k, h);
}

std::string SubordinatedModel::describe() const {
    std::ostringstream os;
    os << "subordinated(marginal=" << transport_.marginal().name() << ",L=" << r_x_.max_lag()
       << ",tail=" << r_x_.tail_name() << ",K=" << truncation_ << ",rank=" << rank_ << ")";
    return os.str();
}

double SubordinatedModel::acov(std::size_t lag) const {
    if (lag <= r_z_.max_lag()) return r_z_[lag];
    return link_.evaluate(r_x_.extended(lag));
}

AcovProfile SubordinatedModel::acov_profile() const {
    AcovProfile p;
    p.values.assign(r_z_.values().begin(), r_z_.values().end());
    if (r_x_.tail() == TailExtension::fgn && r_x_.hurst() != 0.5) {
        p.decay = static_cast<double>(rank_) * (2.0 - 2.0 * r_x_.hurst());
    }
    return p;
}

std::optional<double> SubordinatedModel::fourth_moment() const {
    return transport_.marginal().central_fourth_moment();
}

std::unique_ptr<PathSampler> SubordinatedModel::sampler(std::size_t length) const {
    return std::make_unique<SubordinatedSampler>(GaussianSimulator(r_x_, length), transport_);
}

SamplePath simulate_subordinated(const SubordinatedModel& m, std::size_t length, std::uint64_t seed) {
    const GaussianSimulator sim(m.r_x(), length);
    SamplePath path;
    path.values = sim.sample(seed, 0);
    for (double& v : path.values) v = m.transport().uncentered(v);
    path.seed = seed;
    path.generator_id = sim.generator_id();
    path.fingerprint = m.fingerprint();
    return path;
}

// ---------------------------------------------------------------------------

namespace {

class MovingAverageSampler final : public PathSampler {
public:
    MovingAverageSampler(std::vector<double> phi, MarginalDistribution innovation, double shift, std::size_t length)
        : phi_(std::move(phi)), innovation_(std::move(innovation)), shift_(shift), length_(length) {}

    std::vector<double> sample(std::uint64_t seed, std::uint64_t stream) const override {
        Philox rng(seed, stream);
        const std::size_t q = phi_.size() - 1;
        std::vector<double> xi(length_ + q);
        for (double& v : xi) v = innovation_.quantile(rng.uniform()) - shift_;
        std::vector<double> out(length_);
        for (std::size_t t = 0; t < length_; ++t) {
            double acc = 0.0;
            for (std::size_t j = 0; j <= q; ++j) acc += phi_[j] * xi[t + q - j];
            out[t] = acc;
        }
        return out;
    }
    std::string generator_id() const override {
        return "ma(" + std::to_string(phi_.size() - 1) + ")+inverse-transform";
    }

private:
    std::vector<double> phi_;
    MarginalDistribution innovation_;
    double shift_;
    std::size_t length_;
};

}  // namespace

LinearProcess::LinearProcess(std::vector<double> phi, MarginalDistribution innovation, bool center_innovations)
    : phi_(std::move(phi)), innovation_(std::move(innovation)), centered_(center_innovations) {
    if (phi_.empty()) throw DomainError("linear process: empty coefficient vector");
    for (double v : phi_) {
        if (!std::isfinite(v)) throw DomainError("linear process: non-finite coefficient");
    }
}

std::string LinearProcess::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "linear(phi=";
    for (std::size_t j = 0; j < phi_.size(); ++j) os << (j ? ";" : "") << phi_[j];
    os << ",innovation=" << innovation_.name() << (centered_ ? ",centered" : "") << ")";
    return os.str();
}

double LinearProcess::mean() const {
    if (centered_) return 0.0;
    double s = 0.0;
    for (double v : phi_) s += v;
    return s * innovation_.mean();
}

double LinearProcess::acov(std::size_t lag) const {
    if (lag >= phi_.size()) return 0.0;
    double s = 0.0;
    for (std::size_t j = 0; j + lag < phi_.size(); ++j) s += phi_[j] * phi_[j + lag];
    return s * innovation_.variance();
}

AcovProfile LinearProcess::acov_profile() const {
    AcovProfile p;
    for (std::size_t k = 0; k < phi_.size(); ++k) p.values.push_back(acov(k));
    return p;
}

std::optional<double> LinearProcess::fourth_moment() const {
    const auto m4 = innovation_.central_fourth_moment();
    if (!m4) return std::nullopt;
    const double s2 = innovation_.variance();
    double sum2 = 0.0, sum4 = 0.0;
    for (double v : phi_) {
        sum2 += v * v;
        sum4 += v * v * v * v;
    }
    return sum4 * (*m4 - 3.0 * s2 * s2) + 3.0 * (sum2 * s2) * (sum2 * s2);
}

std::unique_ptr<PathSampler> LinearProcess::sampler(std::size_t length) const {
    if (length == 0) throw DomainError("linear process: length must be >= 1");
    return std::make_unique<MovingAverageSampler>(phi_, innovation_, centered_ ? innovation_.mean() : 0.0, length);
}

SamplePath linear_process(const std::vector<double>& phi, const MarginalDistribution& innovation,
                          bool center_innovations, std::size_t length, std::uint64_t seed) {
    const LinearProcess lp(phi, innovation, center_innovations);
    const auto s = lp.sampler(length);
    SamplePath path;
    path.values = s->sample(seed, 0);
    path.seed = seed;
    path.generator_id = s->generator_id();
    const std::string d = lp.describe();
    path.fingerprint = fnv1a(d.data(), d.size());
    return path;
}

}  // namespace gsub
