#include "gsub/covlink.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "fft.hpp"
#include "gsub/error.hpp"

namespace gsub {
namespace {

double fgn_at(double hurst, double lag) {
    const double h2 = 2.0 * hurst;
    return 0.5 * (std::pow(lag + 1.0, h2) - 2.0 * std::pow(lag, h2) + std::pow(std::fabs(lag - 1.0), h2));
}

std::vector<double> even_extension(std::span<const double> r) {
    const std::size_t lags = r.size() - 1;
    if (lags == 0) return {r[0]};
    std::vector<double> row(2 * lags);
    for (std::size_t j = 0; j <= lags; ++j) row[j] = r[j];
    for (std::size_t j = 1; j < lags; ++j) row[2 * lags - j] = r[j];
    return row;
}

// Smallest Toeplitz eigenvalue for small windows. Beyond kDenseLimit lags the
// dense solve is too slow; Levinson-Durbin's smallest prediction-error
// variance is returned instead. It bounds lambda_min from above and has the
// same sign, so the PSD decision is unchanged. A variance within tol of zero
// means a singular but PSD leading block; the recursion stops there.
constexpr std::size_t kDenseLimit = 1024;

double toeplitz_min_eigenvalue(std::span<const double> r, double tol) {
    const std::size_t n = r.size();
    if (n <= kDenseLimit) {
        const auto m_n = static_cast<Eigen::Index>(n);
        Eigen::MatrixXd m(m_n, m_n);
        for (Eigen::Index i = 0; i < m_n; ++i)
            for (Eigen::Index j = 0; j < m_n; ++j) m(i, j) = r[static_cast<std::size_t>(std::abs(i - j))];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
        return solver.eigenvalues().minCoeff();
    }
    std::vector<double> phi, prev;
    double v = r[0];
    double smallest = v;
    for (std::size_t k = 1; k < n; ++k) {
        if (v <= tol * r[0]) break;
        double acc = r[k];
        for (std::size_t j = 0; j < phi.size(); ++j) acc -= phi[j] * r[k - 1 - j];
        const double kappa = acc / v;
        prev = phi;
        phi.push_back(kappa);
        for (std::size_t j = 0; j + 1 < phi.size(); ++j) phi[j] = prev[j] - kappa * prev[prev.size() - 1 - j];
        v *= (1.0 - kappa) * (1.0 + kappa);
        smallest = std::min(smallest, v);
    }
    return smallest;
}

double circulant_minimum(std::span<const double> r) {
    const auto spectrum = detail::circulant_eigenvalues(even_extension(r));
    return *std::min_element(spectrum.begin(), spectrum.end());
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

const char* to_string(PsdStatus s) noexcept {
    switch (s) {
        case PsdStatus::unchecked: return "unchecked";
        case PsdStatus::verified: return "verified";
        case PsdStatus::failed: return "failed";
    }
    return "unknown";
}

CovarianceSequence::CovarianceSequence(std::vector<double> values, TailExtension tail, double hurst)
    : values_(std::move(values)), tail_(tail), hurst_(hurst) {
    if (values_.empty()) throw DomainError("covariance sequence: empty");
    for (double v : values_) {
        if (!std::isfinite(v)) throw DomainError("covariance sequence: non-finite value");
    }
    if (!(values_[0] > 0.0)) throw DomainError("covariance sequence: r(0) must be positive");
    for (std::size_t k = 1; k < values_.size(); ++k) {
        if (std::fabs(values_[k]) > values_[0] * (1.0 + 1e-12)) {
            throw DomainError("covariance sequence: |r(" + std::to_string(k) + ")| exceeds r(0)");
        }
    }
    if (tail_ == TailExtension::fgn && !(hurst_ > 0.0 && hurst_ < 1.0)) {
        throw DomainError("covariance sequence: Hurst index must lie in (0,1)");
    }
}

double CovarianceSequence::extended(std::size_t lag) const {
    if (lag < values_.size()) return values_[lag];
    if (tail_ == TailExtension::zero) return 0.0;
    return values_[0] * fgn_at(hurst_, static_cast<double>(lag));
}

std::string CovarianceSequence::tail_name() const {
    return tail_ == TailExtension::zero ? "zero" : "fgn(" + num(hurst_) + ")";
}

CovarianceSequence CovarianceSequence::with_status(PsdStatus s, double min_eig, double circ_min) const {
    CovarianceSequence out = *this;
    out.status_ = s;
    out.min_eigenvalue_ = min_eig;
    out.circulant_min_ = circ_min;
    return out;
}

CovarianceSequence CovarianceSequence::marked_repaired() const {
    CovarianceSequence out = *this;
    out.repaired_ = true;
    return out;
}

CovarianceSequence psd_check(const CovarianceSequence& r, double tol) {
    const double min_eig = toeplitz_min_eigenvalue(r.values(), tol);
    const double circ_min = circulant_minimum(r.values());
    const PsdStatus status = min_eig >= -tol * r[0] ? PsdStatus::verified : PsdStatus::failed;
    return r.with_status(status, min_eig, circ_min);
}

CovarianceSequence repair_psd(const CovarianceSequence& r, double tol) {
    auto spectrum = detail::circulant_eigenvalues(even_extension(r.values()));
    for (double& v : spectrum) v = std::max(v, 0.0);
    const auto row = detail::circulant_row(spectrum);
    std::vector<double> values(r.values().size());
    const double scale = r[0] / row[0];
    for (std::size_t k = 0; k < values.size(); ++k) values[k] = row[k] * scale;
    values[0] = r[0];
    return psd_check(CovarianceSequence(std::move(values), r.tail(), r.hurst()), tol).marked_repaired();
}

CovarianceLink::CovarianceLink(const HermiteExpansion& e) {
    weights_.assign(e.weights.begin() + (e.weights.empty() ? 0 : 1), e.weights.end());
    tail_mass_ = e.tail_mass_bound;
    finalize();
}

CovarianceLink CovarianceLink::from_weights(std::vector<double> weights, double tail_mass_bound) {
    CovarianceLink link;
    link.weights_ = std::move(weights);
    link.tail_mass_ = tail_mass_bound;
    link.finalize();
    return link;
}

void CovarianceLink::finalize() {
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("covariance link: weights must be finite and >= 0");
    }
    variance_ = evaluate(1.0);
    if (!(variance_ > 0.0)) throw DegenerateError("covariance link: all weights vanish (constant transport)");

    // gamma = min over [-1, 0] (g >= 0 on [0, 1]): grid scan, then golden
    // section on the bracketing cell, tolerance 1e-12 in beta.
    constexpr int kGrid = 4096;
    int best = kGrid;  // index i <-> beta = -i / kGrid
    double best_val = 0.0;
    for (int i = 0; i <= kGrid; ++i) {
        const double b = -static_cast<double>(i) / kGrid;
        const double v = evaluate(b);
        if (v < best_val || i == 0) {
            best_val = v;
            best = i;
        }
    }
    double lo = -std::min(1.0, static_cast<double>(best + 1) / kGrid);
    double hi = -std::max(0.0, static_cast<double>(best - 1) / kGrid);
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - ratio * (hi - lo);
    double x2 = lo + ratio * (hi - lo);
    double f1 = evaluate(x1), f2 = evaluate(x2);
    while (hi - lo > 1e-12) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = evaluate(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = evaluate(x2);
        }
    }
    gamma_at_ = 0.5 * (lo + hi);
    gamma_ = evaluate(gamma_at_);
    if (const double v = evaluate(-1.0); v < gamma_) {
        gamma_ = v;
        gamma_at_ = -1.0;
    }
    if (gamma_ > 0.0) gamma_ = 0.0;
}

std::size_t CovarianceLink::rank(double tol) const {
    for (std::size_t j = 0; j < weights_.size(); ++j) {
        if (weights_[j] > tol * variance_) return j + 1;
    }
    throw DegenerateError("covariance link: rank undefined");
}

double CovarianceLink::evaluate(double beta) const noexcept {
    double acc = 0.0;
    for (std::size_t j = weights_.size(); j-- > 0;) acc = acc * beta + weights_[j];
    return acc * beta;
}

double link_value(const CovarianceLink& link, double beta) {
    if (!(std::fabs(beta) <= 1.0)) throw DomainError("link_value: |beta| must be <= 1");
    return link.evaluate(beta);
}

double invert(const CovarianceLink& link, double target) {
    const double top = link.variance();
    if (!std::isfinite(target)) throw DomainError("invert: non-finite target");
    if (target > top * (1.0 + 1e-12)) {
        throw DomainError("invert: target " + num(target) + " exceeds g(1) = " + num(top));
    }
    if (target >= top) return 1.0;
    if (target == 0.0) return 0.0;

    auto bisect = [&](double lo, double hi) {
        // invariant: g(lo) - target and g(hi) - target have opposite signs
        const bool rising = link.evaluate(hi) > link.evaluate(lo);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            const double v = link.evaluate(mid);
            if ((v < target) == rising) lo = mid; else hi = mid;
        }
        const double vlo = std::fabs(link.evaluate(lo) - target);
        const double vhi = std::fabs(link.evaluate(hi) - target);
        return vlo <= vhi ? lo : hi;
    };

    if (target > 0.0) return bisect(0.0, 1.0);

    if (target < link.gamma() - 1e-12 * top) {
        throw AttainabilityError("invert: target " + num(target) + " lies below gamma = " + num(link.gamma()),
                                 link.gamma(), {});
    }
    // first downward crossing from beta = 0 (smallest |beta|)
    constexpr int kGrid = 4096;
    double prev = 0.0;
    for (int i = 1; i <= kGrid; ++i) {
        const double b = -static_cast<double>(i) / kGrid;
        if (link.evaluate(b) <= target) return bisect(b, prev);
        prev = b;
    }
    return link.gamma_argmin();
}

SandwichReport sandwich_check(const CovarianceLink& link, const CovarianceSequence& r_x,
                              const CovarianceSequence& r_z, std::size_t rank) {
    (void)link;
    if (r_x.values().size() != r_z.values().size()) throw DomainError("sandwich_check: length mismatch");
    SandwichReport rep;
    rep.rank = rank;
    rep.upper_constant = r_z[0];
    rep.upper_holds = true;
    double lower = std::numeric_limits<double>::infinity();
    const double q = static_cast<double>(rank);
    for (std::size_t tau = 0; tau < r_x.values().size(); ++tau) {
        const double ax = std::fabs(r_x[tau]);
        const double az = std::fabs(r_z[tau]);
        const double bound = rep.upper_constant * std::pow(ax, q);
        if (az > bound * (1.0 + 1e-9) + 1e-12 * rep.upper_constant) rep.upper_holds = false;
        if (ax == 0.0) {
            if (az == 0.0) rep.skipped_lags.push_back(tau);
            continue;
        }
        lower = std::min(lower, az / std::pow(ax, q));
    }
    rep.lower_constant = std::isfinite(lower) ? lower : 0.0;
    rep.pass = rep.upper_holds && rep.lower_constant > 0.0;
    return rep;
}

const CovarianceSequence* CalibrationResult::usable() const noexcept {
    if (r_x.psd_status() == PsdStatus::verified) return &r_x;
    if (repair_allowed && repaired && repaired->psd_status() == PsdStatus::verified) return &*repaired;
    return nullptr;
}

CalibrationResult calibrate(const CovarianceLink& link, const CovarianceSequence& r_z,
                            const CalibrationOptions& options) {
    const double top = link.variance();
    if (std::fabs(r_z[0] - top) > 1e-8 * top) {
        throw DomainError("calibrate: r_z(0) = " + num(r_z[0]) + " must equal the link variance g(1) = " + num(top));
    }
    const std::size_t lags = r_z.max_lag();
    std::vector<double> beta(lags + 1, 0.0);
    beta[0] = 1.0;
    std::vector<std::size_t> bad;
    for (std::size_t tau = 1; tau <= lags; ++tau) {
        try {
            beta[tau] = invert(link, r_z[tau]);
        } catch (const AttainabilityError&) {
            bad.push_back(tau);
        }
    }
    if (!bad.empty()) {
        std::string list;
        for (std::size_t t : bad) list += (list.empty() ? "" : ",") + std::to_string(t);
        throw AttainabilityError("calibrate: targets below gamma = " + num(link.gamma()) + " at lags " + list,
                                 link.gamma(), bad);
    }

    CalibrationResult res{psd_check(CovarianceSequence(beta), options.psd_tol), std::nullopt, {}, 0.0, 0.0, 1, {}, 0.0, {}, options.repair_psd};
    res.gamma = link.gamma();
    res.rank = link.rank();
    res.link_values.resize(lags + 1);
    double max_beta = 0.0;
    for (std::size_t tau = 0; tau <= lags; ++tau) {
        res.link_values[tau] = link.evaluate(beta[tau]);
        res.max_residual = std::max(res.max_residual, std::fabs(res.link_values[tau] - r_z[tau]));
        if (tau > 0) max_beta = std::max(max_beta, std::fabs(beta[tau]));
    }
    res.truncation_error_bound =
        link.tail_mass_bound() * std::pow(max_beta, static_cast<double>(link.truncation() + 1));
    res.sandwich = sandwich_check(link, res.r_x, r_z, res.rank);

    for (std::size_t tau = 1; tau <= lags; ++tau) {
        if (r_z[tau] == 0.0) res.warnings.push_back("lag " + std::to_string(tau) +
                                                     ": r_z = 0 forces independence under the model");
    }
    if (res.rank % 2 == 0) {
        for (std::size_t tau = 1; tau <= lags; ++tau) {
            if (r_z[tau] < 0.0 && r_z[tau] > -1e-3 * top) {
                res.warnings.push_back("lag " + std::to_string(tau) +
                                       ": small negative target with even Hermite rank");
            }
        }
    }
    if (res.r_x.psd_status() == PsdStatus::failed) {
        res.warnings.push_back("calibrated r_X is not positive semidefinite (min eigenvalue " +
                               num(res.r_x.min_eigenvalue()) + ")");
        res.repaired = repair_psd(res.r_x, options.psd_tol);
    }
    return res;
}

void write_calibration_csv(std::ostream& out, const CovarianceSequence& r_z, const CalibrationResult& result) {
    const auto old = out.precision(17);
    out << "tau,r_z,r_x,g_r_x,abs_error\n";
    for (std::size_t tau = 0; tau <= r_z.max_lag(); ++tau) {
        out << tau << ',' << r_z[tau] << ',' << result.r_x[tau] << ',' << result.link_values[tau] << ','
            << std::fabs(r_z[tau] - result.link_values[tau]) << '\n';
    }
    out << "# gamma=" << result.gamma << '\n';
    out << "# rank=" << result.rank << '\n';
    out << "# C=" << result.sandwich.upper_constant << '\n';
    out << "# c=" << result.sandwich.lower_constant << '\n';
    out << "# sandwich_pass=" << (result.sandwich.pass ? "true" : "false") << '\n';
    out << "# truncation_error_bound=" << result.truncation_error_bound << '\n';
    out << "# psd_status=" << to_string(result.r_x.psd_status()) << '\n';
    out << "# min_eigenvalue=" << result.r_x.min_eigenvalue() << '\n';
    out << "# circulant_min=" << result.r_x.circulant_min() << '\n';
    if (result.repaired) out << "# repaired_psd_status=" << to_string(result.repaired->psd_status()) << '\n';
    out.precision(old);
}

}  // namespace gsub
