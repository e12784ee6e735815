#include "gsub/oracles.hpp"

#include <cmath>
#include <numbers>

#include "gsub/error.hpp"

namespace gsub::oracles {

namespace {

// Orthonormal physicists' recurrence at x: p_n and p_{n-1}, both scaled by 2^-shift.
struct HermiteEval {
    double pn, pn1;
    int shift;
};

HermiteEval orthonormal_hermite(std::size_t n, double x) {
    constexpr double kPiM4 = 0.7511255444649425;  // pi^{-1/4}
    double p1 = kPiM4, p2 = 0.0;
    int shift = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double dj = static_cast<double>(j);
        p1 = x * std::sqrt(2.0 / (dj + 1.0)) * p2 - std::sqrt(dj / (dj + 1.0)) * p3;
        if (std::fabs(p1) > 0x1.0p400) {
            p1 = std::ldexp(p1, -400);
            p2 = std::ldexp(p2, -400);
            shift += 400;
        }
    }
    return {p1, p2, shift};
}

}  // namespace

QuadratureRule newton_hermite_rule(std::size_t n) {
    if (n == 0) throw DomainError("newton_hermite_rule: need n >= 1");
    const double dn = static_cast<double>(n);
    // positive roots: bracket by sign changes on a fine grid, bisect, then polish with Newton
    std::vector<double> roots;
    const double upper = std::sqrt(2.0 * dn + 1.0) + 2.0;
    const std::size_t steps = 200 * n + 1000;
    const double h = upper / static_cast<double>(steps);
    double a = h * 1e-3;
    double fa = orthonormal_hermite(n, a).pn;
    for (std::size_t s = 1; s <= steps; ++s) {
        const double b = h * static_cast<double>(s);
        const double fb = orthonormal_hermite(n, b).pn;
        if ((fa < 0.0) != (fb < 0.0)) {
            double lo = a, hi = b, flo = fa;
            for (int it = 0; it < 60 && hi - lo > 1e-13 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = orthonormal_hermite(n, mid).pn;
                if ((fm < 0.0) == (flo < 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            double x = 0.5 * (lo + hi);
            for (int it = 0; it < 3; ++it) {
                const auto e = orthonormal_hermite(n, x);
                const double step = e.pn / (std::sqrt(2.0 * dn) * e.pn1);
                if (std::fabs(step) < h) x -= step;
            }
            roots.push_back(x);
        }
        a = b;
        fa = fb;
    }
    if (roots.size() != n / 2) throw Error("newton_hermite_rule: root scan found the wrong number of roots");

    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    auto weight = [&](double x) {
        // physicists' weight 2 / p'^2 with p' = sqrt(2n) p_{n-1}, then divide by sqrt(pi) for N(0,1)
        const auto e = orthonormal_hermite(n, x);
        const double d = std::sqrt(2.0 * dn) * e.pn1;
        return std::ldexp(2.0 / (d * d), -2 * e.shift) / std::sqrt(std::numbers::pi);
    };
    const std::size_t half = n / 2;
    for (std::size_t i = 0; i < half; ++i) {
        const double x = roots[half - 1 - i];  // descending, so nodes come out ascending
        const double w = weight(x);
        rule.nodes[i] = -std::numbers::sqrt2 * x;
        rule.nodes[n - 1 - i] = std::numbers::sqrt2 * x;
        rule.weights[i] = rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) {
        rule.nodes[half] = 0.0;
        rule.weights[half] = weight(0.0);
    }
    return rule;
}

double gauss_expect(const std::function<double(double)>& f, const QuadratureRule& rule) {
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double v = f(rule.nodes[i]);
        if (!std::isfinite(v)) throw IntegrabilityError("gauss_expect: non-finite integrand at a node");
        sum += rule.weights[i] * v;
    }
    return sum;
}

double bivariate_gauss_expect(const std::function<double(double)>& f, const std::function<double(double)>& g,
                              double rho, const QuadratureRule& rule) {
    if (!(std::fabs(rho) <= 1.0)) throw DomainError("bivariate_gauss_expect: |rho| must be <= 1");
    const double s = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    double total = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double fx = f(rule.nodes[i]);
        double inner = 0.0;
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            inner += rule.weights[j] * g(rho * rule.nodes[i] + s * rule.nodes[j]);
        }
        total += rule.weights[i] * fx * inner;
    }
    if (!std::isfinite(total)) throw IntegrabilityError("bivariate_gauss_expect: non-finite sum");
    return total;
}

double gaussian_moment(std::size_t m) noexcept {
    if (m % 2 == 1) return 0.0;
    double v = 1.0;
    for (std::size_t j = m - 1; j >= 1 && j < m; j -= 2) v *= static_cast<double>(j);
    return v;
}

HermiteExpansion poly_hermite_coeffs(const std::vector<double>& power_coeffs) {
    const std::size_t degree = power_coeffs.empty() ? 0 : power_coeffs.size() - 1;
    std::vector<double> alpha(degree + 1, 0.0);

    // power-basis coefficients of He_k, built from the recurrence
    std::vector<double> prev{1.0};
    std::vector<double> cur{0.0, 1.0};
    double factorial = 1.0;
    for (std::size_t k = 0; k <= degree; ++k) {
        const std::vector<double>& hk = (k == 0) ? prev : cur;
        if (k > 0) factorial *= static_cast<double>(k);
        double expectation = 0.0;
        for (std::size_t a = 0; a < power_coeffs.size(); ++a) {
            for (std::size_t b = 0; b < hk.size(); ++b) {
                expectation += power_coeffs[a] * hk[b] * gaussian_moment(a + b);
            }
        }
        alpha[k] = expectation / factorial;
        if (k >= 1) {
            std::vector<double> next(cur.size() + 1, 0.0);
            for (std::size_t b = 0; b < cur.size(); ++b) next[b + 1] += cur[b];
            for (std::size_t b = 0; b < prev.size(); ++b) next[b] -= static_cast<double>(k) * prev[b];
            prev = std::move(cur);
            cur = std::move(next);
        }
    }
    return expansion_from_coefficients(std::move(alpha));
}

}  // namespace gsub::oracles
