#include "gsub/hermite.hpp"

#include <cmath>
#include <ostream>

#include "gsub/error.hpp"
#include "gsub/kernels.hpp"
#include "gsub/normal.hpp"
#include "gsub/quadrature.hpp"

namespace gsub {
namespace {

// p_0..p_{count-1} at x, orthonormal: p_k = He_k / sqrt(k!)
void orthonormal_values(double x, std::size_t count, double* out) {
    if (count == 0) return;
    out[0] = 1.0;
    if (count == 1) return;
    out[1] = x;
    for (std::size_t k = 1; k + 1 < count; ++k) {
        out[k + 1] = (x * out[k] - std::sqrt(static_cast<double>(k)) * out[k - 1]) /
                     std::sqrt(static_cast<double>(k + 1));
    }
}

HermiteExpansion finish(std::vector<double> normalized, double second_moment) {
    HermiteExpansion e;
    const std::size_t count = normalized.size();
    e.coefficients.resize(count);
    e.weights.resize(count);
    double mass = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const double c = normalized[k];
        e.coefficients[k] = c * std::exp(-0.5 * std::lgamma(static_cast<double>(k) + 1.0));
        e.weights[k] = c * c;
        mass += c * c;
    }
    e.second_moment = second_moment;
    e.l2_mass = mass;
    e.tail_mass_bound = std::fabs(second_moment - mass);
    return e;
}

HermiteExpansion expand_step_function(const Transport& t, std::size_t truncation) {
    // f = z_(i) on (c_{i-1}, c_i], c_j = Phi^{-1}(j/n). Integrating
    // H_k phi = -(H_{k-1} phi)' piece by piece telescopes to
    //   E[f H_k] = sum_j (z_{j+1} - z_j) H_{k-1}(c_j) phi(c_j).
    const auto s = t.marginal().sorted_sample();
    const double n = static_cast<double>(s.size());
    const std::size_t count = truncation + 1;
    std::vector<double> acc(count, 0.0);
    std::vector<double> p(count);
    for (std::size_t j = 1; j < s.size(); ++j) {
        const double jump = s[j] - s[j - 1];
        if (jump == 0.0) continue;
        const double c = normal::quantile(static_cast<double>(j) / n);
        const double scale = jump * normal::pdf(c);
        orthonormal_values(c, truncation, p.data());
        for (std::size_t k = 1; k < count; ++k) acc[k] += scale * p[k - 1];
    }
    for (std::size_t k = 1; k < count; ++k) acc[k] /= std::sqrt(static_cast<double>(k));

    const double mean = t.marginal().mean();
    double second = 0.0;
    for (double v : s) {
        const double shifted = t.centered() ? v - mean : v;
        second += shifted * shifted;
    }
    second /= n;
    acc[0] = t.centered() ? 0.0 : mean;
    return finish(std::move(acc), second);
}

}  // namespace

double hermite_poly(std::size_t k, double x) noexcept {
    if (k == 0) return 1.0;
    double prev = 1.0;
    double cur = x;
    for (std::size_t j = 1; j < k; ++j) {
        const double next = x * cur - static_cast<double>(j) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double HermiteExpansion::evaluate(double x) const noexcept {
    double sum = 0.0;
    double prev = 0.0;
    double cur = 1.0;
    for (std::size_t k = 0; k < coefficients.size(); ++k) {
        sum += coefficients[k] * cur;
        const double next = x * cur - static_cast<double>(k) * prev;
        prev = cur;
        cur = next;
    }
    return sum;
}

HermiteExpansion expand(const std::function<double(double)>& f, std::size_t truncation, std::size_t quad_nodes) {
    if (quad_nodes < truncation + 1) throw DomainError("expand: need quad_nodes >= truncation + 1");
    const GaussRule& rule = gauss_hermite_rule(quad_nodes);
    const std::size_t n = rule.nodes.size();
    const std::size_t count = truncation + 1;

    std::vector<double> wf(n);
    double second = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = f(rule.nodes[i]);
        if (!std::isfinite(v)) throw IntegrabilityError("expand: f is not finite at a quadrature node");
        wf[i] = rule.weights[i] * v;
        second += wf[i] * v;
    }
    if (!std::isfinite(second)) throw IntegrabilityError("expand: E[f^2] quadrature sum is not finite");

    // column k of `basis` holds p_k at every node
    std::vector<double> basis(count * n);
    std::vector<double> p(count);
    for (std::size_t i = 0; i < n; ++i) {
        orthonormal_values(rule.nodes[i], count, p.data());
        for (std::size_t k = 0; k < count; ++k) basis[k * n + i] = p[k];
    }
    std::vector<double> normalized(count);
    for (std::size_t k = 0; k < count; ++k) {
        normalized[k] = kernels::dot(wf, std::span<const double>(basis.data() + k * n, n));
        if (!std::isfinite(normalized[k])) throw IntegrabilityError("expand: coefficient sum is not finite");
    }
    return finish(std::move(normalized), second);
}

HermiteExpansion expand_transport(const Transport& t, std::size_t truncation, std::size_t quad_nodes) {
    if (t.marginal().is_empirical()) return expand_step_function(t, truncation);
    return expand([&t](double x) { return t(x); }, truncation, quad_nodes);
}

HermiteExpansion expansion_from_coefficients(std::vector<double> alpha) {
    std::vector<double> normalized(alpha.size());
    double second = 0.0;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        normalized[k] = alpha[k] * std::exp(0.5 * std::lgamma(static_cast<double>(k) + 1.0));
        second += normalized[k] * normalized[k];
    }
    HermiteExpansion e = finish(std::move(normalized), second);
    // exact k! alpha_k^2, not the square of the rounded normalized coefficient
    double fact = 1.0;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        if (k > 0) fact *= static_cast<double>(k);
        e.weights[k] = fact * alpha[k] * alpha[k];
    }
    e.coefficients = std::move(alpha);  // keep the exact inputs
    e.tail_mass_bound = 0.0;
    return e;
}

std::size_t hermite_rank(const HermiteExpansion& e, double tol) {
    const double threshold = tol * e.l2_mass;
    for (std::size_t k = 1; k < e.weights.size(); ++k) {
        if (e.weights[k] > threshold && e.weights[k] > 0.0) return k;
    }
    throw DegenerateError("constant function, Hermite rank undefined");
}

void write_expansion_csv(std::ostream& out, const HermiteExpansion& e) {
    const auto old = out.precision(17);
    out << "k,alpha_k,weight\n";
    for (std::size_t k = 0; k < e.coefficients.size(); ++k) {
        out << k << ',' << e.coefficients[k] << ',' << e.weights[k] << '\n';
    }
    out.precision(old);
}

}  // namespace gsub
