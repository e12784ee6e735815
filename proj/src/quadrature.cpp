#include "gsub/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "gsub/error.hpp"

namespace gsub {
namespace {

struct Orthonormal {
    double value;       // p_n(x), scaled by 2^-shift
    double previous;    // p_{n-1}(x), same scale
    double sum_squares; // sum_{k<n} p_k(x)^2, scaled by 2^-2shift
    int shift;
};

// Orthonormal probabilists' polynomials p_k = He_k / sqrt(k!):
//   p_{k+1} = (x p_k - sqrt(k) p_{k-1}) / sqrt(k+1)
// Values grow like x^k / sqrt(k!), so the recursion rescales by 2^-300 when needed.
Orthonormal evaluate(std::size_t n, double x) {
    double prev = 0.0;
    double cur = 1.0;
    double sumsq = 0.0;
    int shift = 0;
    for (std::size_t k = 0; k < n; ++k) {
        sumsq += cur * cur;
        const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) /
                            std::sqrt(static_cast<double>(k + 1));
        prev = cur;
        cur = next;
        if (std::fabs(cur) > 0x1.0p300) {
            cur = std::ldexp(cur, -300);
            prev = std::ldexp(prev, -300);
            sumsq = std::ldexp(sumsq, -600);
            shift += 300;
        }
    }
    return {cur, prev, sumsq, shift};
}

GaussRule build(std::size_t n) {
    if (n == 0) throw DomainError("gauss_hermite_rule: need at least one node");
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    if (n == 1) {
        rule.nodes[0] = 0.0;
        rule.weights[0] = 1.0;
        return rule;
    }

    Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    Eigen::VectorXd sub(static_cast<Eigen::Index>(n - 1));
    for (std::size_t k = 1; k < n; ++k) sub[static_cast<Eigen::Index>(k - 1)] = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& eig = solver.eigenvalues();

    for (std::size_t i = 0; i < n; ++i) {
        double x = eig[static_cast<Eigen::Index>(i)];
        // p_n' = sqrt(n) p_{n-1}; the ratio is independent of the scaling.
        for (int it = 0; it < 3; ++it) {
            const Orthonormal p = evaluate(n, x);
            const double step = p.value / (std::sqrt(static_cast<double>(n)) * p.previous);
            if (!std::isfinite(step)) break;
            x -= step;
        }
        const Orthonormal p = evaluate(n, x);
        rule.nodes[i] = x;
        rule.weights[i] = std::ldexp(1.0 / p.sum_squares, -2 * p.shift);
    }

    // symmetrize: the rule is exactly symmetric in exact arithmetic
    for (std::size_t i = 0; i < n / 2; ++i) {
        const std::size_t j = n - 1 - i;
        const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.nodes[i] = -x;
        rule.nodes[j] = x;
        rule.weights[i] = rule.weights[j] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;

    double total = 0.0;
    for (double w : rule.weights) total += w;
    for (double& w : rule.weights) w /= total;
    return rule;
}

}  // namespace

const GaussRule& gauss_hermite_rule(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, std::unique_ptr<GaussRule>> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<GaussRule>(build(n))).first;
    return *it->second;
}

}  // namespace gsub
