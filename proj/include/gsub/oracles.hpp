#pragma once

// Brute-force references for tests. Nothing here shares code with the
// quadrature, expansion, or link routines it is used to check.

#include <cstddef>
#include <functional>
#include <vector>

#include "gsub/hermite.hpp"

namespace gsub::oracles {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    bool normalized = true;  // weights sum to one (standard normal weight)
};

/// Gauss-Hermite rule: roots of the physicists' recurrence bracketed on a grid,
/// bisected and Newton-polished, rescaled to the N(0,1) weight.
[[nodiscard]] QuadratureRule newton_hermite_rule(std::size_t n = 200);

/// sum_i w_i f(x_i) ~ E[f(X)].
[[nodiscard]] double gauss_expect(const std::function<double(double)>& f, const QuadratureRule& rule);

/// E[f(X) g(Y)] for standard bivariate normal (X, Y) with correlation rho,
/// on the tensor grid Y = rho X + sqrt(1 - rho^2) Z.
[[nodiscard]] double bivariate_gauss_expect(const std::function<double(double)>& f,
                                            const std::function<double(double)>& g, double rho,
                                            const QuadratureRule& rule);

/// Exact Hermite coefficients of a polynomial sum_m p[m] x^m from Gaussian
/// moments E[X^{2m}] = (2m-1)!!.
[[nodiscard]] HermiteExpansion poly_hermite_coeffs(const std::vector<double>& power_coeffs);

/// E[X^m] for X ~ N(0,1).
[[nodiscard]] double gaussian_moment(std::size_t m) noexcept;

}  // namespace gsub::oracles
