#pragma once

#include <cstddef>
#include <vector>

namespace gsub {

/// Gauss-Hermite rule for the standard normal weight: sum(weights) == 1 and
/// sum w_i p(x_i) == E[p(X)] for polynomials of degree < 2n.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point rule. Nodes come from the eigenvalues of the Jacobi matrix of the
/// probabilists' recurrence, polished by Newton; weights from the Christoffel
/// function. Rules are cached, so repeated calls are cheap and thread-safe.
[[nodiscard]] const GaussRule& gauss_hermite_rule(std::size_t n);

}  // namespace gsub
