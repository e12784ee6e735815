#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "gsub/marginals.hpp"

namespace gsub {

/// Probabilists' Hermite polynomial He_k(x) via H_{k+1} = x H_k - k H_{k-1}.
[[nodiscard]] double hermite_poly(std::size_t k, double x) noexcept;

/// Truncated expansion f = sum_{k<=K} alpha_k H_k against the N(0,1) weight.
struct HermiteExpansion {
    std::vector<double> coefficients;  // alpha_0 .. alpha_K
    std::vector<double> weights;       // k! alpha_k^2, same indexing
    double second_moment = 0.0;        // E[f(X)^2]
    double l2_mass = 0.0;              // sum_k k! alpha_k^2
    double tail_mass_bound = 0.0;      // |E f^2 - l2_mass|

    [[nodiscard]] std::size_t truncation() const noexcept {
        return coefficients.empty() ? 0 : coefficients.size() - 1;
    }
    [[nodiscard]] double evaluate(double x) const noexcept;
};

inline constexpr std::size_t kDefaultTruncation = 64;
inline constexpr std::size_t kDefaultQuadNodes = 256;
inline constexpr double kDefaultRankTol = 1e-8;

/// alpha_k = E[f(X) H_k(X)] / k! by Gauss-Hermite quadrature.
/// Throws IntegrabilityError on non-finite sums.
[[nodiscard]] HermiteExpansion expand(const std::function<double(double)>& f,
                                      std::size_t truncation = kDefaultTruncation,
                                      std::size_t quad_nodes = kDefaultQuadNodes);

/// Expansion of a transport. Empirical (step-function) transports are
/// integrated exactly between jump points instead of by quadrature.
[[nodiscard]] HermiteExpansion expand_transport(const Transport& t,
                                                std::size_t truncation = kDefaultTruncation,
                                                std::size_t quad_nodes = kDefaultQuadNodes);

/// Builds an expansion from known coefficients; the tail bound is zero.
[[nodiscard]] HermiteExpansion expansion_from_coefficients(std::vector<double> alpha);

/// Smallest k >= 1 with k! alpha_k^2 > tol * l2_mass. Throws DegenerateError
/// for a (numerically) constant function.
[[nodiscard]] std::size_t hermite_rank(const HermiteExpansion& e, double tol = kDefaultRankTol);

/// CSV rows "k,alpha_k,k!alpha_k^2" with a header line.
void write_expansion_csv(std::ostream& out, const HermiteExpansion& e);

}  // namespace gsub
